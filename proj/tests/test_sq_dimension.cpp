// Copyright 2026 The bml Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <bml/generators.hpp>
#include <bml/reference.hpp>
#include <bml/sq_dimension.hpp>

#include <gtest/gtest.h>

namespace bml {
namespace {

std::vector<Concept> members_of(const ConceptClass& cls, const SQWitness& w) {
    std::vector<Concept> out;
    for (Index i : w.members) out.push_back(cls[i]);
    return out;
}

TEST(SqDimExact, Singleton) {
    const ConceptClass cls(std::vector<Concept>{Concept::constant(3, 1)});
    EXPECT_EQ(sq_dim_exact(cls, Distribution::uniform(3)).dim, 1u);
}

TEST(SqDimExact, ParityIsMaximal) {
    for (std::size_t n = 1; n <= 4; ++n) {
        const Generated g = generate("parity:" + std::to_string(n));
        const SQWitness w = sq_dim_exact(g.cls, g.P);
        EXPECT_EQ(w.dim, std::size_t{1} << n);
        EXPECT_TRUE(reference::witness_ok(members_of(g.cls, w), g.P));
    }
}

TEST(SqDimExact, AntipodalPair) {
    const Concept h(std::vector<std::int8_t>{1, -1, -1});
    const ConceptClass cls(std::vector<Concept>{h, -h});
    EXPECT_EQ(sq_dim_exact(cls, Distribution::uniform(3)).dim, 1u);
    EXPECT_EQ(sq_dim_greedy(cls, Distribution::uniform(3), 1).dim, 1u);
}

TEST(SqDimExact, CapIsEnforced) {
    const Generated g = generate("threshold:30");
    try {
        sq_dim_exact(g.cls, g.P);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::capacity);
    }
    EXPECT_NO_THROW(sq_dim_exact(g.cls, g.P, SQDimOptions{40}));
}

TEST(SqDimExact, MatchesBruteForceOnRandomClasses) {
    Rng rng(21);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t m = 1 + rng.below(12);
        const std::size_t n = 1 + rng.below(8);
        const ConceptClass cls = make_random(m, n, 5000 + trial);
        std::vector<double> w(n);
        for (auto& v : w) v = 0.05 + rng.uniform();
        const Distribution P = Distribution::from_weights(w);
        const SQWitness ex = sq_dim_exact(cls, P);
        EXPECT_EQ(ex.dim, reference::sq_dim(cls.concepts(), P));
        EXPECT_TRUE(verify_witness(cls, P, ex));
        const SQWitness gr = sq_dim_greedy(cls, P, trial);
        EXPECT_LE(gr.dim, ex.dim);
        EXPECT_TRUE(reference::witness_ok(members_of(cls, gr), P));
    }
}

TEST(SqDimExact, DuplicatesDoNotChangeDimension) {
    for (int trial = 0; trial < 40; ++trial) {
        const ConceptClass base = make_random(6, 7, 300 + trial);
        std::vector<Concept> dup = base.concepts();
        dup.push_back(base[static_cast<Index>(trial) % base.size()]);
        const ConceptClass with{std::move(dup)};
        const Distribution P = Distribution::uniform(7);
        EXPECT_EQ(sq_dim_exact(with, P).dim, sq_dim_exact(base, P).dim);
    }
}

TEST(SqDimGreedy, OrthogonalClassIsFull) {
    const Generated g = generate("parity:3");
    for (std::uint64_t seed = 0; seed < 10; ++seed) EXPECT_EQ(sq_dim_greedy(g.cls, g.P, seed).dim, 8u);
}

TEST(SqDimGreedy, DeterministicPerSeed) {
    const ConceptClass cls = make_random(20, 8, 4);
    const Distribution P = Distribution::uniform(8);
    EXPECT_EQ(sq_dim_greedy(cls, P, 9).members, sq_dim_greedy(cls, P, 9).members);
}

TEST(VerifyWitness, RejectsBadClaims) {
    const Concept h(std::vector<std::int8_t>{1, 1, -1, -1});
    const ConceptClass cls(std::vector<Concept>{h, -h});
    EXPECT_FALSE(verify_witness(cls, Distribution::uniform(4), SQWitness{2, {0, 1}}));
    const Generated g = generate("parity:2");
    EXPECT_TRUE(verify_witness(g.cls, g.P, SQWitness{4, {0, 1, 2, 3}}));
    EXPECT_FALSE(verify_witness(g.cls, g.P, SQWitness{3, {0, 1, 2, 3}}));
    EXPECT_FALSE(verify_witness(g.cls, g.P, SQWitness{2, {1, 1}}));
}

TEST(Ball, UnitRadiusIsTheCentre) {
    const Generated g = generate("threshold:8");
    const BallEstimate est = ball_max_sqdim(g.cls, g.P, 1.0, 3);
    EXPECT_EQ(est.best_Q, g.P);
    EXPECT_EQ(est.dim_at_best_Q, sq_dim_exact(g.cls, g.P).dim);
}

TEST(Ball, OrthogonalClassStaysMaximal) {
    const Generated g = generate("parity:2");
    EXPECT_EQ(ball_max_sqdim(g.cls, g.P, 3.0, 3).dim_at_best_Q, 4u);
}

TEST(Ball, ThresholdSearchIsCertifiedAndMonotone) {
    const Generated g = generate("threshold:8");
    BallSearchOptions opts;
    opts.restarts = 20;
    const BallEstimate est = ball_max_sqdim(g.cls, g.P, 4.0, 7, opts);
    EXPECT_GE(est.dim_at_best_Q, sq_dim_exact(g.cls, g.P).dim);
    EXPECT_TRUE(is_mu_close(g.P, est.best_Q, 4.0));
    EXPECT_EQ(est.witness.dim, est.dim_at_best_Q);
    EXPECT_TRUE(reference::witness_ok(members_of(g.cls, est.witness), est.best_Q));
    ASSERT_EQ(est.best_by_restart.size(), opts.restarts + 1);
    for (std::size_t r = 1; r < est.best_by_restart.size(); ++r)
        EXPECT_GE(est.best_by_restart[r], est.best_by_restart[r - 1]);
    EXPECT_THROW(ball_max_sqdim(g.cls, g.P, 0.5, 1), Error);
}

}  // namespace
}  // namespace bml
