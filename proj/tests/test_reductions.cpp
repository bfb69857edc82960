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
#include <bml/memory_model.hpp>
#include <bml/reductions.hpp>
#include <bml/sq_dimension.hpp>

#include <gtest/gtest.h>

#include <cmath>

namespace bml {
namespace {

Concept flip(const Concept& c, Index x) {
    std::vector<std::int8_t> labels(c.labels().begin(), c.labels().end());
    labels[x] = static_cast<std::int8_t>(-labels[x]);
    return Concept(std::move(labels));
}

Distribution two_point_P() { return Distribution(std::vector<double>{0.5, 0.5}); }
Distribution two_point_Q() { return Distribution(std::vector<double>{0.25, 0.75}); }

TEST(Quantize, Examples) {
    QuantizedQuery a = quantize_signs(1.0, 0.5);
    EXPECT_EQ(a.n, 3u);
    EXPECT_EQ(a.k, 0u);
    EXPECT_DOUBLE_EQ(a.mean(), 1.0);

    QuantizedQuery b = quantize_signs(0.0, 0.5);
    EXPECT_EQ(b.n, 3u);
    EXPECT_NEAR(std::abs(b.mean()), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(b.k, 1u);

    QuantizedQuery c = quantize_signs(0.5, 0.25);
    EXPECT_EQ(c.n, 5u);
    EXPECT_EQ(c.k, 1u);
    EXPECT_DOUBLE_EQ(c.mean(), 0.6);
    EXPECT_EQ(c.signs, (std::vector<std::int8_t>{-1, 1, 1, 1, 1}));
}

TEST(Quantize, ErrorBelowTauAcrossRange) {
    for (double tau : {1.0, 0.3, 0.07, 0.001}) {
        for (int i = -50; i <= 50; ++i) {
            const double g = i / 50.0;
            const QuantizedQuery q = quantize_signs(g, tau);
            double s = 0.0;
            for (auto v : q.signs) s += v;
            EXPECT_NEAR(s / static_cast<double>(q.n), q.mean(), 1e-12);
            EXPECT_LT(std::abs(q.mean() - g), tau) << g << " " << tau;
        }
    }
    EXPECT_THROW(quantize_signs(1.5, 0.1), Error);
    EXPECT_THROW(quantize_signs(0.0, 0.0), Error);
}

TEST(Rejection, AcceptanceRecoversP) {
    const auto acc = rejection_acceptance(two_point_P(), two_point_Q(), 0.5);
    EXPECT_DOUBLE_EQ(acc[0], 1.0);
    EXPECT_NEAR(acc[1], 1.0 / 3.0, 1e-15);
    const Distribution kept = accepted_distribution(two_point_Q(), acc);
    EXPECT_NEAR(kept[0], 0.5, 1e-15);
    EXPECT_NEAR(kept[1], 0.5, 1e-15);
}

TEST(Rejection, FarQIsPrecondition) {
    try {
        rejection_acceptance(two_point_P(), two_point_Q(), 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::precondition);
    }
    const Distribution Q0(std::vector<double>{1.0, 0.0});
    EXPECT_THROW(rejection_acceptance(two_point_P(), Q0, 0.5), Error);
}

TEST(Rewrite, TwoPointFamilyMatchesPCorrelation) {
    const double eps = 0.5;
    const double tau = 0.2;
    const Concept psi(std::vector<std::int8_t>{1, -1});
    const RewrittenQueryFamily fam = rewrite_query(psi, two_point_P(), two_point_Q(), eps, tau);
    EXPECT_DOUBLE_EQ(fam.scale, 2.0);
    EXPECT_DOUBLE_EQ(fam.tolerance, 0.05);
    EXPECT_EQ(fam.queries.size(), 21u);
    for (const auto& labels : {std::vector<std::int8_t>{1, 1}, std::vector<std::int8_t>{1, -1},
                               std::vector<std::int8_t>{-1, 1}, std::vector<std::int8_t>{-1, -1}}) {
        const Concept c(labels);
        double p_side = 0.5 * psi[0] * c[0] + 0.5 * psi[1] * c[1];
        double q_side = 0.0;
        for (const auto& q : fam.queries) q_side += 0.25 * q[0] * c[0] + 0.75 * q[1] * c[1];
        q_side = q_side / static_cast<double>(fam.queries.size()) / eps;
        EXPECT_LE(std::abs(q_side - p_side), tau / 2.0 + 1e-12);
    }
}

Distribution skewed(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t x = 0; x < n; ++x) w[x] = 1.0 + static_cast<double>(x % 3);
    return Distribution::from_weights(w);
}

TEST(Rejection, PacTransferKeepsLoss) {
    const Generated g = generate("threshold:16");
    const Distribution Q = skewed(16);
    const double eps = 0.5;
    ASSERT_TRUE(is_mu_close(g.P, Q, 1.0 / eps));
    for (Index t : {0u, 9u, 16u}) {
        EnumerationLearner en(g.cls, 1500);
        ExampleStream qs(Q, g.cls[t], 70 + t);
        const RejectionRun run = pac_rejection_learn(en, g.P, qs, eps, 80 + t);
        EXPECT_EQ(run.accepted, 1500u);
        EXPECT_GT(run.consumed, run.accepted);
        EXPECT_EQ(loss(run.hypothesis, g.cls[t], Q), 0.0);
        EXPECT_EQ(run.bits, en.state_width() + bits_for(1501));
        EXPECT_GT(run.min_acceptance, 0.0);
    }
}

TEST(Rejection, PacTransferRejectsFarQ) {
    const Generated g = generate("threshold:4");
    std::vector<double> w{0.97, 0.01, 0.01, 0.01};
    const Distribution Q(w);
    EnumerationLearner en(g.cls, 10);
    ExampleStream qs(Q, g.cls[0], 1);
    EXPECT_THROW(pac_rejection_learn(en, g.P, qs, 0.5, 2), Error);
}

TEST(Rejection, SqTransferFindsTarget) {
    const Generated g = generate("parity:3");
    const Distribution Q = skewed(8);
    const double eps = 0.5;
    const double tau = 0.25;
    for (Index t = 0; t < g.cls.size(); ++t) {
        ExactOracle q_oracle(g.cls[t], Q);
        const SQLearner strong = [&](CorrelationOracle& o) { return sq_best_member_learn(o, g.cls, tau); };
        const SQRejectionRun run = sq_rejection_learn(strong, q_oracle, g.P, Q, eps);
        EXPECT_EQ(run.hypothesis, g.cls[t]);
        EXPECT_EQ(run.original_queries, 8u);
        EXPECT_EQ(run.q_queries, 8u * 17u);
        EXPECT_DOUBLE_EQ(run.q_tolerance, eps * tau / 2.0);
    }
}

TEST(Properify, ReturnsNearbyMember) {
    const Generated g = generate("threshold:16");
    const double eps = 0.1;
    for (Index t : {0u, 8u, 16u}) {
        Concept h = g.cls[t];
        const ProperifyResult r = properify(h, g.cls, g.P, eps, 5 + t);
        ASSERT_TRUE(r.success);
        ASSERT_TRUE(r.index.has_value());
        EXPECT_EQ(r.output, g.cls[*r.index]);
        EXPECT_LE(loss(r.output, h, g.P), 3.0 * eps);
        EXPECT_EQ(r.points_per_candidate, properify_points(17, eps, 8.0));
        EXPECT_EQ(r.unlabeled_draws, r.points_per_candidate * r.candidates_tested);
    }
}

TEST(Properify, ImproperHypothesisIsRounded) {
    const Generated g = generate("parity:4");
    Concept h = g.cls[6];
    h = flip(h, 3);
    const ProperifyResult r = properify(h, g.cls, g.P, 0.1, 3);
    ASSERT_TRUE(r.success);
    EXPECT_EQ(*r.index, 6u);
}

TEST(Properify, FailsWhenNoMemberIsClose) {
    const ConceptClass cls(std::vector<Concept>{Concept::constant(4, 1)});
    const ProperifyResult r = properify(Concept::constant(4, -1), cls, Distribution::uniform(4), 0.1, 1);
    EXPECT_FALSE(r.success);
    EXPECT_FALSE(r.index.has_value());
    EXPECT_EQ(r.candidates_tested, 1u);
}

TEST(Identify, MemberIsReturnedAsIs) {
    const Generated g = generate("parity:3");
    for (Index i = 0; i < g.cls.size(); ++i) {
        const IdentifyResult r = exact_identify(g.cls[i], g.cls, g.P);
        EXPECT_EQ(r.member, i);
        EXPECT_EQ(r.distance, 0.0);
    }
}

TEST(Identify, TooFewMembersIsPrecondition) {
    const Generated g = generate("parity:1");
    ASSERT_EQ(g.cls.size(), 2u);
    try {
        exact_identify(g.cls[0], g.cls, g.P);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::precondition);
    }
}

TEST(Identify, SmallCorruptionIsUndone) {
    const Generated g = generate("parity:4");
    for (Index i = 0; i < g.cls.size(); ++i) {
        const Concept h = flip(g.cls[i], i % 16);
        const IdentifyResult r = exact_identify(h, g.cls, g.P);
        EXPECT_EQ(r.member, i);
        EXPECT_DOUBLE_EQ(r.distance, 1.0 / 16.0);
    }
}

TEST(Identify, QuarterCorruptionCanBeAmbiguous) {
    const Generated g = generate("parity:2");
    const Concept h = flip(g.cls[0], 3);
    std::size_t within = 0;
    for (const auto& c : g.cls) within += loss(h, c, g.P) <= kIdentifyRadius ? 1 : 0;
    EXPECT_EQ(within, 3u);
    try {
        exact_identify(h, g.cls, g.P);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invariant);
    }
}

TEST(Identify, FarHypothesisIsIdentificationError) {
    const Generated g = generate("parity:2");
    const Concept h = -g.cls[1];
    try {
        exact_identify(h, g.cls, g.P);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::identification);
    }
}

TEST(StreamOracle, SampleCount) {
    EXPECT_EQ(StreamBackedOracle::samples_for(1.0, 1), 4.0);
    EXPECT_EQ(StreamBackedOracle::samples_for(0.1, 10), std::ceil(std::log(60.0) / (2 * 0.05 * 0.05)));
}

TEST(StreamOracle, SingleQueryUsesFourExamples) {
    const Generated g = generate("threshold:4");
    ExampleStream s(g.P, g.cls[2], 3);
    const BoundedSQAlgorithm one = [&](CorrelationOracle& o, std::size_t& bits) {
        bits = 1;
        o.answer(SQQuery(g.cls[2], 1.0));
        return g.cls[2];
    };
    const BoundedMemoryReport r = sq_to_bounded_memory(one, s, 1);
    EXPECT_EQ(r.samples, 4.0);
    EXPECT_EQ(s.consumed(), 4u);
    EXPECT_EQ(r.queries, 1u);
    EXPECT_EQ(r.bits, r.algorithm_bits + r.running_sum_bits);
    EXPECT_EQ(r.running_sum_bits, bits_for(9));
}

TEST(StreamOracle, WeakLearnerThroughStream) {
    const Generated g = generate("threshold:16");
    const std::size_t d = sq_dim_exact(g.cls, g.P).dim;
    const std::size_t q = weak_sq_query_count(g.cls, g.P, d);
    std::size_t good = 0;
    for (Index t = 0; t < g.cls.size(); ++t) {
        ExampleStream s(g.P, g.cls[t], 200 + t);
        const BoundedMemoryReport r = sq_to_bounded_memory(weak_sq_algorithm(g.cls, d), s, q);
        EXPECT_EQ(r.queries, q);
        EXPECT_EQ(r.algorithm_bits, weak_sq_state_bits(17, d));
        EXPECT_DOUBLE_EQ(r.samples, static_cast<double>(q) * StreamBackedOracle::samples_for(1.0 / (3.0 * d), q));
        good += correlation(r.hypothesis, g.cls[t], g.P) >= 1.0 / (3.0 * static_cast<double>(d)) ? 1 : 0;
    }
    EXPECT_GE(good, 14u);
}

}  // namespace
}  // namespace bml
