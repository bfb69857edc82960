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


#include <bml/boosting.hpp>
#include <bml/generators.hpp>
#include <bml/sq_dimension.hpp>
#include <bml/reference.hpp>
#include <bml/stream.hpp>

#include <gtest/gtest.h>

#include <cmath>

namespace bml {
namespace {

Concept C(std::initializer_list<int> v) {
    std::vector<std::int8_t> out;
    for (int x : v) out.push_back(static_cast<std::int8_t>(x));
    return Concept(std::move(out));
}

TEST(BinomPmf, Examples) {
    EXPECT_NEAR(binom_pmf(4, 2, 0.5), 0.375, 1e-15);
    EXPECT_EQ(binom_pmf(3, -1, 0.7), 0.0);
    EXPECT_EQ(binom_pmf(3, 4, 0.7), 0.0);
    EXPECT_NEAR(binom_pmf(3, 1, 0.6), 0.288, 1e-15);
    EXPECT_THROW(binom_pmf(3, 1, 1.2), Error);
}

TEST(BinomPmf, MatchesLogFactorialReference) {
    const reference::LogFactorial lf(400);
    for (std::int64_t n : {0, 1, 7, 50, 399})
        for (std::int64_t k = -1; k <= n + 1; ++k)
            for (double p : {0.3, 0.5, 0.52, 0.9}) {
                const double ref = static_cast<double>(reference::binom(lf, n, k, p));
                EXPECT_NEAR(binom_pmf(n, k, p), ref, 1e-12 * std::max(1.0, ref)) << n << " " << k << " " << p;
            }
}

TEST(BbmWeight, Examples) {
    EXPECT_NEAR(bbm_weight(3, 0, 0, 0.1), 0.288, 1e-15);
    EXPECT_EQ(bbm_weight(5, 3, 3, 0.1), 0.0);    // floor((2 - 3)/2) < 0
    EXPECT_EQ(bbm_weight(4, 4, 0, 0.5), 1.0);    // T - t = 0, r <= 0
    EXPECT_EQ(bbm_weight(4, 4, 2, 0.5), 0.0);    // floor(-2/2) = -1
}

TEST(BbmWeight, InUnitIntervalAndHalfGammaPointMass) {
    for (std::int64_t T : {1, 4, 9, 30})
        for (std::int64_t t = 0; t <= T; ++t)
            for (std::int64_t r = -t; r <= t; r += 2) {
                for (double g : {0.01, 0.1, 0.3}) {
                    const double w = bbm_weight(T, t, r, g);
                    EXPECT_GE(w, 0.0);
                    EXPECT_LE(w, 1.0);
                }
                const std::int64_t k = (T - t - r) >= 0 ? (T - t - r) / 2 : -((-(T - t - r) + 1) / 2);
                EXPECT_EQ(bbm_weight(T, t, r, 0.5), k == T - t ? 1.0 : 0.0);
            }
    EXPECT_THROW(bbm_weight(3, 4, 0, 0.1), Error);
}

TEST(Majority, TieRuleAndVotes) {
    const Concept h = C({1, -1, 1});
    EXPECT_EQ(MajorityHypothesis({h}).to_concept(3), h);
    const MajorityHypothesis tie({h, -h});
    for (Index x = 0; x < 3; ++x) EXPECT_EQ(majority_eval(tie, x), -1);
    const MajorityHypothesis three({C({1}), C({1}), C({-1})});
    EXPECT_EQ(majority_eval(three, 0), 1);
}

TEST(Majority, RandomVoteVectors) {
    Rng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t k = 1 + rng.below(8);
        std::vector<Concept> members;
        int sum = 0;
        for (std::size_t i = 0; i < k; ++i) {
            const int v = rng.bernoulli(0.5) ? 1 : -1;
            sum += v;
            members.push_back(C({v}));
        }
        EXPECT_EQ(majority_eval(MajorityHypothesis(members), 0), sum > 0 ? 1 : -1);
    }
}

BoostState state_with(const BoostParams& p, std::initializer_list<Concept> hs) {
    BoostState s(p);
    for (const auto& h : hs) s.push(WeakHypothesis{h, std::nullopt, false});
    return s;
}

TEST(BbmDistribution, RoundZeroEvenHorizonIsP) {
    const Distribution P({0.1, 0.2, 0.3, 0.4});
    const BoostState s(BoostParams::make(0.1, 0.3, 2.0, 3.0, 6));
    const Distribution Pt = bbm_distribution(P, s, C({1, -1, 1, 1}));
    for (Index x = 0; x < 4; ++x) EXPECT_NEAR(Pt[x], P[x], 1e-15);
}

TEST(BbmDistribution, NormalizesProducts) {
    const double w[] = {0.2, 0.8};
    const Distribution Pt = reweight(Distribution::uniform(2), w);
    EXPECT_DOUBLE_EQ(Pt[0], 0.2);
    EXPECT_DOUBLE_EQ(Pt[1], 0.8);
    const double zero[] = {0.0, 0.0};
    try {
        reweight(Distribution::uniform(2), zero);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::degenerate);
    }
}

TEST(BbmDistribution, HandComputedTwoRounds) {
    // T = 4, t = 2, gamma = 0.1, margins (2, 0, 0, 2): weights 0.16 and 0.48.
    const BoostState s = state_with(BoostParams::make(0.1, 0.3, 2.0, 3.0, 4), {C({1, 1, -1, -1}), C({1, -1, 1, -1})});
    const Concept c = C({1, 1, 1, -1});
    const Distribution Pt = bbm_distribution(Distribution::uniform(4), s, c);
    EXPECT_NEAR(Pt[0], 0.125, 1e-15);
    EXPECT_NEAR(Pt[1], 0.375, 1e-15);
    EXPECT_NEAR(Pt[2], 0.375, 1e-15);
    EXPECT_NEAR(Pt[3], 0.125, 1e-15);
}

TEST(BbmDistribution, MatchesReferenceAndRejectionIdentity) {
    Rng rng(8);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + rng.below(12);
        const ConceptClass cls = make_random(6, n, 40 + trial);
        std::vector<double> pw(n);
        for (auto& v : pw) v = 0.05 + rng.uniform();
        const Distribution P = Distribution::from_weights(pw);
        const std::size_t T = 5 + rng.below(20);
        const double gamma = 0.05 + 0.2 * rng.uniform();
        BoostState s(BoostParams::make(gamma, 0.2, 2.0, 3.0, T));
        std::vector<Concept> hyps;
        const std::size_t t = rng.below(T);
        for (std::size_t i = 0; i < t; ++i) {
            hyps.push_back(cls[rng.below(cls.size())]);
            s.push(WeakHypothesis{hyps.back(), std::nullopt, false});
        }
        const Concept& c = cls[0];
        const reference::LogFactorial lf(T + 1);
        const auto ref = reference::bbm_distribution(P, hyps, c, T, gamma, lf);
        long double zr = 0.0L;
        for (auto v : ref) zr += v;
        if (zr == 0.0L) continue;
        const Distribution Pt = bbm_distribution(P, s, c);
        // Acceptance w / w_max applied to P-draws: Q = P here.
        const double wmax = bbm_weight_max(static_cast<std::int64_t>(T), static_cast<std::int64_t>(t), gamma);
        std::vector<double> acc(n);
        long double za = 0.0L;
        for (Index x = 0; x < n; ++x) {
            acc[x] = P[x] * s.weight_for_margin(c[x] * s.vote_sum(x)) / wmax;
            EXPECT_LE(acc[x], P[x] * (1 + 1e-12));
            za += acc[x];
        }
        for (Index x = 0; x < n; ++x) {
            EXPECT_NEAR(Pt[x], static_cast<double>(ref[x]), 1e-12);
            EXPECT_NEAR(static_cast<double>(acc[x] / za), static_cast<double>(ref[x]), 1e-12);
        }
    }
}

TEST(WeakSqLearn, SingletonReturnsTarget) {
    const ConceptClass cls(std::vector<Concept>{C({1, -1, 1})});
    ExactOracle o(cls[0], Distribution::uniform(3));
    const WeakHypothesis h = weak_sq_learn(o, cls, 1);
    EXPECT_EQ(h.h, cls[0]);
}

TEST(WeakSqLearn, AntipodalPairMatchesTargetSign) {
    const Concept h = C({1, 1, -1});
    const ConceptClass cls(std::vector<Concept>{h, -h});
    for (Index t = 0; t < 2; ++t) {
        ExactOracle o(cls[t], Distribution::uniform(3));
        WeakLearnReport rep;
        EXPECT_EQ(weak_sq_learn(o, cls, 1, &rep).h, cls[t]);
        EXPECT_EQ(rep.correlation_queries, 2u);  // |<h, -h>| = 1 <= 1/d keeps both
    }
}

TEST(WeakSqLearn, ThresholdGuaranteeAgainstExactCorrelation) {
    const Generated g = generate("threshold:8");
    const std::size_t d = sq_dim_exact(g.cls, g.P).dim;
    for (Index t = 0; t < g.cls.size(); ++t) {
        ExactOracle o(g.cls[t], g.P);
        const WeakHypothesis h = weak_sq_learn(o, g.cls, d);
        EXPECT_GE(static_cast<double>(reference::correlation(h.h, g.cls[t], g.P)), 1.0 / (3.0 * d) - 1e-12);
    }
}

TEST(SimulateQuery, RoundZeroEqualsBaseAnswer) {
    const Generated g = generate("threshold:8");
    ExactOracle base(g.cls[3], g.P);
    const BoostState s(BoostParams::make(0.1, 0.2, 2.0, 3.0, 10));
    for (const auto& psi : g.cls)
        EXPECT_NEAR(sq_simulate_query(psi, s, g.P, base, 0.1, SimulationConfig{0.2, 4.0}),
                    static_cast<double>(reference::correlation(psi, g.cls[3], g.P)), 1e-12);
}

TEST(SimulateQuery, TwoRegionHandExample) {
    // Same state as HandComputedTwoRounds: P_t = (1/8, 3/8, 3/8, 1/8), so
    // <1, c>_{P_t} = 1/8 + 3/8 + 3/8 - 1/8 = 0.75.
    const BoostState s = state_with(BoostParams::make(0.1, 0.3, 2.0, 3.0, 4), {C({1, 1, -1, -1}), C({1, -1, 1, -1})});
    const Concept c = C({1, 1, 1, -1});
    ExactOracle base(c, Distribution::uniform(4));
    EXPECT_NEAR(sq_simulate_query(C({1, 1, 1, 1}), s, Distribution::uniform(4), base, 0.1, SimulationConfig{0.3, 4.0}),
                0.75, 1e-12);
}

TEST(SimulateQuery, ExactBaseMatchesReference) {
    Rng rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 3 + rng.below(20);
        const ConceptClass cls = make_random(8, n, 700 + trial);
        std::vector<double> pw(n);
        for (auto& v : pw) v = 0.05 + rng.uniform();
        const Distribution P = Distribution::from_weights(pw);
        const std::size_t T = 6 + rng.below(30);
        const double gamma = 0.02 + 0.1 * rng.uniform();
        BoostState s(BoostParams::make(gamma, 0.2, 2.0, 3.0, T));
        std::vector<Concept> hyps;
        for (std::size_t i = 0; i < rng.below(T); ++i) {
            hyps.push_back(cls[rng.below(cls.size())]);
            s.push(WeakHypothesis{hyps.back(), std::nullopt, false});
        }
        const Concept& c = cls[1];
        const reference::LogFactorial lf(T + 1);
        const auto Pt = reference::bbm_distribution(P, hyps, c, T, gamma, lf);
        long double z = 0.0L;
        for (auto v : Pt) z += v;
        if (z == 0.0L) continue;
        ExactOracle base(c, P);
        for (const auto& psi : cls) {
            long double truth = 0.0L;
            for (Index x = 0; x < n; ++x) truth += Pt[x] * psi[x] * c[x];
            EXPECT_NEAR(sq_simulate_query(psi, s, P, base, 0.05, SimulationConfig{0.2, 4.0}), static_cast<double>(truth),
                        1e-9);
        }
    }
}

TEST(SqBbm, SingletonClassOneRound) {
    const ConceptClass cls(std::vector<Concept>{C({1, -1, -1, 1})});
    ExactOracle base(cls[0], Distribution::uniform(4));
    const SQBoostResult r = sq_bbm_boost(base, cls, Distribution::uniform(4), 1, 0.1);
    EXPECT_EQ(r.rounds_used, 1u);
    EXPECT_EQ(r.majority.to_concept(4), cls[0]);
    EXPECT_TRUE(r.certified);
}

TEST(SqBbm, ThresholdSixteenReachesEpsilon) {
    const Generated g = generate("threshold:16");
    const std::size_t d = sq_dim_exact(g.cls, g.P).dim;
    for (Index t : {0u, 5u, 8u, 16u}) {
        ExactOracle base(g.cls[t], g.P);
        const SQBoostResult r = sq_bbm_boost(base, g.cls, g.P, d, 0.1);
        EXPECT_LE(loss(r.majority.to_concept(16), g.cls[t], g.P), 0.1);
        EXPECT_LE(r.rounds_used, r.params.T);
        EXPECT_GT(r.base_queries, 0u);
        EXPECT_DOUBLE_EQ(r.params.gamma, 1.0 / (24.0 * static_cast<double>(d)));
    }
}

TEST(SqBbm, SamplingOracleRun) {
    const Generated g = generate("threshold:16");
    SamplingOracle base(g.cls[6], g.P, 0.01, 4);
    const SQBoostResult r = sq_bbm_boost(base, g.cls, g.P, 2, 0.1);
    EXPECT_LE(loss(r.majority.to_concept(16), g.cls[6], g.P), 0.1);
    EXPECT_LT(r.min_tolerance, 0.1);
}

SampleWeakLearner fixed_weak(Concept h) {
    SampleWeakLearner wl;
    wl.sample_size = 1;
    wl.learn = [h](std::span<const LabeledExample>, WeakLearnReport*) { return WeakHypothesis{h, std::nullopt, false}; };
    return wl;
}

TEST(SampleBbm, PerfectHypothesisFirstRound) {
    const Generated g = generate("threshold:8");
    const BoostParams p = BoostParams::make(0.45, 0.1);
    ExampleStream st(g.P, g.cls[4], 1);
    const BoostResult r = bbm_boost(st, fixed_weak(g.cls[4]), p, 2);
    EXPECT_EQ(r.majority.to_concept(8), g.cls[4]);
    EXPECT_LE(p.T, 24u);
}

TEST(SampleBbm, AbortsWhenEverythingIsRejected) {
    // Always returning the target puts every margin at t; with T = 5 the
    // weight floor((T - 2t)/2) is negative from t = 3 on, so round 3 sees
    // only rejections. gamma is small so rounds 0..2 accept freely.
    const Generated g = generate("threshold:8");
    const BoostParams p = BoostParams::make(0.01, 0.5, 2.0, 3.0, 5);
    for (bool ff : {false, true}) {
        ExampleStream st(g.P, g.cls[2], 3);
        BoostOptions bo;
        bo.fast_forward_rejections = ff;
        const BoostResult r = bbm_boost(st, fixed_weak(g.cls[2]), p, 4, bo);
        EXPECT_TRUE(r.aborted);
        EXPECT_EQ(r.rounds_used, 3u);
        EXPECT_EQ(r.majority.to_concept(8), g.cls[2]);
        EXPECT_EQ(r.rounds.back().drawn, p.abort_window);
    }
}

TEST(SampleBbm, StreamExhaustionCarriesPartialResult) {
    const Generated g = generate("threshold:8");
    const BoostParams p = BoostParams::make(0.01, 0.5, 2.0, 3.0, 5);
    ExampleStream st(g.P, g.cls[2], 3, 20);
    try {
        bbm_boost(st, fixed_weak(g.cls[2]), p, 4);
        FAIL();
    } catch (const PartialResultError<BoostResult>& e) {
        EXPECT_EQ(e.kind(), ErrorKind::stream_exhausted);
        EXPECT_EQ(e.partial().samples_consumed, 20u);
        EXPECT_LE(e.partial().rounds_used, 3u);
    }
}

TEST(SampleBbm, ThresholdSixteenSucceeds) {
    const Generated g = generate("threshold:16");
    const SampleWeakLearner weak = make_sample_weak_learner(g.cls, 8);
    const BoostParams p = BoostParams::make(1.0 / 48.0, 0.1);
    std::size_t ok = 0;
    for (std::uint64_t s = 0; s < 6; ++s) {
        const Index t = static_cast<Index>(Rng(s).below(g.cls.size()));
        ExampleStream st(g.P, g.cls[t], 100 + s);
        BoostOptions bo;
        bo.class_size = g.cls.size();
        bo.fast_forward_rejections = true;
        const BoostResult r = bbm_boost(st, weak, p, 200 + s, bo);
        ok += loss(r.majority.to_concept(16), g.cls[t], g.P) <= 0.1 ? 1 : 0;
        EXPECT_GT(r.samples_consumed, 0u);
    }
    EXPECT_GE(3 * ok, 2u * 6u);
}

TEST(BoostParams, Derivations) {
    const BoostParams p = BoostParams::make(0.1, 0.1, 2.0, 3.0);
    EXPECT_EQ(p.T, 2u * static_cast<std::size_t>(std::ceil(std::log(10.0) / 0.01)));
    EXPECT_EQ(p.abort_window, static_cast<std::size_t>(std::ceil(3.0 * 1000.0 * std::log(p.T + 1.0))));
    EXPECT_THROW(BoostParams::make(0.0, 0.1), Error);
    EXPECT_THROW(BoostParams::make(0.1, 1.0), Error);
}

}  // namespace
}  // namespace bml
