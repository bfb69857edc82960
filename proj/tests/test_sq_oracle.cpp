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
#include <bml/sq_oracle.hpp>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

namespace bml {
namespace {

Concept C(std::initializer_list<int> v) {
    std::vector<std::int8_t> out;
    for (int x : v) out.push_back(static_cast<std::int8_t>(x));
    return Concept(std::move(out));
}

TEST(ExactOracle, AnswersTruthAndCounts) {
    const Concept c = C({1, 1, -1, -1});
    const Distribution P({0.4, 0.1, 0.1, 0.4});
    ExactOracle o(c, P);
    EXPECT_DOUBLE_EQ(o.answer(SQQuery(c, 0.5)), 1.0);
    // 0.4*1 + 0.1*(-1) + 0.1*(-1) + 0.4*1 by hand.
    EXPECT_NEAR(o.answer(SQQuery(C({1, -1, 1, -1}), 0.1)), 0.6, 1e-15);
    EXPECT_EQ(o.account().query_count, 2u);
    EXPECT_DOUBLE_EQ(o.account().min_tolerance_used, 0.1);
}

TEST(ExactOracle, OrthogonalPairUnderUniform) {
    const Generated g = generate("parity:2");
    ExactOracle o(g.cls[1], g.P);
    EXPECT_DOUBLE_EQ(o.answer(SQQuery(g.cls[2], 0.25)), 0.0);
}

TEST(SQQuery, ToleranceRange) {
    EXPECT_THROW(SQQuery(C({1}), 0.0), Error);
    EXPECT_THROW(SQQuery(C({1}), 1.5), Error);
    EXPECT_NO_THROW(SQQuery(C({1}), 1.0));
}

TEST(SamplingOracle, HoeffdingSampleCount) {
    // ceil(ln(2 / 0.1) / (2 * 0.1^2)) = ceil(149.79) = 150.
    EXPECT_EQ(SamplingOracle::samples_for(0.1, 0.1), 150u);
    const Generated g = generate("parity:2");
    SamplingOracle o(g.cls[0], g.P, 0.1, 3);
    o.answer(SQQuery(g.cls[1], 0.1));
    EXPECT_EQ(o.account().sample_budget_spent, 150u);
}

TEST(SamplingOracle, SelfQueryIsExactlyOne) {
    const Generated g = generate("threshold:8");
    SamplingOracle o(g.cls[3], g.P, 0.05, 9);
    EXPECT_EQ(o.answer(SQQuery(g.cls[3], 0.05)), 1.0);
}

TEST(SamplingOracle, CoarseToleranceUsesOneDraw) {
    const Generated g = generate("threshold:8");
    EXPECT_EQ(SamplingOracle::samples_for(1.0, 0.5), 1u);
    SamplingOracle o(g.cls[2], g.P, 0.5, 1);
    for (Index i = 0; i < g.cls.size(); ++i) EXPECT_EQ(std::abs(o.answer(SQQuery(g.cls[i], 1.0))), 1.0);
    EXPECT_EQ(o.account().sample_budget_spent, g.cls.size());
}

TEST(SamplingOracle, DeterministicPerSeed) {
    const Generated g = generate("threshold:16");
    SamplingOracle a(g.cls[5], g.P, 0.1, 42);
    SamplingOracle b(g.cls[5], g.P, 0.1, 42);
    for (Index i = 0; i < g.cls.size(); ++i) EXPECT_EQ(a.answer(SQQuery(g.cls[i], 0.05)), b.answer(SQQuery(g.cls[i], 0.05)));
}

TEST(SamplingOracle, FailureRateWithinBudget) {
    // fail_prob 0.2 per query: across many queries the miss rate stays near
    // or below 0.2 (Hoeffding is conservative).
    const Generated g = generate("threshold:16");
    SamplingOracle o(g.cls[7], g.P, 0.2, 77);
    std::size_t miss = 0;
    const std::size_t total = 400;
    for (std::size_t k = 0; k < total; ++k) {
        const Concept& h = g.cls[k % g.cls.size()];
        const double truth = static_cast<double>(reference::correlation(h, g.cls[7], g.P));
        miss += std::abs(o.answer(SQQuery(h, 0.1)) - truth) > 0.1 ? 1 : 0;
    }
    EXPECT_LE(miss, total / 5);
}

TEST(SamplingOracle, BinomialShortcutStaysWithinTolerance) {
    const Generated g = generate("threshold:16");
    SamplingOracle o(g.cls[4], g.P, 1e-3, 5);
    const double tau = 2e-4;  // far above the direct-draw limit
    ASSERT_GT(SamplingOracle::samples_for(tau, 1e-3), SamplingOracle::kDirectDrawLimit);
    for (Index i = 0; i < g.cls.size(); ++i) {
        const double truth = static_cast<double>(reference::correlation(g.cls[i], g.cls[4], g.P));
        EXPECT_LE(std::abs(o.answer(SQQuery(g.cls[i], tau)) - truth), tau);
    }
}

TEST(Adversary, SingletonAnswersTruth) {
    const ConceptClass cls(std::vector<Concept>{C({1, -1, 1})});
    const Distribution P({0.2, 0.3, 0.5});
    AdversarialOracle adv(cls, P);
    const double nu = adv.answer(SQQuery(C({1, 1, 1}), 0.1));
    EXPECT_NEAR(nu, 0.2 - 0.3 + 0.5, 1e-15);
    EXPECT_EQ(adv.history().back().eliminated, 0u);
}

TEST(Adversary, ParityEliminatesOnlyTheQueriedCharacter) {
    const Generated g = generate("parity:2");
    AdversarialOracle adv(g.cls, g.P);
    EXPECT_EQ(adv.answer(SQQuery(g.cls[1], 0.25)), 0.0);
    EXPECT_EQ(adv.history().back().survivors, 3u);
    EXPECT_EQ(adv.history().back().eliminated, 1u);
    const auto& alive = adv.version_space().alive;
    EXPECT_EQ(std::count(alive.begin(), alive.end(), Index{1}), 0);
}

TEST(Adversary, FullToleranceEliminatesNothing) {
    const Generated g = generate("parity:2");
    AdversarialOracle adv(g.cls, g.P);
    EXPECT_EQ(adv.answer(SQQuery(g.cls[0], 1.0)), 0.0);
    EXPECT_EQ(adv.history().back().eliminated, 0u);
}

TEST(Adversary, VersionSpaceShrinksMonotonically) {
    const ConceptClass cls = make_random(10, 6, 8);
    const Distribution P = Distribution::uniform(6);
    AdversarialOracle adv(cls, P);
    std::size_t prev = cls.size();
    for (int k = 0; k < 30 && !adv.version_space().empty(); ++k) {
        const Concept& h = cls[static_cast<Index>(k) % cls.size()];
        const double nu = adv.answer(SQQuery(h, 0.2));
        const std::size_t now = adv.version_space().size();
        EXPECT_LE(now, prev);
        prev = now;
        // Every survivor is consistent with the answer.
        for (Index i : adv.version_space().alive)
            EXPECT_LE(std::abs(static_cast<double>(reference::correlation(h, cls[i], P)) - nu), 0.2 + 1e-12);
    }
    EXPECT_GE(adv.version_space().size(), 1u);
}

TEST(Adversary, EmptyVersionSpaceIsProtocolError) {
    const Generated g = generate("parity:1");
    VersionSpace vs;
    try {
        adversarial_answer(SQQuery(g.cls[0], 0.5), vs, g.cls, g.P);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::protocol);
    }
}

TEST(OracleTrace, EmitsJsonLines) {
    const Generated g = generate("parity:2");
    std::ostringstream log;
    AdversarialOracle adv(g.cls, g.P);
    adv.set_trace(&log);
    adv.answer(SQQuery(g.cls[2], 0.25, 2));
    adv.answer(SQQuery(g.cls[3], 0.25));
    std::istringstream in(log.str());
    std::string line;
    std::getline(in, line);
    auto row = nlohmann::json::parse(line);
    EXPECT_EQ(row.at("query_index"), 0);
    EXPECT_EQ(row.at("hypothesis_id"), 2);
    EXPECT_EQ(row.at("eliminated_count"), 1);
    std::getline(in, line);
    row = nlohmann::json::parse(line);
    EXPECT_EQ(row.at("labels").size(), 4u);
    EXPECT_DOUBLE_EQ(row.at("tolerance").get<double>(), 0.25);
}

}  // namespace
}  // namespace bml
