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

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

namespace bml {
namespace {

TEST(Bits, WriterReaderRoundTrip) {
    BitWriter w;
    w.put(5, 3);
    w.put_flag(true);
    w.put(0, 4);
    w.put(1023, 10);
    EXPECT_EQ(w.bits().size(), 18u);
    EXPECT_EQ(w.significant(), 3u + 1u + 0u + 10u);
    BitReader r(w.bits());
    EXPECT_EQ(r.get(3), 5u);
    EXPECT_TRUE(r.get_flag());
    EXPECT_EQ(r.get(4), 0u);
    EXPECT_EQ(r.get(10), 1023u);
    EXPECT_THROW(r.get(1), Error);
}

TEST(Bits, OverflowIsStateWidthError) {
    BitWriter w;
    try {
        w.put(8, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::state_width);
    }
}

/// Declares 2 bits but counts past 3.
class LeakyCounter final : public StreamingLearner {
public:
    std::string name() const override { return "leaky"; }
    std::size_t state_width() const override { return 2; }
    std::size_t declared_samples() const override { return 10; }
    void reset() override { n_ = 0; }
    void update(const LabeledExample&, std::size_t) override { ++n_; }
    Concept output() const override { return Concept::constant(4, 1); }
    void encode(BitWriter& out) const override { out.put(n_, 2); }
    void decode(BitReader& in) override { n_ = in.get(2); }

private:
    std::uint64_t n_ = 0;
};

/// Decodes to a different state than it encoded.
class ForgetfulLearner final : public StreamingLearner {
public:
    std::string name() const override { return "forgetful"; }
    std::size_t state_width() const override { return 1; }
    std::size_t declared_samples() const override { return 10; }
    void reset() override { last_ = 0; }
    void update(const LabeledExample& e, std::size_t) override { last_ = e.point; }
    Concept output() const override { return Concept::constant(4, 1); }
    void encode(BitWriter& out) const override { out.put(last_ % 2, 1); }
    void decode(BitReader& in) override {
        in.get(1);
        last_ = 0;
    }

private:
    std::uint64_t last_ = 0;
};

TEST(RunStream, OverflowNamesTheStep) {
    LeakyCounter l;
    try {
        run_stream(l, Distribution::uniform(4), Concept::constant(4, 1), 10, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::state_width);
        EXPECT_NE(std::string(e.what()).find("step 4"), std::string::npos) << e.what();
    }
}

TEST(RunStream, UnfaithfulEncodingIsCaught) {
    ForgetfulLearner l;
    EXPECT_THROW(run_stream(l, Distribution::uniform(4), Concept::constant(4, 1), 10, 2), Error);
}

TEST(RunStream, FixedOutputLoss) {
    const Generated g = generate("threshold:8");
    FixedOutputLearner fixed(g.cls[2], 50);
    const RunTrace tr = run_stream(fixed, g.P, g.cls[6], 50, 3);
    EXPECT_DOUBLE_EQ(tr.final_loss, 4.0 / 8.0);
    EXPECT_EQ(tr.bits_declared, 0u);
    EXPECT_EQ(tr.samples_consumed, 50u);
}

TEST(RunStream, EnumerationReachesZeroLoss) {
    const Generated g = generate("threshold:16");
    EnumerationLearner en(g.cls, 3000);
    const RunTrace tr = run_stream(en, g.P, g.cls[11], 3000, 4);
    EXPECT_EQ(tr.final_loss, 0.0);
    EXPECT_TRUE(tr.success);
    EXPECT_EQ(tr.bits_declared, static_cast<std::size_t>(std::ceil(std::log2(17.0))));
    EXPECT_LE(tr.bits_max_observed, tr.bits_declared);
    EXPECT_EQ(tr.round_trips, 3001u);
}

TEST(RunStream, ZeroSamplesOutputsInitialState) {
    const Generated g = generate("threshold:16");
    EnumerationLearner en(g.cls, 0);
    const RunTrace tr = run_stream(en, g.P, g.cls[11], 0, 4);
    EXPECT_EQ(tr.output, g.cls[0]);
    EXPECT_EQ(tr.round_trips, 1u);
}

TEST(RunStream, ThresholdLearnerIsConsistent) {
    const Generated g = generate("threshold:32");
    for (Index t : {0u, 7u, 32u}) {
        ThresholdLearner th(32, 4000);
        const RunTrace tr = run_stream(th, g.P, g.cls[t], 4000, 10 + t);
        EXPECT_EQ(tr.final_loss, 0.0);
        EXPECT_EQ(tr.bits_declared, 6u);
    }
}

TEST(RunStream, Reproducible) {
    const Generated g = generate("parity:3");
    EnumerationLearner a(g.cls, 200);
    EnumerationLearner b(g.cls, 200);
    RunOptions o;
    o.record_events = true;
    const RunTrace ta = run_stream(a, g.P, g.cls[5], 200, 9, o);
    const RunTrace tb = run_stream(b, g.P, g.cls[5], 200, 9, o);
    ASSERT_EQ(ta.events.size(), tb.events.size());
    for (std::size_t i = 0; i < ta.events.size(); ++i) {
        EXPECT_EQ(ta.events[i].point, tb.events[i].point);
        EXPECT_EQ(ta.events[i].significant_bits, tb.events[i].significant_bits);
    }
    EXPECT_EQ(ta.summary(), tb.summary());
}

TEST(RunStream, TraceSinkWritesJsonLines) {
    const Generated g = generate("threshold:4");
    EnumerationLearner en(g.cls, 5);
    std::ostringstream sink;
    RunOptions o;
    o.trace_sink = &sink;
    run_stream(en, g.P, g.cls[1], 5, 1, o);
    std::istringstream in(sink.str());
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line); ++lines) {
        const auto row = nlohmann::json::parse(line);
        EXPECT_EQ(row.at("step"), lines);
        EXPECT_TRUE(row.contains("significant_bits"));
    }
    EXPECT_EQ(lines, 5u);
}

TEST(BbmStreaming, DeclaredWidthHoldsAndLearns) {
    const Generated g = generate("threshold:8");
    const BoostParams params = BoostParams::make(0.25, 0.2, 2.0, 3.0);
    BbmStreamingLearner bbm(g.cls, params, 2, 17, 6000);
    EXPECT_EQ(bbm.state_width(), params.T * bbm.ref_width() + bbm.counter_width() + bbm.buffer_width());
    const RunTrace tr = run_stream(bbm, g.P, g.cls[3], 6000, 5, RunOptions{0.2, false, nullptr});
    EXPECT_LE(tr.bits_max_observed, tr.bits_declared);
    EXPECT_EQ(tr.round_trips, 6001u);
    EXPECT_GE(bbm.rounds(), 1u);
    EXPECT_TRUE(tr.success) << tr.final_loss;
}

TEST(Triviality, BaselinesAreNotNontrivial) {
    const std::size_t C = 64, X = 64;
    const double eps = 0.05;
    const double lc = std::log2(64.0);
    const TrivialityVerdict erm = triviality_check(lc / eps, lc * (std::log2(64.0) + std::log2(1 / eps)), C, X, eps);
    EXPECT_FALSE(erm.nontrivial);
    const TrivialityVerdict en = triviality_check(64.0 * lc / eps, lc, C, X, eps);
    EXPECT_FALSE(en.nontrivial);
    const TrivialityVerdict mid = triviality_check(lc / eps, lc, C, X, eps);
    EXPECT_TRUE(mid.nontrivial);
    EXPECT_TRUE(mid.to_json().at("advisory").get<bool>());
    EXPECT_FALSE(triviality_check(lc / eps, lc, C, X, eps, 20.0).nontrivial);
    EXPECT_THROW(triviality_check(1, 1, 0, 1, 0.1), Error);
}

}  // namespace
}  // namespace bml
