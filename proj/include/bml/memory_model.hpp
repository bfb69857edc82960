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

// Bounded-memory streaming learners.
//
// A learner keeps a state of exactly b bits between examples. The update
// and output maps are code and are not counted. run_stream() enforces the
// bound by serializing the state after every step and loading the learner
// back from those b bits before the next example.

#pragma once

#include <bml/boosting.hpp>
#include <bml/core.hpp>
#include <bml/random.hpp>
#include <bml/stream.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace bml {

class StateBits {
public:
    std::size_t size() const noexcept { return size_; }

    void push(bool bit) {
        if (size_ % 64 == 0) words_.push_back(0);
        if (bit) words_.back() |= std::uint64_t{1} << (size_ % 64);
        ++size_;
    }

    bool operator[](std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }

    friend bool operator==(const StateBits&, const StateBits&) = default;

private:
    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

/// Appends fixed-width unsigned fields. Tracks the significant bits in use
/// so traces can report how much of the declared width was needed.
class BitWriter {
public:
    void put(std::uint64_t value, std::size_t width) {
        require(width <= 64, ErrorKind::state_width, "field wider than 64 bits");
        require(width == 64 || value < (std::uint64_t{1} << width), ErrorKind::state_width,
                "value " + std::to_string(value) + " does not fit in " + std::to_string(width) + " bits");
        for (std::size_t i = 0; i < width; ++i) bits_.push((value >> i) & 1u);
        significant_ += bits_for(value + 1);
    }

    void put_flag(bool b) { put(b ? 1 : 0, 1); }

    const StateBits& bits() const noexcept { return bits_; }
    std::size_t significant() const noexcept { return significant_; }

private:
    StateBits bits_;
    std::size_t significant_ = 0;
};

class BitReader {
public:
    explicit BitReader(const StateBits& bits) : bits_(bits) {}

    std::uint64_t get(std::size_t width) {
        require(pos_ + width <= bits_.size(), ErrorKind::state_width, "state truncated while decoding");
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < width; ++i)
            if (bits_[pos_ + i]) v |= std::uint64_t{1} << i;
        pos_ += width;
        return v;
    }

    bool get_flag() { return get(1) != 0; }
    std::size_t position() const noexcept { return pos_; }

private:
    const StateBits& bits_;
    std::size_t pos_ = 0;
};

class StreamingLearner {
public:
    virtual ~StreamingLearner() = default;

    virtual std::string name() const = 0;
    /// b: the exact width of the serialized state.
    virtual std::size_t state_width() const = 0;
    virtual std::size_t declared_samples() const = 0;
    virtual void reset() = 0;
    /// Z_{t+1} = psi_t(Z_t, example). Must be deterministic.
    virtual void update(const LabeledExample& e, std::size_t step) = 0;
    /// h = phi(Z).
    virtual Concept output() const = 0;
    virtual void encode(BitWriter& out) const = 0;
    virtual void decode(BitReader& in) = 0;
};

struct RoundTrip {
    StateBits bits;
    std::size_t significant = 0;
};

/// Serializes the state, loads the learner back from it and checks that
/// the reload reproduces the same b bits.
inline RoundTrip state_round_trip(StreamingLearner& learner) {
    BitWriter first;
    learner.encode(first);
    require(first.bits().size() == learner.state_width(), ErrorKind::state_width,
            learner.name() + " encoded " + std::to_string(first.bits().size()) + " bits, declared " +
                std::to_string(learner.state_width()));
    BitReader in(first.bits());
    learner.decode(in);
    require(in.position() == first.bits().size(), ErrorKind::state_width, learner.name() + " decode left bits unread");
    BitWriter second;
    learner.encode(second);
    require(second.bits() == first.bits(), ErrorKind::state_width, learner.name() + " state does not round-trip");
    return RoundTrip{first.bits(), first.significant()};
}

struct TraceEvent {
    std::size_t step = 0;
    Index point = 0;
    int label = 0;
    std::size_t significant_bits = 0;
};

struct RunTrace {
    std::string learner;
    std::uint64_t samples_consumed = 0;
    std::size_t bits_declared = 0;
    std::size_t bits_max_observed = 0;
    std::size_t round_trips = 0;
    double final_loss = 0.0;
    bool success = false;
    Concept output;
    std::vector<TraceEvent> events;

    nlohmann::json summary() const {
        return {{"learner", learner},
                {"samples_consumed", samples_consumed},
                {"bits_declared", bits_declared},
                {"bits_max_observed", bits_max_observed},
                {"round_trips", round_trips},
                {"final_loss", final_loss},
                {"success", success}};
    }
};

struct RunOptions {
    double success_loss = 0.0;     // success iff final_loss <= success_loss
    bool record_events = false;
    std::ostream* trace_sink = nullptr;  // JSON lines, one per step
};

/// Feeds m i.i.d. labeled examples through the learner with a b-bit
/// round trip before the first example and after every update.
inline RunTrace run_stream(StreamingLearner& learner, const Distribution& P, const Concept& target, std::uint64_t m,
                           std::uint64_t seed, const RunOptions& opts = {}) {
    detail::check_lengths(P.size(), target.size(), "run_stream");
    learner.reset();
    RunTrace trace;
    trace.learner = learner.name();
    trace.bits_declared = learner.state_width();

    auto checked_round_trip = [&](std::size_t step) {
        try {
            const RoundTrip rt = state_round_trip(learner);
            trace.bits_max_observed = std::max(trace.bits_max_observed, rt.significant);
            ++trace.round_trips;
            return rt.significant;
        } catch (const Error& e) {
            fail(ErrorKind::state_width, "step " + std::to_string(step) + ": " + e.what());
        }
    };

    checked_round_trip(0);
    ExampleStream stream(P, target, seed);
    for (std::uint64_t step = 0; step < m; ++step) {
        const LabeledExample e = stream.next();
        learner.update(e, step);
        const std::size_t sig = checked_round_trip(step + 1);
        if (opts.record_events) trace.events.push_back({step, e.point, e.label, sig});
        if (opts.trace_sink != nullptr) {
            nlohmann::json row{{"step", step}, {"point", e.point}, {"label", e.label}, {"significant_bits", sig}};
            *opts.trace_sink << row.dump() << '\n';
        }
    }
    trace.samples_consumed = stream.consumed();
    trace.output = learner.output();
    trace.final_loss = loss(trace.output, target, P);
    trace.success = trace.final_loss <= opts.success_loss;
    return trace;
}

// ---------------------------------------------------------------------------
// Built-in learners

/// Ignores its input. b = 0.
class FixedOutputLearner final : public StreamingLearner {
public:
    explicit FixedOutputLearner(Concept h, std::size_t m = 0) : h_(std::move(h)), m_(m) {}

    std::string name() const override { return "fixed"; }
    std::size_t state_width() const override { return 0; }
    std::size_t declared_samples() const override { return m_; }
    void reset() override {}
    void update(const LabeledExample&, std::size_t) override {}
    Concept output() const override { return h_; }
    void encode(BitWriter&) const override {}
    void decode(BitReader&) override {}

private:
    Concept h_;
    std::size_t m_;
};

/// Walks the class in order and moves to the next concept whenever the
/// current one errs on an example. The target never errs, so the index
/// never passes it. b = ceil(log2 |C|).
class EnumerationLearner final : public StreamingLearner {
public:
    EnumerationLearner(ConceptClass cls, std::size_t m) : cls_(std::move(cls)), m_(m) {}

    std::string name() const override { return "enumeration"; }
    std::size_t state_width() const override { return bits_for(cls_.size()); }
    std::size_t declared_samples() const override { return m_; }
    void reset() override { index_ = 0; }

    void update(const LabeledExample& e, std::size_t) override {
        if (cls_[index_][e.point] != e.label && index_ + 1 < cls_.size()) ++index_;
    }

    Concept output() const override { return cls_[index_]; }
    Index index() const noexcept { return index_; }
    void encode(BitWriter& out) const override { out.put(index_, state_width()); }
    void decode(BitReader& in) override { index_ = static_cast<Index>(in.get(state_width())); }

private:
    ConceptClass cls_;
    std::size_t m_;
    Index index_ = 0;
};

/// ERM for the threshold class make_threshold(N): keeps the index of the
/// smallest threshold consistent with every positive example seen, which
/// is then consistent with every negative one too. b = ceil(log2(N + 1)).
class ThresholdLearner final : public StreamingLearner {
public:
    ThresholdLearner(std::size_t points, std::size_t m) : points_(points), m_(m) {}

    std::string name() const override { return "threshold_erm"; }
    std::size_t state_width() const override { return bits_for(points_ + 1); }
    std::size_t declared_samples() const override { return m_; }
    void reset() override { lo_ = 0; }

    void update(const LabeledExample& e, std::size_t) override {
        if (e.label == 1) lo_ = std::max<std::size_t>(lo_, points_ - e.point);
    }

    Concept output() const override {
        std::vector<std::int8_t> labels(points_);
        for (std::size_t x = 0; x < points_; ++x) labels[x] = x + lo_ >= points_ ? 1 : -1;
        return Concept(std::move(labels));
    }

    void encode(BitWriter& out) const override { out.put(lo_, state_width()); }
    void decode(BitReader& in) override { lo_ = static_cast<std::size_t>(in.get(state_width())); }

private:
    std::size_t points_;
    std::size_t m_;
    std::size_t lo_ = 0;
};

/// Sample-based BBM as an explicit b-bit state machine.
///
/// State: round counter, acceptance counter, consecutive-rejection counter,
/// abort flag, T hypothesis references (2 * class index + negation bit)
/// and the weak learner's m0-example buffer. Coins for rejection sampling
/// are a fixed function of (seed, step), so updates are deterministic.
class BbmStreamingLearner final : public StreamingLearner {
public:
    BbmStreamingLearner(ConceptClass cls, BoostParams params, std::size_t weak_dim, std::uint64_t coin_seed,
                        std::size_t m)
        : cls_(std::move(cls)),
          params_(params),
          weak_(make_sample_weak_learner(cls_, weak_dim)),
          coin_seed_(coin_seed),
          m_(m) {
        reset();
    }

    std::string name() const override { return "bbm"; }

    std::size_t ref_width() const { return bits_for(2 * cls_.size()); }
    std::size_t counter_width() const {
        return bits_for(params_.T + 1) + bits_for(weak_.sample_size + 1) + bits_for(params_.abort_window + 1) + 1;
    }
    std::size_t buffer_width() const { return weak_.sample_size * (bits_for(cls_.domain_size()) + 1); }

    std::size_t state_width() const override { return params_.T * ref_width() + counter_width() + buffer_width(); }
    std::size_t declared_samples() const override { return m_; }
    std::size_t weak_sample_size() const noexcept { return weak_.sample_size; }

    void reset() override {
        round_ = 0;
        accepted_ = 0;
        rejects_ = 0;
        aborted_ = false;
        refs_.assign(params_.T, 0);
        buffer_.assign(weak_.sample_size, LabeledExample{0, -1});
    }

    void update(const LabeledExample& e, std::size_t step) override {
        if (aborted_ || round_ >= params_.T) return;
        const auto T = static_cast<std::int64_t>(params_.T);
        const auto t = static_cast<std::int64_t>(round_);
        const double wmax = bbm_weight_max(T, t, params_.gamma);
        if (wmax <= 0.0) {
            aborted_ = true;
            return;
        }
        const std::int64_t margin = e.label * vote_sum(e.point);
        const double accept = bbm_weight(T, t, margin, params_.gamma) / wmax;
        Rng coin(mix_seed(coin_seed_, step));
        if (coin.uniform() < accept) {
            buffer_[accepted_++] = e;
            rejects_ = 0;
        } else if (++rejects_ >= params_.abort_window) {
            aborted_ = true;
            return;
        }
        if (accepted_ == weak_.sample_size) {
            const WeakHypothesis h = weak_.learn(buffer_, nullptr);
            refs_[round_++] = 2 * *h.class_index + (h.negated ? 1 : 0);
            accepted_ = 0;
        }
    }

    Concept output() const override {
        MajorityHypothesis maj;
        for (std::size_t i = 0; i < round_; ++i) maj.add(hypothesis(i));
        return maj.to_concept(cls_.domain_size());
    }

    void encode(BitWriter& out) const override {
        out.put(round_, bits_for(params_.T + 1));
        out.put(accepted_, bits_for(weak_.sample_size + 1));
        out.put(rejects_, bits_for(params_.abort_window + 1));
        out.put_flag(aborted_);
        for (auto r : refs_) out.put(r, ref_width());
        const std::size_t pw = bits_for(cls_.domain_size());
        for (const auto& e : buffer_) {
            out.put(e.point, pw);
            out.put_flag(e.label == 1);
        }
    }

    void decode(BitReader& in) override {
        round_ = static_cast<std::size_t>(in.get(bits_for(params_.T + 1)));
        accepted_ = static_cast<std::size_t>(in.get(bits_for(weak_.sample_size + 1)));
        rejects_ = static_cast<std::size_t>(in.get(bits_for(params_.abort_window + 1)));
        aborted_ = in.get_flag();
        for (auto& r : refs_) r = in.get(ref_width());
        const std::size_t pw = bits_for(cls_.domain_size());
        for (auto& e : buffer_) {
            e.point = static_cast<Index>(in.get(pw));
            e.label = in.get_flag() ? 1 : -1;
        }
    }

    std::size_t rounds() const noexcept { return round_; }
    bool aborted() const noexcept { return aborted_; }

private:
    Concept hypothesis(std::size_t i) const {
        const Index idx = static_cast<Index>(refs_[i] / 2);
        return refs_[i] % 2 == 1 ? -cls_[idx] : cls_[idx];
    }

    int vote_sum(Index x) const {
        int s = 0;
        for (std::size_t i = 0; i < round_; ++i) {
            const Index idx = static_cast<Index>(refs_[i] / 2);
            s += refs_[i] % 2 == 1 ? -cls_[idx][x] : cls_[idx][x];
        }
        return s;
    }

    ConceptClass cls_;
    BoostParams params_;
    SampleWeakLearner weak_;
    std::uint64_t coin_seed_;
    std::size_t m_;

    std::size_t round_ = 0;
    std::size_t accepted_ = 0;
    std::size_t rejects_ = 0;
    bool aborted_ = false;
    std::vector<std::uint64_t> refs_;
    std::vector<LabeledExample> buffer_;
};

// ---------------------------------------------------------------------------
// Triviality verdict

/// Explicit constants for the two baseline learners' bills (logs base 2).
struct BaselineConstants {
    double erm_samples = 1.0;     // m1 = c * log|C| / eps
    double erm_bits = 1.0;        // b1 = c * log|C| * (log|X| + log(1/eps))
    double enum_samples = 1.0;    // m2 = c * |C| log|C| / eps
    double enum_bits = 1.0;       // b2 = c * log|C|
};

struct TrivialityVerdict {
    double erm_m = 0.0;
    double erm_b = 0.0;
    double enum_m = 0.0;
    double enum_b = 0.0;
    double m_bound = 0.0;  // samples must stay below this (enumeration bill / slack)
    double b_bound = 0.0;  // bits must stay below this (ERM bill / slack)
    bool nontrivial = false;
    double slack = 1.0;

    nlohmann::json to_json() const {
        return {{"erm_m", erm_m},     {"erm_b", erm_b},     {"enum_m", enum_m},         {"enum_b", enum_b},
                {"m_bound", m_bound}, {"b_bound", b_bound}, {"nontrivial", nontrivial}, {"slack", slack},
                {"advisory", true}};
    }
};

/// Advisory comparison against the ERM and enumeration baselines: a run is
/// reported nontrivial when it uses fewer samples than enumeration and
/// fewer bits than ERM, each by the given slack factor.
inline TrivialityVerdict triviality_check(double m, double b, std::size_t class_size, std::size_t domain_size,
                                          double epsilon, double slack = 1.0, BaselineConstants k = {}) {
    require(class_size >= 1 && domain_size >= 1, ErrorKind::parameter, "sizes must be positive");
    require(epsilon > 0.0 && epsilon < 1.0, ErrorKind::parameter, "epsilon must lie in (0,1)");
    require(slack >= 1.0, ErrorKind::parameter, "slack must be >= 1");
    const double log_c = std::max(1.0, std::log2(static_cast<double>(class_size)));
    const double log_x = std::max(1.0, std::log2(static_cast<double>(domain_size)));
    const double log_e = std::log2(1.0 / epsilon);
    TrivialityVerdict v;
    v.slack = slack;
    v.erm_m = k.erm_samples * log_c / epsilon;
    v.erm_b = k.erm_bits * log_c * (log_x + log_e);
    v.enum_m = k.enum_samples * static_cast<double>(class_size) * log_c / epsilon;
    v.enum_b = k.enum_bits * log_c;
    v.m_bound = v.enum_m / slack;
    v.b_bound = v.erm_b / slack;
    v.nontrivial = m < v.m_bound && b < v.b_bound;
    return v;
}

}  // namespace bml
