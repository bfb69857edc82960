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

// Statistical-query oracles with query accounting.
//
// Every oracle answers correlation queries <h, c>_D for a hidden target c.
// Label-free expectations E_D[f] are part of the same interface: for a
// known distribution they are computed exactly and cost no query; oracles
// over a derived distribution (see boosting.hpp) have to simulate them.

#pragma once

#include <bml/core.hpp>
#include <bml/random.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

namespace bml {

struct SQQuery {
    Concept hypothesis;
    double tolerance = 1.0;
    std::optional<Index> hypothesis_id;  // class index, when the query is a class member

    SQQuery(Concept h, double tau, std::optional<Index> id = std::nullopt)
        : hypothesis(std::move(h)), tolerance(tau), hypothesis_id(id) {
        require(tau > 0.0 && tau <= 1.0, ErrorKind::parameter, "query tolerance must lie in (0,1]");
    }
};

struct OracleAccount {
    std::uint64_t query_count = 0;
    double min_tolerance_used = std::numeric_limits<double>::infinity();
    std::uint64_t sample_budget_spent = 0;

    void record(double tolerance) {
        ++query_count;
        min_tolerance_used = std::min(min_tolerance_used, tolerance);
    }
};

class CorrelationOracle {
public:
    virtual ~CorrelationOracle() = default;

    /// An answer within q.tolerance of <q.hypothesis, c>_D.
    virtual double answer(const SQQuery& q) = 0;

    /// An answer within `tolerance` of E_D[f]; label-free.
    virtual double expectation(const Concept& f, double tolerance) = 0;

    virtual std::size_t domain_size() const = 0;

    const OracleAccount& account() const noexcept { return account_; }

    /// Emits one JSON object per answered correlation query.
    void set_trace(std::ostream* sink) noexcept { trace_ = sink; }

protected:
    void log_query(const SQQuery& q, double nu, std::size_t eliminated = 0) {
        if (trace_ == nullptr) return;
        nlohmann::json row;
        row["query_index"] = account_.query_count - 1;
        if (q.hypothesis_id)
            row["hypothesis_id"] = *q.hypothesis_id;
        else
            row["labels"] = std::vector<int>(q.hypothesis.labels().begin(), q.hypothesis.labels().end());
        row["tolerance"] = q.tolerance;
        row["answer"] = nu;
        row["eliminated_count"] = eliminated;
        *trace_ << row.dump() << '\n';
    }

    OracleAccount account_;
    std::ostream* trace_ = nullptr;
};

/// Answers with the true correlation: the tightest legal answer.
class ExactOracle final : public CorrelationOracle {
public:
    ExactOracle(Concept target, Distribution P) : target_(std::move(target)), P_(std::move(P)) {
        detail::check_lengths(target_.size(), P_.size(), "ExactOracle");
    }

    double answer(const SQQuery& q) override {
        const double nu = correlation(q.hypothesis, target_, P_);
        account_.record(q.tolerance);
        log_query(q, nu);
        return nu;
    }

    double expectation(const Concept& f, double) override { return bml::expectation(f, P_); }

    std::size_t domain_size() const override { return P_.size(); }

private:
    Concept target_;
    Distribution P_;
};

/// Honest simulation from i.i.d. samples: the empirical mean of h(x)c(x)
/// over N = ceil(ln(2/fail_prob) / (2 tau^2)) draws, which is within tau of
/// the truth with probability >= 1 - fail_prob.
class SamplingOracle final : public CorrelationOracle {
public:
    /// Above this many draws the empirical mean is drawn from its exact
    /// law, (2B - N)/N with B ~ Binomial(N, Pr[h = c]).
    static constexpr std::uint64_t kDirectDrawLimit = 1u << 22;

    SamplingOracle(Concept target, Distribution P, double fail_prob, std::uint64_t seed)
        : target_(std::move(target)), P_(std::move(P)), fail_prob_(fail_prob), rng_(seed), sampler_(P_) {
        require(fail_prob > 0.0 && fail_prob < 1.0, ErrorKind::parameter, "fail_prob must lie in (0,1)");
        detail::check_lengths(target_.size(), P_.size(), "SamplingOracle");
    }

    static std::uint64_t samples_for(double tau, double fail_prob) {
        require(tau > 0.0, ErrorKind::parameter, "tolerance must be positive");
        require(fail_prob > 0.0 && fail_prob < 1.0, ErrorKind::parameter, "fail_prob must lie in (0,1)");
        const double n = std::ceil(std::log(2.0 / fail_prob) / (2.0 * tau * tau));
        require(n < 1.8e19, ErrorKind::capacity, "sample count overflows 64 bits");
        return static_cast<std::uint64_t>(n);
    }

    double answer(const SQQuery& q) override {
        detail::check_lengths(q.hypothesis.size(), P_.size(), "SamplingOracle::answer");
        const std::uint64_t n = samples_for(q.tolerance, fail_prob_);
        double nu = 0.0;
        if (n <= kDirectDrawLimit) {
            std::int64_t sum = 0;
            for (std::uint64_t i = 0; i < n; ++i) {
                const Index x = sampler_(rng_);
                sum += q.hypothesis[x] * target_[x];
            }
            nu = static_cast<double>(sum) / static_cast<double>(n);
        } else {
            const double agree = (1.0 + correlation(q.hypothesis, target_, P_)) / 2.0;
            const std::uint64_t b = rng_.binomial(n, std::clamp(agree, 0.0, 1.0));
            nu = (2.0 * static_cast<double>(b) - static_cast<double>(n)) / static_cast<double>(n);
        }
        account_.record(q.tolerance);
        account_.sample_budget_spent += n;
        log_query(q, nu);
        return nu;
    }

    double expectation(const Concept& f, double) override { return bml::expectation(f, P_); }

    std::size_t domain_size() const override { return P_.size(); }

private:
    Concept target_;
    Distribution P_;
    double fail_prob_;
    Rng rng_;
    PointSampler sampler_;
};

struct VersionSpace {
    std::vector<Index> alive;

    static VersionSpace full(std::size_t n) {
        VersionSpace vs;
        vs.alive.resize(n);
        std::iota(vs.alive.begin(), vs.alive.end(), Index{0});
        return vs;
    }

    bool empty() const noexcept { return alive.empty(); }
    std::size_t size() const noexcept { return alive.size(); }
};

struct AdversarialStep {
    double answer = 0.0;
    std::size_t survivors = 0;
    std::size_t eliminated = 0;
};

/// Picks the answer consistent with as many alive concepts as possible and
/// removes every concept it rules out. Among maximizing answers it prefers
/// one equal to an alive concept's true correlation, then the smallest |nu|.
inline AdversarialStep adversarial_answer(const SQQuery& q, VersionSpace& vs, const ConceptClass& cls,
                                          const Distribution& P) {
    require(!vs.empty(), ErrorKind::protocol, "adversary queried with an empty version space");
    const double tau = q.tolerance;

    std::vector<double> corr;
    corr.reserve(vs.size());
    for (Index i : vs.alive) corr.push_back(correlation(q.hypothesis, cls[i], P));

    auto consistent = [tau](double truth, double nu) { return std::abs(truth - nu) <= tau + kCompareSlack; };
    auto count_at = [&](double nu) {
        std::size_t n = 0;
        for (double c : corr) n += consistent(c, nu) ? 1 : 0;
        return n;
    };

    struct Candidate {
        double nu;
        bool is_truth;
    };
    std::vector<Candidate> candidates{{0.0, false}};
    for (double c : corr) {
        candidates.push_back({c, true});
        candidates.push_back({c - tau, false});
        candidates.push_back({c + tau, false});
    }

    std::size_t best_count = 0;
    std::optional<Candidate> best;
    auto better = [](const Candidate& a, const Candidate& b) {
        if (a.is_truth != b.is_truth) return a.is_truth;
        if (std::abs(a.nu) != std::abs(b.nu)) return std::abs(a.nu) < std::abs(b.nu);
        return a.nu > b.nu;
    };
    for (const auto& cand : candidates) {
        const std::size_t n = count_at(cand.nu);
        if (n > best_count || (n == best_count && best && better(cand, *best))) {
            best_count = n;
            best = cand;
        }
    }

    AdversarialStep step;
    step.answer = best->nu;
    std::vector<Index> kept;
    kept.reserve(vs.size());
    for (std::size_t k = 0; k < vs.size(); ++k)
        if (consistent(corr[k], step.answer)) kept.push_back(vs.alive[k]);
    step.eliminated = vs.size() - kept.size();
    step.survivors = kept.size();
    vs.alive = std::move(kept);
    return step;
}

/// Session wrapper around adversarial_answer with accounting.
class AdversarialOracle final : public CorrelationOracle {
public:
    AdversarialOracle(ConceptClass cls, Distribution P)
        : cls_(std::move(cls)), P_(std::move(P)), vs_(VersionSpace::full(cls_.size())) {
        detail::check_lengths(cls_.domain_size(), P_.size(), "AdversarialOracle");
    }

    double answer(const SQQuery& q) override {
        const AdversarialStep step = adversarial_answer(q, vs_, cls_, P_);
        account_.record(q.tolerance);
        history_.push_back(step);
        log_query(q, step.answer, step.eliminated);
        return step.answer;
    }

    double expectation(const Concept& f, double) override { return bml::expectation(f, P_); }

    std::size_t domain_size() const override { return P_.size(); }

    const VersionSpace& version_space() const noexcept { return vs_; }
    const std::vector<AdversarialStep>& history() const noexcept { return history_; }

private:
    ConceptClass cls_;
    Distribution P_;
    VersionSpace vs_;
    std::vector<AdversarialStep> history_;
};

/// Correlations and expectations computed from a fixed labeled sample.
/// Used by sample-based weak learners; every call counts as a query.
class EmpiricalOracle final : public CorrelationOracle {
public:
    EmpiricalOracle(std::vector<LabeledExample> sample, std::size_t domain_size)
        : sample_(std::move(sample)), n_(domain_size) {
        require(!sample_.empty(), ErrorKind::parameter, "empirical oracle needs a non-empty sample");
    }

    double answer(const SQQuery& q) override {
        detail::check_lengths(q.hypothesis.size(), n_, "EmpiricalOracle::answer");
        std::int64_t sum = 0;
        for (const auto& e : sample_) sum += q.hypothesis[e.point] * e.label;
        const double nu = static_cast<double>(sum) / static_cast<double>(sample_.size());
        account_.record(q.tolerance);
        log_query(q, nu);
        return nu;
    }

    double expectation(const Concept& f, double) override {
        std::int64_t sum = 0;
        for (const auto& e : sample_) sum += f[e.point];
        return static_cast<double>(sum) / static_cast<double>(sample_.size());
    }

    std::size_t domain_size() const override { return n_; }

private:
    std::vector<LabeledExample> sample_;
    std::size_t n_;
};

}  // namespace bml
