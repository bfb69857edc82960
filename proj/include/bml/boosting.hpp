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

// Boost-By-Majority, sample-based (rejection sampling) and SQ-based
// (query simulation against the base distribution), plus the weak SQ
// learner both of them drive.
//
// Margins. The round-(t+1) weight of a labeled point (x, y) is
//
//     w(x) = Binom(T - t, floor((T - t - r) / 2), 1/2 + gamma),
//     r    = y * sum_i h_i(x),
//
// i.e. r counts correct votes minus wrong votes, and floor((T-t-r)/2) is
// how many of the remaining T - t votes must still be wrong for the final
// majority to be wrong. Vote sums are always recomputed from the stored
// hypotheses; nothing is kept per point.

#pragma once

#include <bml/core.hpp>
#include <bml/random.hpp>
#include <bml/sq_oracle.hpp>
#include <bml/stream.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace bml {

/// C(n,k) p^k (1-p)^(n-k); zero for k outside [0, n]. Log-space.
inline double binom_pmf(std::int64_t n, std::int64_t k, double p) {
    require(p >= 0.0 && p <= 1.0, ErrorKind::parameter, "binomial success probability must lie in [0,1]");
    require(n >= 0, ErrorKind::parameter, "binomial trial count must be >= 0");
    if (k < 0 || k > n) return 0.0;
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;
    const double dn = static_cast<double>(n);
    const double dk = static_cast<double>(k);
    const double log_pmf = std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0) +
                           dk * std::log(p) + (dn - dk) * std::log1p(-p);
    return std::exp(log_pmf);
}

namespace detail {

inline std::int64_t floor_div2(std::int64_t a) { return a >= 0 ? a / 2 : -((-a + 1) / 2); }

inline void check_bbm_args(std::int64_t T, std::int64_t t, double gamma) {
    require(T >= 1, ErrorKind::parameter, "boosting horizon T must be >= 1");
    require(t >= 0 && t <= T, ErrorKind::parameter, "round index must satisfy 0 <= t <= T");
    require(gamma >= 0.0 && gamma <= 0.5, ErrorKind::parameter, "gamma must lie in [0, 1/2]");
}

}  // namespace detail

inline double bbm_weight(std::int64_t T, std::int64_t t, std::int64_t r, double gamma) {
    detail::check_bbm_args(T, t, gamma);
    require(r >= -t && r <= t, ErrorKind::parameter, "margin must satisfy |r| <= t");
    return binom_pmf(T - t, detail::floor_div2(T - t - r), 0.5 + gamma);
}

/// max over reachable margins r in {-t, -t+2, ..., t} of bbm_weight.
inline double bbm_weight_max(std::int64_t T, std::int64_t t, double gamma) {
    detail::check_bbm_args(T, t, gamma);
    const std::int64_t n = T - t;
    const std::int64_t k_lo = std::max<std::int64_t>(0, detail::floor_div2(T - 2 * t));
    const std::int64_t k_hi = std::min<std::int64_t>(n, detail::floor_div2(T));
    if (k_lo > k_hi) return 0.0;
    const double p = 0.5 + gamma;
    const auto mode = static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * p));
    double best = 0.0;
    for (std::int64_t k : {mode - 1, mode, mode + 1, k_lo, k_hi})
        best = std::max(best, binom_pmf(n, std::clamp(k, k_lo, k_hi), p));
    return best;
}

struct BoostParams {
    double gamma = 0.1;
    double epsilon = 0.1;
    std::size_t T = 1;
    std::size_t abort_window = 1;
    double c_abort = 3.0;

    /// T defaults to c_T * ceil(gamma^-2 ln(1/epsilon)); the abort window
    /// is ceil(c_abort * epsilon^-3 * ln(T + 1)).
    static BoostParams make(double gamma, double epsilon, double c_T = 2.0, double c_abort = 3.0,
                            std::optional<std::size_t> horizon = std::nullopt) {
        require(gamma > 0.0 && gamma <= 0.5, ErrorKind::parameter, "gamma must lie in (0, 1/2]");
        require(epsilon > 0.0 && epsilon < 1.0, ErrorKind::parameter, "epsilon must lie in (0,1)");
        require(c_T > 0.0 && c_abort > 0.0, ErrorKind::parameter, "boosting constants must be positive");
        BoostParams p;
        p.gamma = gamma;
        p.epsilon = epsilon;
        p.c_abort = c_abort;
        p.T = horizon ? *horizon : default_horizon(gamma, epsilon, c_T);
        require(p.T >= 1, ErrorKind::parameter, "boosting horizon T must be >= 1");
        p.abort_window = static_cast<std::size_t>(
            std::ceil(c_abort * std::pow(epsilon, -3.0) * std::log(static_cast<double>(p.T) + 1.0)));
        return p;
    }

    static std::size_t default_horizon(double gamma, double epsilon, double c_T) {
        const double base = std::ceil(std::log(1.0 / epsilon) / (gamma * gamma));
        return std::max<std::size_t>(1, static_cast<std::size_t>(c_T * base));
    }
};

/// A weak hypothesis, remembered as a (possibly negated) class member when
/// it came from the class, inline otherwise.
struct WeakHypothesis {
    Concept h;
    std::optional<Index> class_index;
    bool negated = false;
};

class MajorityHypothesis {
public:
    MajorityHypothesis() = default;
    explicit MajorityHypothesis(std::vector<Concept> members) : members_(std::move(members)) {}

    void add(Concept h) { members_.push_back(std::move(h)); }

    /// +1 iff the vote sum is strictly positive.
    int operator()(Index x) const {
        int sum = 0;
        for (const auto& h : members_) sum += h[x];
        return sum > 0 ? 1 : -1;
    }

    Concept to_concept(std::size_t domain_size) const {
        std::vector<int> sums(domain_size, 0);
        for (const auto& h : members_) {
            detail::check_lengths(h.size(), domain_size, "MajorityHypothesis::to_concept");
            for (Index x = 0; x < domain_size; ++x) sums[x] += h[x];
        }
        std::vector<std::int8_t> out(domain_size);
        for (Index x = 0; x < domain_size; ++x) out[x] = sums[x] > 0 ? 1 : -1;
        return Concept(std::move(out));
    }

    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    const std::vector<Concept>& members() const noexcept { return members_; }

private:
    std::vector<Concept> members_;
};

inline int majority_eval(const MajorityHypothesis& m, Index x) { return m(x); }

class BoostState {
public:
    explicit BoostState(BoostParams params) : params_(params) {}

    const BoostParams& params() const noexcept { return params_; }
    std::size_t t() const noexcept { return hyps_.size(); }
    const std::vector<WeakHypothesis>& hypotheses() const noexcept { return hyps_; }

    void push(WeakHypothesis h) {
        require(hyps_.size() < params_.T, ErrorKind::protocol, "boost state already holds T hypotheses");
        auto it = std::find_if(groups_.begin(), groups_.end(), [&](const auto& g) { return g.first == h.h; });
        if (it == groups_.end())
            groups_.emplace_back(h.h, 1);
        else
            ++it->second;
        hyps_.push_back(std::move(h));
    }

    /// sum_i h_i(x), recomputed from the stored hypotheses (repeated
    /// hypotheses are summed once with their multiplicity).
    int vote_sum(Index x) const {
        int s = 0;
        for (const auto& [h, mult] : groups_) s += mult * h[x];
        return s;
    }

    std::vector<int> vote_sums(std::size_t domain_size) const {
        std::vector<int> s(domain_size, 0);
        for (const auto& [h, mult] : groups_)
            for (Index x = 0; x < domain_size; ++x) s[x] += mult * h[x];
        return s;
    }

    MajorityHypothesis majority() const {
        MajorityHypothesis m;
        for (const auto& w : hyps_) m.add(w.h);
        return m;
    }

    double weight_for_margin(std::int64_t r) const {
        return bbm_weight(static_cast<std::int64_t>(params_.T), static_cast<std::int64_t>(t()), r, params_.gamma);
    }

private:
    BoostParams params_;
    std::vector<WeakHypothesis> hyps_;
    std::vector<std::pair<Concept, int>> groups_;
};

/// w(x) P(x) / Z. Z = 0 is a degenerate round.
inline Distribution reweight(const Distribution& P, std::span<const double> weights) {
    detail::check_lengths(P.size(), weights.size(), "reweight");
    std::vector<double> prod(P.size());
    double z = 0.0;
    for (Index x = 0; x < P.size(); ++x) {
        require(weights[x] >= 0.0, ErrorKind::parameter, "weights must be non-negative");
        prod[x] = weights[x] * P[x];
        z += prod[x];
    }
    require(z > 0.0, ErrorKind::degenerate, "normalization factor Z is zero");
    for (auto& v : prod) v /= z;
    return Distribution(std::move(prod));
}

inline std::vector<double> bbm_weights(const BoostState& state, const Concept& target) {
    const std::vector<int> s = state.vote_sums(target.size());
    std::vector<double> w(target.size());
    for (Index x = 0; x < target.size(); ++x) w[x] = state.weight_for_margin(target[x] * s[x]);
    return w;
}

/// The exact round distribution P_{t+1} for the current state.
inline Distribution bbm_distribution(const Distribution& P, const BoostState& state, const Concept& target) {
    detail::check_lengths(P.size(), target.size(), "bbm_distribution");
    return reweight(P, bbm_weights(state, target));
}

// ---------------------------------------------------------------------------
// Weak SQ learner

struct WeakLearnReport {
    std::size_t cover_size = 0;
    std::size_t correlation_queries = 0;
    double best_answer = 0.0;
};

/// Greedy cover: scan the class in order and keep a concept when its
/// estimated |<h, h'>| is at most 1/d against every kept one. Any target
/// outside the cover then has |correlation| > 1/d with a cover member, so
/// the member (or negation) with the largest |answer| at tolerance 1/(3d)
/// correlates with the target at least 1/(3d).
inline WeakHypothesis weak_sq_learn(CorrelationOracle& oracle, const ConceptClass& cls, std::size_t d,
                                    WeakLearnReport* report = nullptr) {
    require(d >= 1, ErrorKind::parameter, "weak learner dimension must be >= 1");
    detail::check_lengths(cls.domain_size(), oracle.domain_size(), "weak_sq_learn");
    const double dd = static_cast<double>(d);
    const double tau = std::min(1.0, 1.0 / (3.0 * dd));
    const double bound = 1.0 / dd + kCompareSlack;

    std::vector<Index> cover;
    for (Index i = 0; i < cls.size(); ++i) {
        bool keep = true;
        for (Index j : cover) {
            if (std::abs(oracle.expectation(cls[i] * cls[j], tau)) > bound) {
                keep = false;
                break;
            }
        }
        if (keep) cover.push_back(i);
    }

    Index best = cover.front();
    double best_answer = 0.0;
    bool first = true;
    for (Index i : cover) {
        const double nu = oracle.answer(SQQuery(cls[i], tau, i));
        if (first || std::abs(nu) > std::abs(best_answer)) {
            best = i;
            best_answer = nu;
            first = false;
        }
    }
    if (report != nullptr) {
        report->cover_size = cover.size();
        report->correlation_queries = cover.size();
        report->best_answer = best_answer;
    }
    const bool negate = best_answer < 0.0;
    return WeakHypothesis{negate ? -cls[best] : cls[best], best, negate};
}

// ---------------------------------------------------------------------------
// SQ simulation of P_t queries through the base distribution P

struct SimulationConfig {
    double epsilon = 0.1;
    double c_sim = 4.0;
};

namespace detail {

/// E_P[g c] for g with values in {-1, 0, +1}: the average of the two ±1
/// completions of g (+1 resp. -1 off the support of g). One query when g
/// has full support, none when it is identically zero.
inline double masked_correlation(CorrelationOracle& base, std::span<const std::int8_t> g, double tau) {
    bool any_zero = false;
    bool any_nonzero = false;
    for (auto v : g) (v == 0 ? any_zero : any_nonzero) = true;
    if (!any_nonzero) return 0.0;
    auto completion = [&](std::int8_t fill) {
        std::vector<std::int8_t> out(g.begin(), g.end());
        for (auto& v : out)
            if (v == 0) v = fill;
        return Concept(std::move(out));
    };
    if (!any_zero) return base.answer(SQQuery(completion(1), tau));
    const double a = base.answer(SQQuery(completion(1), tau));
    const double b = base.answer(SQQuery(completion(-1), tau));
    return (a + b) / 2.0;
}

}  // namespace detail

/// Answers queries about P_{t+1} (the distribution induced by a BoostState)
/// using only a base oracle for P. The domain is split by |vote sum|; each
/// region issues at most two base queries for the numerator and two for
/// the normalizer. Per-query base tolerance is tau * eps^3 / (2 C_sim (t+1)).
class SimulatedOracle final : public CorrelationOracle {
public:
    SimulatedOracle(CorrelationOracle& base, Distribution P, const BoostState& state, SimulationConfig cfg)
        : base_(base), P_(std::move(P)), state_(state), cfg_(cfg), sums_(state.vote_sums(P_.size())) {
        detail::check_lengths(base.domain_size(), P_.size(), "SimulatedOracle");
        require(cfg.epsilon > 0.0 && cfg.epsilon < 1.0, ErrorKind::parameter, "epsilon must lie in (0,1)");
        require(cfg.c_sim > 0.0, ErrorKind::parameter, "C_sim must be positive");
        for (int s : sums_) magnitudes_.insert(std::abs(s));
    }

    double base_tolerance(double tau) const {
        const double t1 = static_cast<double>(state_.t() + 1);
        return std::min(1.0, tau * std::pow(cfg_.epsilon, 3.0) / (2.0 * cfg_.c_sim * t1));
    }

    /// <psi, c>_{P_t} within tau (given base answers within their tolerance
    /// and the P_t <= (C/eps^3) P regime).
    double answer(const SQQuery& q) override {
        detail::check_lengths(q.hypothesis.size(), P_.size(), "SimulatedOracle::answer");
        const double tb = base_tolerance(q.tolerance);
        const double z = normalizer(tb);
        double num = 0.0;
        for (int m : magnitudes_) {
            std::vector<std::int8_t> g(P_.size(), 0);
            double g2 = 0.0;  // E_P[psi (1[s=m] - 1[s=-m])] / 2, exact
            for (Index x = 0; x < P_.size(); ++x) {
                if (std::abs(sums_[x]) != m) continue;
                g[x] = static_cast<std::int8_t>(q.hypothesis[x]);
                if (m != 0) g2 += P_[x] * q.hypothesis[x] * (sums_[x] == m ? 0.5 : -0.5);
            }
            const double k = detail::masked_correlation(base_, g, tb);
            if (m == 0) {
                num += weight(0) * k;
            } else {
                num += weight(m) * (g2 + k / 2.0) + weight(-m) * (-g2 + k / 2.0);
            }
        }
        const double nu = num / z;
        account_.record(q.tolerance);
        log_query(q, nu);
        return nu;
    }

    /// E_{P_t}[f] for a label-free ±1 function f.
    double expectation(const Concept& f, double tolerance) override {
        detail::check_lengths(f.size(), P_.size(), "SimulatedOracle::expectation");
        const double tb = base_tolerance(tolerance);
        const double z = normalizer(tb);
        double num = 0.0;
        for (int m : magnitudes_) {
            std::vector<std::int8_t> g(P_.size(), 0);
            double fa = 0.0;  // E_P[f 1_A], exact
            for (Index x = 0; x < P_.size(); ++x) {
                if (std::abs(sums_[x]) != m) continue;
                fa += P_[x] * f[x];
                if (m != 0) g[x] = static_cast<std::int8_t>(f[x] * (sums_[x] == m ? 1 : -1));
            }
            if (m == 0) {
                num += weight(0) * fa;
            } else {
                const double k = detail::masked_correlation(base_, g, tb);
                num += weight(m) * (fa + k) / 2.0 + weight(-m) * (fa - k) / 2.0;
            }
        }
        return num / z;
    }

    std::size_t domain_size() const override { return P_.size(); }

    /// Estimated normalizer Z = E_P[w(c(x) s(x))]; cached per state.
    double normalizer(double tb) {
        if (z_ && z_tolerance_ <= tb) return *z_;
        double z = 0.0;
        for (int m : magnitudes_) {
            std::vector<std::int8_t> u(P_.size(), 0);
            double mass = 0.0;
            for (Index x = 0; x < P_.size(); ++x) {
                if (std::abs(sums_[x]) != m) continue;
                mass += P_[x];
                if (m != 0) u[x] = sums_[x] == m ? 1 : -1;
            }
            if (m == 0) {
                z += weight(0) * mass;
            } else {
                const double l = detail::masked_correlation(base_, u, tb);
                z += weight(m) * (mass + l) / 2.0 + weight(-m) * (mass - l) / 2.0;
            }
        }
        require(z > 0.0, ErrorKind::degenerate, "estimated normalizer is not positive");
        z_ = z;
        z_tolerance_ = tb;
        return z;
    }

    const std::set<int>& regions() const noexcept { return magnitudes_; }

private:
    double weight(int margin) {
        auto it = weights_.find(margin);
        if (it != weights_.end()) return it->second;
        const double w = state_.weight_for_margin(margin);
        weights_.emplace(margin, w);
        return w;
    }

    CorrelationOracle& base_;
    Distribution P_;
    const BoostState& state_;
    SimulationConfig cfg_;
    std::vector<int> sums_;
    std::set<int> magnitudes_;
    std::map<int, double> weights_;
    std::optional<double> z_;
    double z_tolerance_ = 0.0;
};

/// One simulated correlation query against P_{t+1}; the normalizer is
/// re-estimated for this call.
inline double sq_simulate_query(const Concept& psi, const BoostState& state, const Distribution& P,
                                CorrelationOracle& base, double tau, SimulationConfig cfg = {}) {
    SimulatedOracle sim(base, P, state, cfg);
    return sim.answer(SQQuery(psi, std::min(tau, 1.0)));
}

// ---------------------------------------------------------------------------
// SQ-BBM

struct SQBoostOptions {
    double c_T = 2.0;
    double c_sim = 4.0;
    std::optional<std::size_t> horizon;
    std::optional<double> gamma;
    /// After each round the majority's correlation under P is checked with
    /// one base query at tolerance epsilon/2; the run stops once that
    /// certifies loss <= epsilon.
    bool certify_stop = true;
    /// Called after each simulated correlation query with the state it was
    /// answered under (tests use it to compare against exact P_t).
    std::function<void(const Concept&, double, const BoostState&)> on_simulated_query;
    /// Called at the start of every round.
    std::function<void(const BoostState&)> on_round;
};

struct SQBoostResult {
    MajorityHypothesis majority;
    std::vector<WeakHypothesis> hypotheses;
    BoostParams params;
    std::size_t dimension_used = 0;
    std::size_t rounds_used = 0;
    std::uint64_t base_queries = 0;
    double min_tolerance = std::numeric_limits<double>::infinity();
    bool aborted = false;
    bool certified = false;
    std::string abort_reason;
    std::vector<std::size_t> flagged_rounds;
    std::size_t state_bits = 0;
};

namespace detail {

class ObservedOracle final : public CorrelationOracle {
public:
    ObservedOracle(SimulatedOracle& inner, const BoostState& state,
                   const std::function<void(const Concept&, double, const BoostState&)>& cb)
        : inner_(inner), state_(state), cb_(cb) {}

    double answer(const SQQuery& q) override {
        const double nu = inner_.answer(q);
        account_.record(q.tolerance);
        if (cb_) cb_(q.hypothesis, nu, state_);
        return nu;
    }
    double expectation(const Concept& f, double tol) override { return inner_.expectation(f, tol); }
    std::size_t domain_size() const override { return inner_.domain_size(); }

private:
    SimulatedOracle& inner_;
    const BoostState& state_;
    const std::function<void(const Concept&, double, const BoostState&)>& cb_;
};

}  // namespace detail

/// Bits held by an SQ-BBM run between base queries: stored hypothesis
/// references, the round counter, the weak learner's cover/best indices and
/// two fixed-point accumulators at the finest base tolerance.
inline std::size_t sq_bbm_state_bits(std::size_t class_size, std::size_t rounds, std::size_t horizon,
                                     std::size_t cover_max, double min_tolerance) {
    const std::size_t ref = bits_for(2 * class_size);
    const std::size_t acc = std::isfinite(min_tolerance) && min_tolerance > 0.0
                                ? static_cast<std::size_t>(std::ceil(std::log2(1.0 / min_tolerance))) + 2
                                : 2;
    return rounds * ref + bits_for(horizon + 1) + cover_max * bits_for(class_size) + 2 * ref + 2 * acc;
}

/// BBM in the SQ model. The weak learner runs at dimension 4d and its
/// correlation guarantee 1/(12d) gives advantage gamma = 1/(24d).
inline SQBoostResult sq_bbm_boost(CorrelationOracle& base, const ConceptClass& cls, const Distribution& P,
                                  std::size_t d, double epsilon, SQBoostOptions opts = {}) {
    require(d >= 1, ErrorKind::parameter, "d must be >= 1");
    detail::check_lengths(cls.domain_size(), P.size(), "sq_bbm_boost");
    const std::size_t dim = 4 * d;
    const double gamma = opts.gamma ? *opts.gamma : 1.0 / (6.0 * static_cast<double>(dim));
    const BoostParams params = BoostParams::make(gamma, epsilon, opts.c_T, 3.0, opts.horizon);

    SQBoostResult result;
    result.params = params;
    result.dimension_used = dim;
    const std::uint64_t q0 = base.account().query_count;
    std::size_t cover_max = 0;

    BoostState state(params);
    for (std::size_t round = 0; round < params.T; ++round) {
        if (opts.on_round) opts.on_round(state);
        SimulatedOracle sim(base, P, state, SimulationConfig{epsilon, opts.c_sim});
        WeakLearnReport rep;
        WeakHypothesis h;
        try {
            detail::ObservedOracle observed(sim, state, opts.on_simulated_query);
            h = weak_sq_learn(observed, cls, dim, &rep);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::degenerate) throw;
            result.aborted = true;
            result.abort_reason = e.what();
            break;
        }
        cover_max = std::max(cover_max, rep.cover_size);
        if (std::abs(rep.best_answer) < 1.0 / (3.0 * static_cast<double>(dim)))
            result.flagged_rounds.push_back(round);
        state.push(std::move(h));
        ++result.rounds_used;

        if (opts.certify_stop) {
            const double ts = epsilon / 2.0;
            const double nu = base.answer(SQQuery(state.majority().to_concept(P.size()), ts));
            if ((1.0 - nu + ts) / 2.0 <= epsilon) {
                result.certified = true;
                break;
            }
        }
    }

    result.hypotheses = state.hypotheses();
    result.majority = state.majority();
    result.base_queries = base.account().query_count - q0;
    result.min_tolerance = base.account().min_tolerance_used;
    result.state_bits = sq_bbm_state_bits(cls.size(), result.rounds_used, params.T, cover_max, result.min_tolerance);
    return result;
}

// ---------------------------------------------------------------------------
// Sample-based BBM with rejection sampling

/// A weak learner fed with m0 examples drawn from the current round
/// distribution.
struct SampleWeakLearner {
    std::size_t sample_size = 1;
    std::function<WeakHypothesis(std::span<const LabeledExample>, WeakLearnReport*)> learn;
};

/// weak_sq_learn answered from the sample itself. The sample size makes
/// every cover and correlation estimate tau = 1/(3d) accurate with
/// probability 1 - delta (Hoeffding plus a union bound).
inline SampleWeakLearner make_sample_weak_learner(const ConceptClass& cls, std::size_t d, double delta = 1.0 / 3.0) {
    require(d >= 1, ErrorKind::parameter, "weak learner dimension must be >= 1");
    const double tau = 1.0 / (3.0 * static_cast<double>(d));
    const double k = static_cast<double>(cls.size()) * static_cast<double>(cls.size() + 1) / 2.0;
    const auto m0 = static_cast<std::size_t>(std::ceil(std::log(2.0 * k / delta) / (2.0 * tau * tau)));
    SampleWeakLearner wl;
    wl.sample_size = m0;
    wl.learn = [cls, d](std::span<const LabeledExample> sample, WeakLearnReport* rep) {
        EmpiricalOracle emp(std::vector<LabeledExample>(sample.begin(), sample.end()), cls.domain_size());
        return weak_sq_learn(emp, cls, d, rep);
    };
    return wl;
}

struct BoostRoundRecord {
    std::size_t round = 0;
    std::uint64_t drawn = 0;
    std::uint64_t accepted = 0;
    bool flagged = false;
};

struct BoostResult {
    MajorityHypothesis majority;
    std::vector<WeakHypothesis> hypotheses;
    BoostParams params;
    std::size_t rounds_used = 0;
    std::uint64_t samples_consumed = 0;
    std::uint64_t queries_consumed = 0;
    std::size_t bits_counted = 0;
    bool aborted = false;
    std::string abort_reason;
    std::vector<BoostRoundRecord> rounds;
};

/// Declared state width of a BBM run: hypothesis references plus round,
/// acceptance and consecutive-rejection counters.
inline std::size_t bbm_declared_bits(const BoostParams& params, std::size_t ref_width, std::size_t m0) {
    return params.T * ref_width + bits_for(params.T + 1) + bits_for(m0 + 1) + bits_for(params.abort_window + 1);
}

inline std::size_t bbm_ref_width(const std::vector<WeakHypothesis>& hyps, std::size_t class_size,
                                 std::size_t domain_size) {
    bool inline_refs = false;
    for (const auto& h : hyps) inline_refs = inline_refs || !h.class_index;
    return inline_refs ? domain_size : bits_for(2 * class_size);
}

struct BoostOptions {
    /// Called at the start of every round with the state in force.
    std::function<void(const BoostState&)> on_round;
    std::size_t class_size = 0;  // for reference-width accounting; 0 = inline
    /// Draw each run of rejections from its exact Geometric(a) law (a = the
    /// round's acceptance rate) and the accepted point from P_{t+1},
    /// instead of flipping one coin per streamed example. Same law for the
    /// accepted sample and the consumption count; much faster once the
    /// acceptance rate is small.
    bool fast_forward_rejections = false;
};

/// Each round rejection-samples the stream, accepting (x, y) with
/// probability w(x) / w_max where w_max is the largest weight any margin
/// can have this round, so accepted examples follow P_{t+1} exactly. The
/// round aborts after abort_window consecutive rejections or when no
/// margin carries weight; either way the current majority is returned.
inline BoostResult bbm_boost(ExampleStream& stream, const SampleWeakLearner& weak, const BoostParams& params,
                             std::uint64_t seed, const BoostOptions& opts = {}) {
    Rng coin(seed);
    BoostState state(params);
    BoostResult result;
    result.params = params;
    const std::uint64_t start = stream.consumed();
    const auto T = static_cast<std::int64_t>(params.T);

    auto finish = [&]() {
        result.hypotheses = state.hypotheses();
        result.majority = state.majority();
        result.samples_consumed = stream.consumed() - start;
        const std::size_t ref = opts.class_size == 0 ? stream.target().size()
                                                     : bbm_ref_width(result.hypotheses, opts.class_size,
                                                                     stream.target().size());
        result.bits_counted = result.rounds_used * ref + bits_for(params.T + 1) + bits_for(weak.sample_size + 1) +
                              bits_for(params.abort_window + 1);
    };

    for (std::size_t round = 0; round < params.T; ++round) {
        if (opts.on_round) opts.on_round(state);
        const auto t = static_cast<std::int64_t>(state.t());
        const double wmax = bbm_weight_max(T, t, params.gamma);
        if (wmax <= 0.0) {
            result.aborted = true;
            result.abort_reason = "no margin carries weight";
            break;
        }
        std::unordered_map<std::int64_t, double> accept_prob;
        std::vector<LabeledExample> sample;
        sample.reserve(weak.sample_size);
        std::size_t consecutive_rejects = 0;
        BoostRoundRecord rec{round, 0, 0, false};
        try {
            if (opts.fast_forward_rejections) {
                const Concept& target = stream.target();
                const Distribution& P = stream.distribution();
                std::vector<double> mass(P.size());
                double rate = 0.0;
                for (Index x = 0; x < P.size(); ++x) {
                    const std::int64_t margin = target[x] * state.vote_sum(x);
                    mass[x] = P[x] * bbm_weight(T, t, margin, params.gamma) / wmax;
                    rate += mass[x];
                }
                std::optional<PointSampler> accepted;
                if (rate > 0.0) accepted.emplace(Distribution::from_weights(mass));
                while (sample.size() < weak.sample_size) {
                    std::uint64_t rejects = params.abort_window;
                    if (rate >= 1.0) {
                        rejects = 0;
                    } else if (rate > 0.0) {
                        const double u = 1.0 - coin.uniform();
                        const double g = std::floor(std::log(u) / std::log1p(-rate));
                        if (g < static_cast<double>(params.abort_window)) rejects = static_cast<std::uint64_t>(g);
                    }
                    if (rejects >= params.abort_window) {
                        stream.skip(params.abort_window);
                        rec.drawn += params.abort_window;
                        consecutive_rejects = params.abort_window;
                        break;
                    }
                    stream.skip(rejects + 1);
                    rec.drawn += rejects + 1;
                    const Index x = (*accepted)(stream.rng());
                    sample.push_back(LabeledExample{x, target[x]});
                }
            }
            while (!opts.fast_forward_rejections && sample.size() < weak.sample_size &&
                   consecutive_rejects < params.abort_window) {
                const LabeledExample e = stream.next();
                ++rec.drawn;
                const std::int64_t margin = e.label * state.vote_sum(e.point);
                auto it = accept_prob.find(margin);
                if (it == accept_prob.end())
                    it = accept_prob.emplace(margin, bbm_weight(T, t, margin, params.gamma) / wmax).first;
                if (coin.bernoulli(it->second)) {
                    sample.push_back(e);
                    consecutive_rejects = 0;
                } else {
                    ++consecutive_rejects;
                }
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::stream_exhausted) throw;
            finish();
            throw PartialResultError<BoostResult>(ErrorKind::stream_exhausted, e.what(), result);
        }
        rec.accepted = sample.size();
        if (sample.size() < weak.sample_size) {
            result.rounds.push_back(rec);
            result.aborted = true;
            result.abort_reason = "abort window of consecutive rejections reached";
            break;
        }
        WeakLearnReport rep;
        WeakHypothesis h = weak.learn(sample, &rep);
        result.queries_consumed += rep.correlation_queries;
        // The weak-learner contract (correlation >= 2 gamma) is checked on
        // its own training sample.
        std::int64_t agree = 0;
        for (const auto& e : sample) agree += h.h[e.point] * e.label;
        rec.flagged = static_cast<double>(agree) / static_cast<double>(sample.size()) < 2.0 * params.gamma;
        result.rounds.push_back(rec);
        state.push(std::move(h));
        ++result.rounds_used;
    }
    finish();
    return result;
}

}  // namespace bml
