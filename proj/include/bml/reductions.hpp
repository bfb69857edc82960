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

// Constructive reductions between learning settings:
//
//   * transferring a PAC learner for (C, P) to a close distribution Q by
//     rejection sampling,
//   * the same transfer for SQ learners by rewriting queries into families
//     of sign-valued queries,
//   * improper to proper learning by an agreement test,
//   * proper learning of a near-orthogonal family to exact identification,
//   * running an SQ algorithm on a labeled stream with a small running sum.

#pragma once

#include <bml/boosting.hpp>
#include <bml/core.hpp>
#include <bml/memory_model.hpp>
#include <bml/random.hpp>
#include <bml/sq_dimension.hpp>
#include <bml/sq_oracle.hpp>
#include <bml/stream.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace bml {

// ---------------------------------------------------------------------------
// Sign quantization

struct QuantizedQuery {
    std::vector<std::int8_t> signs;
    std::size_t n = 0;
    std::size_t k = 0;  // number of leading -1 entries
    double target_gamma = 0.0;
    double tau = 1.0;

    double mean() const { return (static_cast<double>(n) - 2.0 * static_cast<double>(k)) / static_cast<double>(n); }
};

/// Writes gamma in [-1, 1] as the mean of n = floor(1/tau) + 1 signs: k
/// copies of -1 followed by n - k copies of +1, with k minimizing
/// |(n - 2k)/n - gamma| (smaller k on ties). Consecutive means are 2/n
/// apart, so the error is at most 1/n < tau.
inline QuantizedQuery quantize_signs(double gamma, double tau) {
    require(gamma >= -1.0 - kCompareSlack && gamma <= 1.0 + kCompareSlack, ErrorKind::parameter,
            "gamma must lie in [-1, 1]");
    require(tau > 0.0 && tau <= 1.0, ErrorKind::parameter, "tau must lie in (0, 1]");
    const double nd = std::floor(1.0 / tau) + 1.0;
    require(nd < 1e9, ErrorKind::capacity, "quantization needs more than 1e9 signs");
    QuantizedQuery q;
    q.n = static_cast<std::size_t>(nd);
    q.target_gamma = gamma;
    q.tau = tau;

    auto err = [&](std::size_t k) { return std::abs((nd - 2.0 * static_cast<double>(k)) / nd - gamma); };
    const double ideal = nd * (1.0 - gamma) / 2.0;
    const auto lo = static_cast<std::size_t>(std::clamp(std::floor(ideal), 0.0, nd));
    std::size_t best = lo;
    for (std::size_t k = lo == 0 ? 0 : lo - 1; k <= std::min(q.n, lo + 2); ++k)
        if (err(k) < err(best) || (err(k) == err(best) && k < best)) best = k;
    q.k = best;
    q.signs.assign(q.n, 1);
    std::fill_n(q.signs.begin(), q.k, std::int8_t{-1});
    return q;
}

// ---------------------------------------------------------------------------
// PAC transfer by rejection sampling

/// eps * P(x) / Q(x), the chance of keeping a Q-drawn example at x. Points
/// with Q(x) = 0 are never drawn and get 0.
inline std::vector<double> rejection_acceptance(const Distribution& P, const Distribution& Q, double epsilon) {
    detail::check_lengths(P.size(), Q.size(), "rejection_acceptance");
    require(epsilon > 0.0 && epsilon <= 1.0, ErrorKind::parameter, "epsilon must lie in (0, 1]");
    std::vector<double> acc(P.size(), 0.0);
    for (Index x = 0; x < P.size(); ++x) {
        if (Q[x] == 0.0) {
            require(P[x] == 0.0, ErrorKind::precondition, "P has mass where Q has none");
            continue;
        }
        const double a = epsilon * P[x] / Q[x];
        require(a <= 1.0 + 1e-12, ErrorKind::precondition,
                "acceptance probability " + std::to_string(a) + " > 1 at point " + std::to_string(x) +
                    ": Q is not 1/epsilon-close to P");
        acc[x] = std::min(a, 1.0);
    }
    return acc;
}

/// Law of an accepted example: Q(x) acc(x) normalized.
inline Distribution accepted_distribution(const Distribution& Q, std::span<const double> acceptance) {
    detail::check_lengths(Q.size(), acceptance.size(), "accepted_distribution");
    std::vector<double> w(Q.size());
    for (Index x = 0; x < Q.size(); ++x) w[x] = Q[x] * acceptance[x];
    return Distribution::from_weights(w);
}

struct RejectionRun {
    Concept hypothesis;
    std::uint64_t accepted = 0;
    std::uint64_t consumed = 0;
    std::size_t bits = 0;
    double min_acceptance = 1.0;
};

/// Runs `strong` (a bounded-memory learner for (C, P)) on examples drawn
/// from a Q-labeled stream and kept with probability eps P(x) / Q(x). Kept
/// examples are distributed as P, so the strong learner's guarantee holds
/// and L_Q(h) <= L_P(h) / eps. The state adds one acceptance counter.
inline RejectionRun pac_rejection_learn(StreamingLearner& strong, const Distribution& P, ExampleStream& q_stream,
                                        double epsilon, std::uint64_t seed) {
    const Distribution& Q = q_stream.distribution();
    require(epsilon > 0.0 && epsilon <= 1.0, ErrorKind::parameter, "epsilon must lie in (0, 1]");
    require(is_mu_close(P, Q, 1.0 / epsilon), ErrorKind::precondition, "Q is not 1/epsilon-close to P");
    const std::vector<double> acc = rejection_acceptance(P, Q, epsilon);

    RejectionRun run;
    for (Index x = 0; x < P.size(); ++x)
        if (Q[x] > 0.0) run.min_acceptance = std::min(run.min_acceptance, acc[x]);

    const std::uint64_t m = strong.declared_samples();
    const std::uint64_t start = q_stream.consumed();
    Rng coin(seed);
    strong.reset();
    state_round_trip(strong);
    try {
        while (run.accepted < m) {
            const LabeledExample e = q_stream.next();
            if (!coin.bernoulli(acc[e.point])) continue;
            strong.update(e, run.accepted++);
            state_round_trip(strong);
        }
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::stream_exhausted) throw;
        fail(ErrorKind::stream_exhausted, std::string(e.what()) + " (accepted " + std::to_string(run.accepted) +
                                              " of " + std::to_string(m) + ")");
    }
    run.consumed = q_stream.consumed() - start;
    run.hypothesis = strong.output();
    run.bits = strong.state_width() + bits_for(m + 1);
    return run;
}

// ---------------------------------------------------------------------------
// SQ transfer by query rewriting

struct RewrittenQueryFamily {
    std::vector<Concept> queries;
    double scale = 1.0;          // 1/eps
    double tolerance = 1.0;      // eps * tau / 2, per member
};

/// psi'(x) = P(x)/Q(x) psi(x) (0 where Q(x) = 0). Each eps psi'(x) is
/// quantized to n signs; the i-th member takes the i-th sign at every
/// point, so (1/eps) * mean_i E_Q[psi_i c] is within tau/2 of <psi, c>_P.
inline RewrittenQueryFamily rewrite_query(const Concept& psi, const Distribution& P, const Distribution& Q,
                                          double epsilon, double tau) {
    detail::check_lengths(psi.size(), P.size(), "rewrite_query");
    const std::vector<double> acc = rejection_acceptance(P, Q, epsilon);
    const double t = epsilon * tau / 2.0;
    std::vector<QuantizedQuery> per_point;
    per_point.reserve(P.size());
    for (Index x = 0; x < P.size(); ++x) per_point.push_back(quantize_signs(acc[x] * psi[x], t));

    RewrittenQueryFamily fam;
    fam.scale = 1.0 / epsilon;
    fam.tolerance = t;
    const std::size_t n = per_point.front().n;
    fam.queries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::int8_t> labels(P.size());
        for (Index x = 0; x < P.size(); ++x) labels[x] = per_point[x].signs[i];
        fam.queries.emplace_back(std::move(labels));
    }
    return fam;
}

/// Presents an SQ oracle for (c, P) built from an SQ oracle for (c, Q).
/// Label-free expectations under the known P are exact.
class RewritingOracle final : public CorrelationOracle {
public:
    RewritingOracle(CorrelationOracle& q_oracle, Distribution P, Distribution Q, double epsilon)
        : q_(q_oracle), P_(std::move(P)), Q_(std::move(Q)), eps_(epsilon) {
        require(epsilon > 0.0 && epsilon <= 1.0, ErrorKind::parameter, "epsilon must lie in (0, 1]");
        require(is_mu_close(P_, Q_, 1.0 / epsilon), ErrorKind::precondition, "Q is not 1/epsilon-close to P");
        detail::check_lengths(q_.domain_size(), P_.size(), "RewritingOracle");
    }

    double answer(const SQQuery& q) override {
        const RewrittenQueryFamily fam = rewrite_query(q.hypothesis, P_, Q_, eps_, q.tolerance);
        double sum = 0.0;
        for (const auto& psi : fam.queries) sum += q_.answer(SQQuery(psi, fam.tolerance));
        const double nu = fam.scale * sum / static_cast<double>(fam.queries.size());
        account_.record(q.tolerance);
        log_query(q, nu);
        return nu;
    }

    double expectation(const Concept& f, double) override { return bml::expectation(f, P_); }
    std::size_t domain_size() const override { return P_.size(); }

private:
    CorrelationOracle& q_;
    Distribution P_;
    Distribution Q_;
    double eps_;
};

struct SQRejectionRun {
    Concept hypothesis;
    std::uint64_t original_queries = 0;
    std::uint64_t q_queries = 0;
    double q_tolerance = std::numeric_limits<double>::infinity();
};

using SQLearner = std::function<Concept(CorrelationOracle&)>;

/// Runs an SQ learner for (C, P) against an SQ oracle for (c, Q).
inline SQRejectionRun sq_rejection_learn(const SQLearner& strong, CorrelationOracle& q_oracle, const Distribution& P,
                                         const Distribution& Q, double epsilon) {
    const std::uint64_t q0 = q_oracle.account().query_count;
    RewritingOracle rewritten(q_oracle, P, Q, epsilon);
    SQRejectionRun run;
    run.hypothesis = strong(rewritten);
    run.original_queries = rewritten.account().query_count;
    run.q_queries = q_oracle.account().query_count - q0;
    run.q_tolerance = q_oracle.account().min_tolerance_used;
    return run;
}

/// A simple strong SQ learner: query every class member at tolerance tau
/// and return the one with the largest answer. Exact whenever tau is below
/// half the smallest gap 1 - <c, c'>_P between distinct members.
inline Concept sq_best_member_learn(CorrelationOracle& oracle, const ConceptClass& cls, double tau,
                                    Index* chosen = nullptr) {
    Index best = 0;
    double best_nu = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < cls.size(); ++i) {
        const double nu = oracle.answer(SQQuery(cls[i], tau, i));
        if (nu > best_nu) {
            best_nu = nu;
            best = i;
        }
    }
    if (chosen != nullptr) *chosen = best;
    return cls[best];
}

// ---------------------------------------------------------------------------
// Improper to proper

struct ProperifyResult {
    std::optional<Index> index;
    Concept output;
    std::uint64_t points_per_candidate = 0;
    std::uint64_t unlabeled_draws = 0;
    std::size_t candidates_tested = 0;
    std::size_t extra_bits = 0;
    bool success = false;
};

inline std::uint64_t properify_points(std::size_t class_size, double epsilon, double c_p) {
    const double lnc = std::log(static_cast<double>(std::max<std::size_t>(class_size, 2)));
    return static_cast<std::uint64_t>(std::ceil(c_p * lnc / (epsilon * epsilon)));
}

/// Scans the class in order and returns the first concept agreeing with h
/// on at least (1 - 2 eps) N of N fresh unlabeled points from P. Points are
/// labeled by h itself, so no labeled examples are spent; only the
/// candidate index and an agreement counter are kept.
inline ProperifyResult properify(const Concept& h, const ConceptClass& cls, const Distribution& P, double epsilon,
                                 std::uint64_t seed, double c_p = 8.0) {
    detail::check_lengths(h.size(), cls.domain_size(), "properify");
    detail::check_lengths(h.size(), P.size(), "properify");
    require(epsilon > 0.0 && epsilon < 0.5, ErrorKind::parameter, "epsilon must lie in (0, 1/2)");
    require(c_p > 0.0, ErrorKind::parameter, "c_p must be positive");
    ProperifyResult r;
    const std::uint64_t n = properify_points(cls.size(), epsilon, c_p);
    r.points_per_candidate = n;
    r.extra_bits = bits_for(cls.size()) + bits_for(n + 1);
    const double need = (1.0 - 2.0 * epsilon) * static_cast<double>(n);

    PointSampler sampler(P);
    Rng rng(seed);
    for (Index i = 0; i < cls.size(); ++i) {
        ++r.candidates_tested;
        std::uint64_t agree = 0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const Index x = sampler(rng);
            agree += cls[i][x] == h[x] ? 1 : 0;
        }
        r.unlabeled_draws += n;
        if (static_cast<double>(agree) >= need - kCompareSlack) {
            r.index = i;
            r.output = cls[i];
            r.success = true;
            return r;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Proper to exact

inline constexpr double kIdentifyRadius = 0.3;

struct IdentifyResult {
    Index member = 0;
    Concept output;
    double distance = 0.0;
};

/// H must be a verified near-orthogonal family with 1/2 - 1/(2|H|) above
/// the 0.3 radius. A member of H is returned as is; otherwise the unique
/// member within loss 0.3 of proper_h is returned.
inline IdentifyResult exact_identify(const Concept& proper_h, const ConceptClass& H, const Distribution& Q) {
    detail::check_lengths(proper_h.size(), H.domain_size(), "exact_identify");
    detail::check_lengths(proper_h.size(), Q.size(), "exact_identify");
    const std::size_t d = H.size();
    const double separation = 0.5 - 0.5 / static_cast<double>(d);
    require(separation > kIdentifyRadius, ErrorKind::precondition,
            "witness of size " + std::to_string(d) + " guarantees only " + std::to_string(separation) +
                " pairwise disagreement; need more than 0.3");
    SQWitness all{d, {}};
    for (Index i = 0; i < d; ++i) all.members.push_back(i);
    require(verify_witness(H, Q, all), ErrorKind::precondition, "H is not near-orthogonal under Q");

    for (Index i = 0; i < d; ++i)
        if (H[i] == proper_h) return IdentifyResult{i, H[i], 0.0};

    std::vector<Index> within;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < d; ++i) {
        const double l = loss(proper_h, H[i], Q);
        if (l <= kIdentifyRadius + kCompareSlack) within.push_back(i);
        best = std::min(best, l);
    }
    require(!within.empty(), ErrorKind::identification,
            "no witness member within loss 0.3 (closest at " + std::to_string(best) + ")");
    require(within.size() == 1, ErrorKind::invariant,
            std::to_string(within.size()) + " witness members lie within loss 0.3 of the hypothesis");
    const Index i = within.front();
    return IdentifyResult{i, H[i], loss(proper_h, H[i], Q)};
}

// ---------------------------------------------------------------------------
// SQ algorithms on a labeled stream

/// Answers each correlation query with the empirical mean of h(x) y over
/// N = ceil(ln(6q) / (2 (tau/2)^2)) fresh stream examples, so all q answers
/// are tau/2-accurate except with probability 1/6. Only the running sum is
/// kept between examples. Beyond kDirectDrawLimit examples the sum is drawn
/// from its exact law (a binomial count of agreements) and the examples are
/// counted without being materialized. Label-free expectations under the
/// known P are exact.
class StreamBackedOracle final : public CorrelationOracle {
public:
    static constexpr std::uint64_t kDirectDrawLimit = 1u << 22;

    StreamBackedOracle(ExampleStream& stream, std::uint64_t planned_queries)
        : stream_(stream), q_(std::max<std::uint64_t>(planned_queries, 1)) {}

    static double samples_for(double tau, std::uint64_t planned_queries) {
        const double half = tau / 2.0;
        return std::ceil(std::log(6.0 * static_cast<double>(std::max<std::uint64_t>(planned_queries, 1))) /
                         (2.0 * half * half));
    }

    double answer(const SQQuery& q) override {
        const Concept& h = q.hypothesis;
        detail::check_lengths(h.size(), stream_.distribution().size(), "StreamBackedOracle::answer");
        const double nd = samples_for(q.tolerance, q_);
        require(nd < 1.8e19, ErrorKind::capacity, "per-query sample count overflows 64 bits");
        const auto n = static_cast<std::uint64_t>(nd);
        double nu = 0.0;
        if (n <= kDirectDrawLimit) {
            std::int64_t sum = 0;
            for (std::uint64_t i = 0; i < n; ++i) {
                const LabeledExample e = stream_.next();
                sum += h[e.point] * e.label;
            }
            nu = static_cast<double>(sum) / nd;
        } else {
            const double agree = (1.0 + correlation(h, stream_.target(), stream_.distribution())) / 2.0;
            const std::uint64_t b = stream_.rng().binomial(n, std::clamp(agree, 0.0, 1.0));
            nu = (2.0 * static_cast<double>(b) - nd) / nd;
        }
        samples_ += nd;
        max_per_query_ = std::max(max_per_query_, n);
        sum_bits_ = std::max(sum_bits_, bits_for(2 * n + 1));
        account_.record(q.tolerance);
        account_.sample_budget_spent += n;
        log_query(q, nu);
        return nu;
    }

    double expectation(const Concept& f, double) override { return bml::expectation(f, stream_.distribution()); }
    std::size_t domain_size() const override { return stream_.distribution().size(); }

    /// Total examples consumed, as a double: shortcut runs can exceed 2^64.
    double samples() const noexcept { return samples_; }
    std::uint64_t max_per_query() const noexcept { return max_per_query_; }
    std::size_t running_sum_bits() const noexcept { return sum_bits_; }

private:
    ExampleStream& stream_;
    std::uint64_t q_;
    double samples_ = 0.0;
    std::uint64_t max_per_query_ = 0;
    std::size_t sum_bits_ = 0;
};

struct BoundedMemoryReport {
    Concept hypothesis;
    double samples = 0.0;
    std::uint64_t queries = 0;
    double min_tolerance = std::numeric_limits<double>::infinity();
    std::size_t algorithm_bits = 0;
    std::size_t running_sum_bits = 0;
    std::size_t bits = 0;
    std::uint64_t max_samples_per_query = 0;

    /// kappa * log2|C| * log2(q / tau) for the realized q and finest tau.
    double bit_bound(double kappa, std::size_t class_size) const {
        const double lc = std::max(1.0, std::log2(static_cast<double>(class_size)));
        const double qt = std::max(2.0, static_cast<double>(std::max<std::uint64_t>(queries, 1)) / min_tolerance);
        return kappa * lc * std::log2(qt);
    }
};

/// An SQ algorithm that reports the bits it keeps between queries.
using BoundedSQAlgorithm = std::function<Concept(CorrelationOracle&, std::size_t& state_bits)>;

inline BoundedMemoryReport sq_to_bounded_memory(const BoundedSQAlgorithm& algorithm, ExampleStream& stream,
                                                std::uint64_t planned_queries) {
    StreamBackedOracle oracle(stream, planned_queries);
    BoundedMemoryReport r;
    r.hypothesis = algorithm(oracle, r.algorithm_bits);
    r.samples = oracle.samples();
    r.queries = oracle.account().query_count;
    r.min_tolerance = oracle.account().min_tolerance_used;
    r.running_sum_bits = oracle.running_sum_bits();
    r.bits = r.algorithm_bits + r.running_sum_bits;
    r.max_samples_per_query = oracle.max_per_query();
    return r;
}

/// Bits weak_sq_learn keeps between queries: its position in the class
/// scan (the cover is recomputed from the known P, not stored), the best
/// index so far and the best answer at the query tolerance's precision.
inline std::size_t weak_sq_state_bits(std::size_t class_size, std::size_t d) {
    const double tau = 1.0 / (3.0 * static_cast<double>(d));
    return 2 * bits_for(class_size) + static_cast<std::size_t>(std::ceil(std::log2(1.0 / tau))) + 2;
}

/// weak_sq_learn as a bounded SQ algorithm.
inline BoundedSQAlgorithm weak_sq_algorithm(const ConceptClass& cls, std::size_t d) {
    return [cls, d](CorrelationOracle& oracle, std::size_t& bits) {
        bits = weak_sq_state_bits(cls.size(), d);
        return weak_sq_learn(oracle, cls, d).h;
    };
}

/// Number of weak-learner correlation queries: the size of the greedy
/// cover at dimension d under P.
inline std::size_t weak_sq_query_count(const ConceptClass& cls, const Distribution& P, std::size_t d) {
    ExactOracle probe(cls[0], P);
    WeakLearnReport rep;
    weak_sq_learn(probe, cls, d, &rep);
    return rep.correlation_queries;
}

}  // namespace bml
