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

// End-to-end compositions with per-trial rows and aggregates.

#pragma once

#include <bml/boosting.hpp>
#include <bml/config.hpp>
#include <bml/core.hpp>
#include <bml/memory_model.hpp>
#include <bml/reductions.hpp>
#include <bml/sq_dimension.hpp>
#include <bml/sq_oracle.hpp>
#include <bml/stream.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace bml {

struct ExperimentResult {
    std::string id;
    std::string spec;
    std::uint64_t seed = 0;
    std::vector<nlohmann::json> trials;
    nlohmann::json aggregates = nlohmann::json::object();
    nlohmann::json config = nlohmann::json::object();
    bool passed = true;

    nlohmann::json to_json() const {
        return {{"id", id},       {"spec", spec},   {"seed", seed},   {"trials", trials},
                {"aggregates", aggregates}, {"config", config}, {"passed", passed}};
    }

    /// One CSV row per trial; the column set is the union of trial keys
    /// in sorted order, prefixed by the experiment id.
    std::string to_csv(bool header = true) const {
        std::vector<std::string> cols;
        for (const auto& t : trials)
            for (const auto& [k, v] : t.items())
                if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
        std::sort(cols.begin(), cols.end());
        std::ostringstream out;
        if (header) {
            out << "id";
            for (const auto& c : cols) out << ',' << c;
            out << '\n';
        }
        for (const auto& t : trials) {
            out << id;
            for (const auto& c : cols) {
                out << ',';
                if (!t.contains(c)) continue;
                const auto& v = t.at(c);
                out << (v.is_string() ? v.get<std::string>() : v.dump());
            }
            out << '\n';
        }
        return out.str();
    }
};

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

/// Recomputes the aggregate block of a result from its trial rows:
/// the mean of every boolean column and the median of every numeric one.
inline nlohmann::json aggregate_trials(const std::vector<nlohmann::json>& trials) {
    std::map<std::string, std::vector<double>> numeric;
    std::map<std::string, std::pair<std::size_t, std::size_t>> flags;
    for (const auto& t : trials) {
        for (const auto& [k, v] : t.items()) {
            if (v.is_boolean())
                (v.get<bool>() ? flags[k].first : flags[k].second)++;
            else if (v.is_number())
                numeric[k].push_back(v.get<double>());
        }
    }
    nlohmann::json out = nlohmann::json::object();
    out["trials"] = trials.size();
    for (const auto& [k, c] : flags) out[k + "_rate"] = static_cast<double>(c.first) / static_cast<double>(c.first + c.second);
    for (const auto& [k, v] : numeric) {
        out[k + "_median"] = median(v);
        out[k + "_max"] = *std::max_element(v.begin(), v.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Weak SQ learning -> SQ boosting -> stream simulation

struct Thm1Options {
    std::size_t trials = 1;
    Constants constants;
    double triviality_slack = 1.0;
};

/// Generous upper bound on the base queries of one SQ-BBM run, used only
/// inside the ln(6q) factor of the per-query sample count.
inline std::uint64_t sq_bbm_query_budget(std::size_t class_size, std::size_t horizon) {
    const double q = static_cast<double>(horizon) * static_cast<double>(class_size + 2) * 4.0 *
                     static_cast<double>(horizon + 1);
    return static_cast<std::uint64_t>(std::min(q, 1e18));
}

inline ExperimentResult pipeline_thm1(const ConceptClass& cls, const Distribution& P, std::size_t d, double epsilon,
                                      std::uint64_t seed, const Thm1Options& opts = {}) {
    detail::check_lengths(cls.domain_size(), P.size(), "pipeline_thm1");
    require(d >= 1, ErrorKind::parameter, "d must be >= 1");
    require(epsilon > 0.0 && epsilon < 1.0, ErrorKind::parameter, "epsilon must lie in (0,1)");
    ExperimentResult res;
    res.id = "thm1";
    res.seed = seed;
    res.config = opts.constants.to_json();

    const double gamma = 1.0 / (6.0 * 4.0 * static_cast<double>(d));
    const std::size_t horizon = BoostParams::default_horizon(gamma, epsilon, opts.constants.c_T);
    const std::uint64_t q_plan = sq_bbm_query_budget(cls.size(), horizon);

    std::size_t successes = 0;
    for (std::size_t t = 0; t < opts.trials; ++t) {
        Rng pick(mix_seed(seed, 2 * t));
        const Index target = static_cast<Index>(pick.below(cls.size()));
        ExampleStream stream(P, cls[target], mix_seed(seed, 2 * t + 1));
        SQBoostResult boost;
        auto algorithm = [&](CorrelationOracle& oracle, std::size_t& bits) {
            SQBoostOptions so;
            so.c_T = opts.constants.c_T;
            so.c_sim = opts.constants.c_sim;
            boost = sq_bbm_boost(oracle, cls, P, d, epsilon, so);
            bits = boost.state_bits;
            return boost.majority.to_concept(P.size());
        };
        const BoundedMemoryReport rep = sq_to_bounded_memory(algorithm, stream, q_plan);
        const double l = loss(rep.hypothesis, cls[target], P);
        const TrivialityVerdict verdict = triviality_check(rep.samples, static_cast<double>(rep.bits), cls.size(),
                                                           cls.domain_size(), epsilon, opts.triviality_slack);
        const double bound = rep.bit_bound(opts.constants.kappa, cls.size());
        const bool ok = l <= epsilon;
        successes += ok ? 1 : 0;
        res.trials.push_back({{"trial", t},
                              {"target", target},
                              {"loss", l},
                              {"success", ok},
                              {"rounds", boost.rounds_used},
                              {"horizon", boost.params.T},
                              {"certified", boost.certified},
                              {"aborted", boost.aborted},
                              {"queries", rep.queries},
                              {"min_tolerance", rep.min_tolerance},
                              {"samples", rep.samples},
                              {"bits", rep.bits},
                              {"algorithm_bits", rep.algorithm_bits},
                              {"running_sum_bits", rep.running_sum_bits},
                              {"bit_bound", bound},
                              {"within_bit_bound", static_cast<double>(rep.bits) <= bound},
                              {"nontrivial", verdict.nontrivial}});
    }
    res.aggregates = aggregate_trials(res.trials);
    res.aggregates["gamma"] = gamma;
    res.aggregates["d"] = d;
    res.aggregates["epsilon"] = epsilon;
    res.passed = 3 * successes >= 2 * opts.trials;
    return res;
}

// ---------------------------------------------------------------------------
// Transfer to Q -> proper -> exact identification on a witness

enum class TransferMode { pac, sq };

struct Thm24Options {
    std::size_t trials = 1;
    TransferMode mode = TransferMode::pac;
    Constants constants;
    double q_oracle_fail = 0.01;
};

/// Enumeration sample size aimed at accuracy 1 - acc_loss for a class of
/// the given size.
inline std::uint64_t enumeration_samples(std::size_t class_size, double acc_loss) {
    const double c = static_cast<double>(std::max<std::size_t>(class_size, 2));
    return static_cast<std::uint64_t>(std::ceil(c * std::log(3.0 * c) / acc_loss));
}

/// Tolerance at which sq_best_member_learn is exact under P: a quarter of
/// the smallest gap 1 - <c, c'>_P over distinct members.
inline double best_member_tolerance(const ConceptClass& cls, const Distribution& P) {
    double gap = 2.0;
    for (Index i = 0; i < cls.size(); ++i)
        for (Index j = i + 1; j < cls.size(); ++j) {
            const double g = 1.0 - correlation(cls[i], cls[j], P);
            if (g > kCompareSlack) gap = std::min(gap, g);
        }
    return std::min(1.0, gap / 4.0);
}

inline ExperimentResult pipeline_thm2_thm4(const ConceptClass& cls, const Distribution& P, const Distribution& Q,
                                           double epsilon, std::uint64_t seed, const Thm24Options& opts = {}) {
    detail::check_lengths(cls.domain_size(), P.size(), "pipeline_thm2_thm4");
    detail::check_lengths(P.size(), Q.size(), "pipeline_thm2_thm4");
    require(epsilon > 0.0 && epsilon <= 1.0, ErrorKind::parameter, "epsilon must lie in (0,1]");
    require(is_mu_close(P, Q, 1.0 / epsilon), ErrorKind::precondition, "Q is not 1/epsilon-close to P");

    ExperimentResult res;
    res.id = opts.mode == TransferMode::pac ? "thm2" : "thm4";
    res.seed = seed;
    res.config = opts.constants.to_json();

    const SQWitness witness = sq_dim_auto(cls, Q, mix_seed(seed, 0xD1), SQDimOptions{opts.constants.exact_cap});
    const ConceptClass H = cls.subset(witness.members);
    const bool applicable = 0.5 - 0.5 / static_cast<double>(witness.dim) > kIdentifyRadius;
    const ConceptClass& proper_class = applicable ? H : cls;
    constexpr double kWeakLoss = 0.1;  // transferred learner: accuracy 0.9 under Q

    std::size_t successes = 0;
    for (std::size_t t = 0; t < opts.trials; ++t) {
        Rng pick(mix_seed(seed, 3 * t));
        const Index local = static_cast<Index>(pick.below(proper_class.size()));
        const Concept& target = proper_class[local];
        nlohmann::json row{{"trial", t}, {"witness_dim", witness.dim}, {"identification_applicable", applicable}};

        Concept transferred;
        if (opts.mode == TransferMode::pac) {
            const std::uint64_t m = enumeration_samples(cls.size(), kWeakLoss * epsilon);
            EnumerationLearner strong(cls, m);
            ExampleStream q_stream(Q, target, mix_seed(seed, 3 * t + 1));
            const RejectionRun run = pac_rejection_learn(strong, P, q_stream, epsilon, mix_seed(seed, 3 * t + 2));
            transferred = run.hypothesis;
            row["samples"] = run.consumed;
            row["accepted"] = run.accepted;
            row["bits"] = run.bits;
            row["min_acceptance"] = run.min_acceptance;
        } else {
            const double tau = best_member_tolerance(cls, P);
            SamplingOracle q_oracle(target, Q, opts.q_oracle_fail, mix_seed(seed, 3 * t + 1));
            const SQRejectionRun run = sq_rejection_learn(
                [&](CorrelationOracle& o) { return sq_best_member_learn(o, cls, tau); }, q_oracle, P, Q, epsilon);
            transferred = run.hypothesis;
            row["queries"] = run.q_queries;
            row["original_queries"] = run.original_queries;
            row["tolerance"] = run.q_tolerance;
        }
        row["transfer_loss_Q"] = loss(transferred, target, Q);

        const ProperifyResult proper =
            properify(transferred, proper_class, Q, kWeakLoss, mix_seed(seed, 3 * t + 2) ^ 0x5A, opts.constants.c_p);
        row["proper_success"] = proper.success;
        row["proper_draws"] = proper.unlabeled_draws;
        bool ok = false;
        if (proper.success) {
            row["proper_loss_Q"] = loss(proper.output, target, Q);
            if (applicable) {
                try {
                    const IdentifyResult id = exact_identify(proper.output, H, Q);
                    ok = id.output == target;
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::identification) throw;
                }
            } else {
                ok = loss(proper.output, target, Q) <= 3.0 * kWeakLoss + kCompareSlack;
            }
        }
        row["success"] = ok;
        successes += ok ? 1 : 0;
        res.trials.push_back(std::move(row));
    }
    res.aggregates = aggregate_trials(res.trials);
    res.aggregates["witness_dim"] = witness.dim;
    res.aggregates["identification_applicable"] = applicable;
    res.aggregates["closeness"] = closeness_ratio(P, Q);
    res.passed = 3 * successes >= 2 * opts.trials;
    return res;
}

}  // namespace bml
