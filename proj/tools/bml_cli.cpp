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

// Command-line front end. Exit codes: 0 pass, 1 failed run, 2 usage error.

#include <bml/bml.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct Global {
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "json";
    std::string config;
};

bml::Constants constants(const Global& g) {
    return bml::Constants::resolve(g.config.empty() ? std::nullopt : std::optional<std::string>(g.config));
}

std::string csv_cell(const json& v) {
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\n") != std::string::npos) {
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    }
    return s;
}

/// Rows as CSV: union of keys in first-seen order.
std::string rows_to_csv(const std::vector<json>& rows) {
    std::vector<std::string> cols;
    for (const auto& r : rows)
        for (const auto& [k, v] : r.items())
            if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
    std::ostringstream out;
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) out << ',';
            if (r.contains(cols[i])) out << csv_cell(r.at(cols[i]));
        }
        out << '\n';
    }
    return out.str();
}

/// Writes `doc` as JSON, or its rows (or the document itself) as CSV.
void emit(const Global& g, const json& doc, const std::vector<json>& rows = {}) {
    std::string text;
    if (g.format == "csv") {
        text = rows_to_csv(rows.empty() ? std::vector<json>{doc} : rows);
    } else {
        text = doc.dump(2) + "\n";
    }
    if (g.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(g.out);
    bml::require(f.good(), bml::ErrorKind::io, "cannot write '" + g.out + "'");
    f << text;
}

std::vector<int> labels_json(const bml::Concept& c) { return {c.labels().begin(), c.labels().end()}; }

bml::LoadedClass load_with_dist(const std::string& cls_spec, const std::string& dist_spec, bml::Distribution& P) {
    bml::LoadedClass lc = bml::load_class(cls_spec);
    if (dist_spec.empty())
        P = lc.P ? *lc.P : bml::Distribution::uniform(lc.cls.domain_size());
    else
        P = bml::load_distribution(dist_spec, lc.cls.domain_size(), lc.P);
    return lc;
}

/// "+-+-", "1,-1,1" or a file holding either.
bml::Concept parse_hypothesis(const std::string& text, std::size_t n) {
    std::string src = text;
    if (std::filesystem::exists(text)) {
        std::ifstream in(text);
        std::ostringstream ss;
        ss << in.rdbuf();
        src = ss.str();
    }
    std::vector<std::int8_t> v;
    if (src.find_first_of("0123456789") == std::string::npos) {
        for (char ch : src)
            if (ch == '+' || ch == '-') v.push_back(ch == '+' ? 1 : -1);
    } else {
        std::string norm = src;
        std::replace(norm.begin(), norm.end(), ',', ' ');
        std::istringstream in(norm);
        for (long x; in >> x;) {
            bml::require(x == 1 || x == -1, bml::ErrorKind::parameter, "hypothesis labels must be +1 or -1");
            v.push_back(static_cast<std::int8_t>(x));
        }
    }
    bml::require(v.size() == n, bml::ErrorKind::dimension_mismatch,
                 "hypothesis has " + std::to_string(v.size()) + " labels, domain has " + std::to_string(n));
    return bml::Concept(std::move(v));
}

/// The target with `flips` distinct random points negated.
bml::Concept corrupt(const bml::Concept& target, std::size_t flips, std::uint64_t seed) {
    std::vector<std::int8_t> v(target.labels().begin(), target.labels().end());
    bml::require(flips <= v.size(), bml::ErrorKind::parameter, "more flips than domain points");
    std::vector<bml::Index> idx(v.size());
    std::iota(idx.begin(), idx.end(), bml::Index{0});
    bml::Rng rng(seed);
    for (std::size_t i = 0; i < flips; ++i) {
        std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
        v[idx[i]] = static_cast<std::int8_t>(-v[idx[i]]);
    }
    return bml::Concept(std::move(v));
}

bml::Index pick_target(std::optional<std::size_t> given, std::size_t size, std::uint64_t seed) {
    if (given) {
        bml::require(*given < size, bml::ErrorKind::parameter, "target index out of range");
        return *given;
    }
    return static_cast<bml::Index>(bml::Rng(seed).below(size));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bml: bounded-memory and statistical-query learning experiments"};
    app.require_subcommand(1);
    Global g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--out", g.out, "Output file (bench: output directory)");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    app.add_option("--config", g.config, "Constants JSON (overrides BML_CONFIG)");

    std::function<int()> action;

    // sqdim ------------------------------------------------------------------
    std::string cls_spec, dist_spec, mode = "auto";
    std::optional<double> mu;
    std::size_t restarts = 20;
    auto* sqdim = app.add_subcommand("sqdim", "SQ dimension of a class under a distribution");
    sqdim->add_option("--class", cls_spec, "Class file or generator spec")->required();
    sqdim->add_option("--dist", dist_spec, "Distribution: uniform, perturb:<mu>:<seed> or a file");
    sqdim->add_option("--mode", mode, "exact, greedy or auto")->check(CLI::IsMember({"exact", "greedy", "auto"}));
    sqdim->add_option("--mu", mu, "Also search the mu-ball around the distribution");
    sqdim->add_option("--restarts", restarts, "Ball-search restarts");

    auto ball_json = [&](const bml::ConceptClass& cls, const bml::Distribution& P, double m) {
        bml::BallSearchOptions bo;
        bo.restarts = restarts;
        bo.dim.exact_cap = constants(g).exact_cap;
        const bml::BallEstimate est = bml::ball_max_sqdim(cls, P, m, g.seed, bo);
        return json{{"dim", est.dim_at_best_Q},
                    {"witness", est.witness.members},
                    {"mode", "ball"},
                    {"mu", m},
                    {"best_Q", est.best_Q.probs()},
                    {"best_by_restart", est.best_by_restart}};
    };

    sqdim->callback([&] {
        action = [&] {
            bml::Distribution P = bml::Distribution::uniform(1);
            const auto lc = load_with_dist(cls_spec, dist_spec, P);
            json doc;
            if (mu) {
                doc = ball_json(lc.cls, P, *mu);
            } else {
                bml::SQDimOptions so{constants(g).exact_cap};
                const bml::SQWitness w = mode == "exact"    ? bml::sq_dim_exact(lc.cls, P, so)
                                         : mode == "greedy" ? bml::sq_dim_greedy(lc.cls, P, g.seed)
                                                            : bml::sq_dim_auto(lc.cls, P, g.seed, so);
                doc = {{"dim", w.dim}, {"witness", w.members}, {"mode", mode},
                       {"verified", bml::verify_witness(lc.cls, P, w)}};
            }
            emit(g, doc);
            return kPass;
        };
    });

    // ball -------------------------------------------------------------------
    double ball_mu = 2.0;
    auto* ball = app.add_subcommand("ball", "Heuristic largest SQ dimension over a mu-ball");
    ball->add_option("--class", cls_spec, "Class file or generator spec")->required();
    ball->add_option("--dist", dist_spec, "Centre distribution");
    ball->add_option("--mu", ball_mu, "Ball radius (ratio bound)")->required();
    ball->add_option("--restarts", restarts, "Restarts");
    ball->callback([&] {
        action = [&] {
            bml::Distribution P = bml::Distribution::uniform(1);
            const auto lc = load_with_dist(cls_spec, dist_spec, P);
            emit(g, ball_json(lc.cls, P, ball_mu));
            return kPass;
        };
    });

    // boost / sqboost --------------------------------------------------------
    double eps = 0.1;
    std::string gamma_text = "auto";
    std::size_t trials = 1;
    std::optional<std::size_t> d_opt;
    std::string oracle_kind = "exact";
    double fail_prob = 0.01;
    bool literal = false;

    auto* boost = app.add_subcommand("boost", "Sample-based boost-by-majority");
    boost->add_option("--class", cls_spec, "Class file or generator spec")->required();
    boost->add_option("--dist", dist_spec, "Distribution");
    boost->add_option("--eps", eps, "Target loss")->required();
    boost->add_option("--gamma", gamma_text, "Weak advantage, or auto for 1/(24 d)");
    boost->add_option("--d", d_opt, "SQ dimension (default: computed)");
    boost->add_option("--trials", trials, "Independent trials");
    boost->add_flag("--literal", literal, "Flip one acceptance coin per streamed example");

    auto dimension = [&](const bml::ConceptClass& cls, const bml::Distribution& P) {
        return d_opt ? *d_opt : bml::sq_dim_auto(cls, P, g.seed, bml::SQDimOptions{constants(g).exact_cap}).dim;
    };

    boost->callback([&] {
        action = [&] {
            bml::Distribution P = bml::Distribution::uniform(1);
            const auto lc = load_with_dist(cls_spec, dist_spec, P);
            const bml::Constants k = constants(g);
            const std::size_t d = dimension(lc.cls, P);
            const double gamma = gamma_text == "auto" ? 1.0 / (24.0 * static_cast<double>(d)) : std::stod(gamma_text);
            const bml::BoostParams params = bml::BoostParams::make(gamma, eps, k.c_T, k.c_abort);
            const bml::SampleWeakLearner weak = bml::make_sample_weak_learner(lc.cls, 4 * d);
            std::vector<json> rows;
            std::size_t ok = 0;
            for (std::size_t t = 0; t < trials; ++t) {
                const bml::Index target = pick_target(std::nullopt, lc.cls.size(), bml::mix_seed(g.seed, 3 * t));
                bml::ExampleStream stream(P, lc.cls[target], bml::mix_seed(g.seed, 3 * t + 1));
                bml::BoostOptions bo;
                bo.class_size = lc.cls.size();
                bo.fast_forward_rejections = !literal;
                const bml::BoostResult r = bml::bbm_boost(stream, weak, params, bml::mix_seed(g.seed, 3 * t + 2), bo);
                const double L = bml::loss(r.majority.to_concept(P.size()), lc.cls[target], P);
                ok += L <= eps ? 1 : 0;
                rows.push_back({{"trial", t},
                                {"target", target},
                                {"rounds_used", r.rounds_used},
                                {"samples_consumed", r.samples_consumed},
                                {"queries_consumed", r.queries_consumed},
                                {"min_tolerance", 1.0 / (3.0 * static_cast<double>(4 * d))},
                                {"bits_counted", r.bits_counted},
                                {"final_loss", L},
                                {"aborted", r.aborted}});
            }
            const bool passed = 3 * ok >= 2 * trials;
            emit(g,
                 {{"command", "boost"}, {"class", cls_spec}, {"epsilon", eps}, {"gamma", gamma}, {"horizon", params.T},
                  {"d", d}, {"success_rate", static_cast<double>(ok) / static_cast<double>(trials)},
                  {"passed", passed}, {"trials", rows}},
                 rows);
            return passed ? kPass : kFail;
        };
    });

    auto* sqboost = app.add_subcommand("sqboost", "Boost-by-majority from statistical queries");
    sqboost->add_option("--class", cls_spec, "Class file or generator spec")->required();
    sqboost->add_option("--dist", dist_spec, "Distribution");
    sqboost->add_option("--eps", eps, "Target loss")->required();
    sqboost->add_option("--d", d_opt, "SQ dimension (default: computed)");
    sqboost->add_option("--oracle", oracle_kind, "exact or sampling")->check(CLI::IsMember({"exact", "sampling"}));
    sqboost->add_option("--fail-prob", fail_prob, "Per-query failure probability of the sampling oracle");
    sqboost->add_option("--trials", trials, "Independent trials");
    sqboost->callback([&] {
        action = [&] {
            bml::Distribution P = bml::Distribution::uniform(1);
            const auto lc = load_with_dist(cls_spec, dist_spec, P);
            const bml::Constants k = constants(g);
            const std::size_t d = dimension(lc.cls, P);
            std::vector<json> rows;
            std::size_t ok = 0;
            for (std::size_t t = 0; t < trials; ++t) {
                const bml::Index target = pick_target(std::nullopt, lc.cls.size(), bml::mix_seed(g.seed, 2 * t));
                std::unique_ptr<bml::CorrelationOracle> base;
                if (oracle_kind == "exact")
                    base = std::make_unique<bml::ExactOracle>(lc.cls[target], P);
                else
                    base = std::make_unique<bml::SamplingOracle>(lc.cls[target], P, fail_prob,
                                                                 bml::mix_seed(g.seed, 2 * t + 1));
                bml::SQBoostOptions so;
                so.c_T = k.c_T;
                so.c_sim = k.c_sim;
                const bml::SQBoostResult r = bml::sq_bbm_boost(*base, lc.cls, P, d, eps, so);
                const double L = bml::loss(r.majority.to_concept(P.size()), lc.cls[target], P);
                ok += L <= eps ? 1 : 0;
                rows.push_back({{"trial", t},
                                {"target", target},
                                {"rounds_used", r.rounds_used},
                                {"samples_consumed", base->account().sample_budget_spent},
                                {"queries_consumed", r.base_queries},
                                {"min_tolerance", r.min_tolerance},
                                {"bits_counted", r.state_bits},
                                {"final_loss", L},
                                {"aborted", r.aborted},
                                {"certified", r.certified}});
            }
            const bool passed = 3 * ok >= 2 * trials;
            emit(g,
                 {{"command", "sqboost"}, {"class", cls_spec}, {"epsilon", eps}, {"d", d}, {"oracle", oracle_kind},
                  {"success_rate", static_cast<double>(ok) / static_cast<double>(trials)}, {"passed", passed},
                  {"trials", rows}},
                 rows);
            return passed ? kPass : kFail;
        };
    });

    // reduce -----------------------------------------------------------------
    auto* reduce = app.add_subcommand("reduce", "Distribution-transfer and properness reductions");
    reduce->require_subcommand(1);
    std::string p_spec = "uniform", q_spec;
    std::optional<std::size_t> target_opt;
    std::string hypothesis_text, witness_path;
    std::size_t flips = 1;

    auto reduce_doc = [](const bml::Concept& h, double work, double tol, std::size_t bits, bool success) {
        return json{{"output_hypothesis", labels_json(h)},
                    {"samples_or_queries", work},
                    {"tolerance", tol},
                    {"bits", bits},
                    {"success", success}};
    };

    auto* rpac = reduce->add_subcommand("pac", "Run an enumeration learner for P on a Q-labeled stream");
    rpac->add_option("--strong", cls_spec, "Class learned by the strong (enumeration) learner")->required();
    rpac->add_option("--P", p_spec, "Training distribution P");
    rpac->add_option("--Q", q_spec, "Deployment distribution Q")->required();
    rpac->add_option("--eps", eps, "Closeness parameter; Q must be 1/eps-close to P")->required();
    rpac->add_option("--target", target_opt, "Target index (default: random)");
    rpac->callback([&] {
        action = [&] {
            bml::Distribution P = bml::Distribution::uniform(1);
            const auto lc = load_with_dist(cls_spec, p_spec, P);
            const bml::Distribution Q = bml::load_distribution(q_spec, P.size(), P);
            const bml::Index target = pick_target(target_opt, lc.cls.size(), g.seed);
            bml::EnumerationLearner strong(lc.cls, bml::enumeration_samples(lc.cls.size(), 0.1 * eps));
            bml::ExampleStream qs(Q, lc.cls[target], bml::mix_seed(g.seed, 1));
            const bml::RejectionRun run = bml::pac_rejection_learn(strong, P, qs, eps, bml::mix_seed(g.seed, 2));
            const double lq = bml::loss(run.hypothesis, lc.cls[target], Q);
            json doc = reduce_doc(run.hypothesis, static_cast<double>(run.consumed), 0.0, run.bits, lq <= 0.1);
            doc["accepted"] = run.accepted;
            doc["loss_Q"] = lq;
            doc["loss_P"] = bml::loss(run.hypothesis, lc.cls[target], P);
            doc["target"] = target;
            emit(g, doc);
            return lq <= 0.1 ? kPass : kFail;
        };
    });

    auto* rsq = reduce->add_subcommand("sq", "Answer a P-learner's queries from a Q-oracle");
    rsq->add_option("--class", cls_spec, "Class")->required();
    rsq->add_option("--P", p_spec, "Training distribution P");
    rsq->add_option("--Q", q_spec, "Oracle distribution Q")->required();
    rsq->add_option("--eps", eps, "Closeness parameter")->required();
    rsq->add_option("--target", target_opt, "Target index (default: random)");
    rsq->add_option("--oracle", oracle_kind, "exact or sampling")->check(CLI::IsMember({"exact", "sampling"}));
    rsq->add_option("--fail-prob", fail_prob, "Per-query failure probability of the sampling oracle");
    rsq->callback([&] {
        action = [&] {
            bml::Distribution P = bml::Distribution::uniform(1);
            const auto lc = load_with_dist(cls_spec, p_spec, P);
            const bml::Distribution Q = bml::load_distribution(q_spec, P.size(), P);
            const bml::Index target = pick_target(target_opt, lc.cls.size(), g.seed);
            std::unique_ptr<bml::CorrelationOracle> q_oracle;
            if (oracle_kind == "exact")
                q_oracle = std::make_unique<bml::ExactOracle>(lc.cls[target], Q);
            else
                q_oracle = std::make_unique<bml::SamplingOracle>(lc.cls[target], Q, fail_prob, bml::mix_seed(g.seed, 1));
            const double tau = bml::best_member_tolerance(lc.cls, P);
            const bml::SQRejectionRun run = bml::sq_rejection_learn(
                [&](bml::CorrelationOracle& o) { return bml::sq_best_member_learn(o, lc.cls, tau); }, *q_oracle, P, Q,
                eps);
            const bool success = run.hypothesis == lc.cls[target];
            json doc = reduce_doc(run.hypothesis, static_cast<double>(run.q_queries), run.q_tolerance, 0, success);
            doc["original_queries"] = run.original_queries;
            doc["original_tolerance"] = tau;
            doc["target"] = target;
            emit(g, doc);
            return success ? kPass : kFail;
        };
    });

    auto* rprop = reduce->add_subcommand("properify", "Replace a hypothesis by an agreeing class member");
    rprop->add_option("--class", cls_spec, "Class")->required();
    rprop->add_option("--dist", dist_spec, "Distribution");
    rprop->add_option("--eps", eps, "Loss of the improper hypothesis")->required();
    rprop->add_option("--hypothesis", hypothesis_text, "Labels (+-+- or 1,-1,...) or a file");
    rprop->add_option("--target", target_opt, "Target index when no hypothesis is given");
    rprop->add_option("--flips", flips, "Points of the target to negate when no hypothesis is given");
    rprop->callback([&] {
        action = [&] {
            bml::Distribution P = bml::Distribution::uniform(1);
            const auto lc = load_with_dist(cls_spec, dist_spec, P);
            const bml::Index target = pick_target(target_opt, lc.cls.size(), g.seed);
            const bml::Concept h = hypothesis_text.empty() ? corrupt(lc.cls[target], flips, bml::mix_seed(g.seed, 1))
                                                           : parse_hypothesis(hypothesis_text, P.size());
            const bml::ProperifyResult r = bml::properify(h, lc.cls, P, eps, bml::mix_seed(g.seed, 2), constants(g).c_p);
            json doc = reduce_doc(r.success ? r.output : h, static_cast<double>(r.unlabeled_draws), 0.0, r.extra_bits,
                                  r.success);
            doc["index"] = r.index ? json(*r.index) : json(nullptr);
            doc["candidates_tested"] = r.candidates_tested;
            if (hypothesis_text.empty()) {
                doc["target"] = target;
                doc["loss"] = r.success ? bml::loss(r.output, lc.cls[target], P) : 1.0;
            }
            emit(g, doc);
            return r.success ? kPass : kFail;
        };
    });

    auto* rid = reduce->add_subcommand("identify", "Recover a witness member from a nearby hypothesis");
    rid->add_option("--witness", witness_path, "Witness class file (with probs for Q)")->required();
    rid->add_option("--hypothesis", hypothesis_text, "Labels or a file (default: a corrupted member)");
    rid->add_option("--target", target_opt, "Member to corrupt when no hypothesis is given");
    rid->add_option("--flips", flips, "Points to negate when no hypothesis is given");
    rid->callback([&] {
        action = [&] {
            const bml::LoadedClass lc = bml::load_class(witness_path);
            const bml::Distribution Q = lc.P ? *lc.P : bml::Distribution::uniform(lc.cls.domain_size());
            const bml::Index target = pick_target(target_opt, lc.cls.size(), g.seed);
            const bml::Concept h = hypothesis_text.empty() ? corrupt(lc.cls[target], flips, bml::mix_seed(g.seed, 1))
                                                           : parse_hypothesis(hypothesis_text, Q.size());
            const bml::IdentifyResult r = bml::exact_identify(h, lc.cls, Q);
            json doc = reduce_doc(r.output, 0.0, 0.0, bml::bits_for(lc.cls.size()), true);
            doc["member"] = r.member;
            doc["distance"] = r.distance;
            if (hypothesis_text.empty()) {
                doc["target"] = target;
                doc["success"] = r.member == target;
            }
            emit(g, doc);
            return doc["success"].get<bool>() ? kPass : kFail;
        };
    });

    // stream -----------------------------------------------------------------
    std::string learner_kind = "enumeration", trace_path;
    std::uint64_t m = 1000;
    auto* stream = app.add_subcommand("stream", "Run a bounded-memory learner on an example stream");
    stream->add_option("--class", cls_spec, "Class")->required();
    stream->add_option("--dist", dist_spec, "Distribution");
    stream->add_option("--learner", learner_kind, "enumeration, threshold, fixed or bbm")
        ->check(CLI::IsMember({"enumeration", "threshold", "fixed", "bbm"}));
    stream->add_option("--m", m, "Examples to stream");
    stream->add_option("--eps", eps, "Success loss (bbm: boosting target)");
    stream->add_option("--target", target_opt, "Target index (default: random)");
    stream->add_option("--trace", trace_path, "Write one JSON line per step to this file");
    stream->callback([&] {
        action = [&] {
            bml::Distribution P = bml::Distribution::uniform(1);
            const auto lc = load_with_dist(cls_spec, dist_spec, P);
            const bml::Index target = pick_target(target_opt, lc.cls.size(), g.seed);
            std::unique_ptr<bml::StreamingLearner> learner;
            if (learner_kind == "enumeration") {
                learner = std::make_unique<bml::EnumerationLearner>(lc.cls, m);
            } else if (learner_kind == "threshold") {
                learner = std::make_unique<bml::ThresholdLearner>(lc.cls.domain_size(), m);
            } else if (learner_kind == "fixed") {
                learner = std::make_unique<bml::FixedOutputLearner>(lc.cls[0], m);
            } else {
                const bml::Constants k = constants(g);
                const std::size_t d = dimension(lc.cls, P);
                const auto params = bml::BoostParams::make(1.0 / (24.0 * static_cast<double>(d)), eps, k.c_T, k.c_abort);
                learner = std::make_unique<bml::BbmStreamingLearner>(lc.cls, params, 4 * d, bml::mix_seed(g.seed, 3), m);
            }
            std::ofstream trace;
            bml::RunOptions ro;
            ro.success_loss = eps;
            if (!trace_path.empty()) {
                trace.open(trace_path);
                bml::require(trace.good(), bml::ErrorKind::io, "cannot write '" + trace_path + "'");
                ro.trace_sink = &trace;
            }
            const bml::RunTrace tr = bml::run_stream(*learner, P, lc.cls[target], m, bml::mix_seed(g.seed, 4), ro);
            json doc = tr.summary();
            doc["target"] = target;
            doc["output"] = labels_json(tr.output);
            doc["triviality"] = bml::triviality_check(static_cast<double>(tr.samples_consumed),
                                                      static_cast<double>(tr.bits_declared), lc.cls.size(),
                                                      lc.cls.domain_size(), std::min(eps, 0.999))
                                    .to_json();
            emit(g, doc);
            return tr.success ? kPass : kFail;
        };
    });

    // bench ------------------------------------------------------------------
    std::string suite = "smoke";
    std::vector<int> only;
    auto* bench = app.add_subcommand("bench", "Run a registered suite");
    bench->add_option("--suite", suite, "acceptance, smoke or calibration")
        ->check(CLI::IsMember({"acceptance", "smoke", "calibration"}))
        ->required();
    bench->add_option("--only", only, "Restrict acceptance to these criterion ids");
    bench->callback([&] {
        action = [&] {
            bml::SuiteOptions so;
            so.constants = constants(g);
            so.seed = g.seed;
            so.only = only;
            so.progress = &std::cerr;
            if (!g.out.empty()) so.out_dir = g.out;
            const bml::SuiteReport rep = bml::run_suite(suite, so);
            if (g.format == "csv") {
                std::vector<json> rows;
                for (const auto& c : rep.criteria)
                    rows.push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"seconds", c.seconds},
                                    {"detail", c.detail}});
                std::cout << rows_to_csv(rows);
            } else {
                std::cout << rep.to_json().dump(2) << '\n';
            }
            return rep.passed ? kPass : kFail;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    try {
        return action ? action() : kUsage;
    } catch (const bml::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
            case bml::ErrorKind::parameter:
            case bml::ErrorKind::io:
            case bml::ErrorKind::dimension_mismatch:
            case bml::ErrorKind::precondition:
                return kUsage;
            default:
                return kFail;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
}
