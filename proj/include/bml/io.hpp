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

// Reading and writing classes and distributions.
//
// Text class format:
//
//     n m [binary]
//     p_0 p_1 ... p_{n-1}        (optional line)
//     one line of n labels per concept
//
// Labels are +1/-1, or 0/1 when the header carries the word "binary"
// (0 maps to -1). JSON form: {"domain_size", "probs"?, "concepts",
// "binary"?}. Without probabilities the distribution is uniform.

#pragma once

#include <bml/core.hpp>
#include <bml/generators.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace bml {

struct LoadedClass {
    ConceptClass cls;
    std::optional<Distribution> P;
};

namespace detail {

inline std::int8_t parse_label(long v, bool binary) {
    if (binary) {
        require(v == 0 || v == 1, ErrorKind::io, "binary labels must be 0 or 1");
        return v == 1 ? 1 : -1;
    }
    require(v == 1 || v == -1, ErrorKind::io, "labels must be +1 or -1");
    return static_cast<std::int8_t>(v);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline bool looks_like_json(const std::string& text) {
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) return ch == '{' || ch == '[';
    return false;
}

}  // namespace detail

inline LoadedClass parse_class_json(const nlohmann::json& j) {
    try {
        const bool binary = j.value("binary", false);
        const auto concepts = j.at("concepts");
        require(concepts.is_array() && !concepts.empty(), ErrorKind::io, "'concepts' must be a non-empty array");
        const std::size_t n = j.contains("domain_size") ? j.at("domain_size").get<std::size_t>() : concepts[0].size();
        std::vector<Concept> cs;
        for (const auto& row : concepts) {
            require(row.size() == n, ErrorKind::io, "concept row length differs from domain_size");
            std::vector<std::int8_t> labels;
            for (const auto& v : row) labels.push_back(detail::parse_label(v.get<long>(), binary));
            cs.emplace_back(std::move(labels));
        }
        LoadedClass out{ConceptClass(Domain(n), std::move(cs)), std::nullopt};
        if (j.contains("probs")) out.P = Distribution(j.at("probs").get<std::vector<double>>());
        if (out.P) detail::check_lengths(out.P->size(), n, "class file distribution");
        return out;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::io, std::string("malformed class JSON: ") + e.what());
    }
}

inline LoadedClass parse_class_text(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
    }
    require(!lines.empty(), ErrorKind::io, "empty class file");
    std::istringstream header(lines[0]);
    std::size_t n = 0;
    std::size_t m = 0;
    std::string flag;
    require(static_cast<bool>(header >> n >> m), ErrorKind::io, "class header must be 'n m [binary]'");
    header >> flag;
    require(flag.empty() || flag == "binary", ErrorKind::io, "unknown header flag '" + flag + "'");
    const bool binary = flag == "binary";
    require(lines.size() == m + 1 || lines.size() == m + 2, ErrorKind::io,
            "expected " + std::to_string(m) + " concept lines (plus an optional distribution line)");

    LoadedClass out{ConceptClass(std::vector<Concept>{Concept::constant(1, 1)}), std::nullopt};
    std::size_t first = 1;
    if (lines.size() == m + 2) {
        std::istringstream pl(lines[1]);
        std::vector<double> probs;
        for (double p; pl >> p;) probs.push_back(p);
        require(probs.size() == n, ErrorKind::io, "distribution line needs " + std::to_string(n) + " entries");
        out.P = Distribution(std::move(probs));
        first = 2;
    }
    std::vector<Concept> cs;
    for (std::size_t i = first; i < lines.size(); ++i) {
        std::istringstream cl(lines[i]);
        std::vector<std::int8_t> labels;
        for (long v; cl >> v;) labels.push_back(detail::parse_label(v, binary));
        require(labels.size() == n, ErrorKind::io, "concept line " + std::to_string(i - first) + " has wrong length");
        cs.emplace_back(std::move(labels));
    }
    out.cls = ConceptClass(Domain(n), std::move(cs));
    return out;
}

inline LoadedClass load_class_file(const std::string& path) {
    const std::string text = detail::read_file(path);
    if (detail::looks_like_json(text)) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::io, "'" + path + "': " + e.what());
        }
        return parse_class_json(j);
    }
    return parse_class_text(text);
}

/// A path to an existing file, or a generator spec such as threshold:16.
inline LoadedClass load_class(const std::string& spec_or_path) {
    if (std::filesystem::exists(spec_or_path)) return load_class_file(spec_or_path);
    Generated g = generate(spec_or_path);
    return LoadedClass{std::move(g.cls), std::move(g.P)};
}

/// "uniform", a file holding n probabilities (text or a JSON array or
/// {"probs": [...]}), or a perturbation "perturb:<mu>:<seed>" of `base`.
inline Distribution load_distribution(const std::string& spec, std::size_t n,
                                      const std::optional<Distribution>& base = std::nullopt) {
    if (spec == "uniform") return Distribution::uniform(n);
    if (spec.rfind("perturb:", 0) == 0) {
        const auto second = spec.find(':', 8);
        require(second != std::string::npos, ErrorKind::parameter, "expected perturb:<mu>:<seed>");
        const double mu = std::stod(spec.substr(8, second - 8));
        const std::uint64_t seed = std::stoull(spec.substr(second + 1));
        return perturb_within_ball(base ? *base : Distribution::uniform(n), mu, seed);
    }
    const std::string text = detail::read_file(spec);
    std::vector<double> probs;
    if (detail::looks_like_json(text)) {
        try {
            const auto j = nlohmann::json::parse(text);
            probs = (j.is_object() ? j.at("probs") : j).get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::io, "'" + spec + "': " + e.what());
        }
    } else {
        std::istringstream in(text);
        for (double p; in >> p;) probs.push_back(p);
    }
    require(probs.size() == n, ErrorKind::dimension_mismatch,
            "distribution has " + std::to_string(probs.size()) + " entries, domain has " + std::to_string(n));
    return Distribution(std::move(probs));
}

inline nlohmann::json class_to_json(const ConceptClass& cls, const std::optional<Distribution>& P = std::nullopt) {
    nlohmann::json j;
    j["domain_size"] = cls.domain_size();
    auto rows = nlohmann::json::array();
    for (const auto& c : cls) rows.push_back(std::vector<int>(c.labels().begin(), c.labels().end()));
    j["concepts"] = rows;
    if (P) j["probs"] = std::vector<double>(P->probs().begin(), P->probs().end());
    return j;
}

}  // namespace bml
