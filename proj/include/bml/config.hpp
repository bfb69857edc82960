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

// Tunable constants. The defaults below mirror config/constants.json; a
// file given with --config or through BML_CONFIG overrides them.

#pragma once

#include <bml/error.hpp>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>

namespace bml {

struct Constants {
    /// Round distributions satisfy P_t(x) <= c0 / eps^3 * P(x).
    double c0 = 0.125;
    /// Stream-simulated SQ runs keep at most kappa log2|C| log2(q/tau) bits.
    double kappa = 16.0;
    /// Abort window: ceil(c_abort eps^-3 ln(T + 1)) consecutive rejections.
    double c_abort = 3.0;
    /// Horizon: T = c_T ceil(gamma^-2 ln(1/eps)).
    double c_T = 2.0;
    /// SQ simulation tolerance divisor.
    double c_sim = 4.0;
    /// Properify test size: ceil(c_p ln|C| / eps^2).
    double c_p = 8.0;
    /// Largest class handled by exact SQ dimension.
    std::size_t exact_cap = 24;

    std::string source = "built-in";

    nlohmann::json to_json() const {
        return {{"c0", c0},   {"kappa", kappa}, {"c_abort", c_abort},     {"c_T", c_T},
                {"c_sim", c_sim}, {"c_p", c_p}, {"exact_cap", exact_cap}, {"source", source}};
    }

    static Constants from_json(const nlohmann::json& j, std::string source = "json") {
        Constants c;
        auto get = [&](const char* key, auto& field) {
            if (!j.contains(key)) return;
            try {
                j.at(key).get_to(field);
            } catch (const nlohmann::json::exception& e) {
                fail(ErrorKind::io, std::string("config key '") + key + "': " + e.what());
            }
        };
        get("c0", c.c0);
        get("kappa", c.kappa);
        get("c_abort", c.c_abort);
        get("c_T", c.c_T);
        get("c_sim", c.c_sim);
        get("c_p", c.c_p);
        get("exact_cap", c.exact_cap);
        require(c.c0 > 0 && c.kappa > 0 && c.c_abort > 0 && c.c_T > 0 && c.c_sim > 0 && c.c_p > 0,
                ErrorKind::parameter, "config constants must be positive");
        c.source = std::move(source);
        return c;
    }

    static Constants load(const std::string& path) {
        std::ifstream in(path);
        require(in.good(), ErrorKind::io, "cannot open config file '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::io, "config file '" + path + "': " + e.what());
        }
        return from_json(j, path);
    }

    /// Explicit path first, then BML_CONFIG, then the built-in defaults.
    static Constants resolve(const std::optional<std::string>& path = std::nullopt) {
        if (path && !path->empty()) return load(*path);
        if (const char* env = std::getenv("BML_CONFIG"); env != nullptr && *env != '\0') return load(env);
        return Constants{};
    }
};

}  // namespace bml
