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

#pragma once

#include <bml/core.hpp>
#include <bml/random.hpp>

#include <bit>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bml {

/// parity:n, sparse_parity:n:k, threshold:N or random:m:n:seed.
struct GenSpec {
    enum class Kind { parity, sparse_parity, threshold, random };

    Kind kind = Kind::threshold;
    std::size_t n = 0;  // bits (parities), points (threshold, random)
    std::size_t k = 0;  // sparse parity support
    std::size_t m = 0;  // random: concept count
    std::uint64_t seed = 0;

    static constexpr std::size_t kMaxParityBits = 14;

    static GenSpec parse(std::string_view text) {
        std::vector<std::string_view> parts;
        std::size_t start = 0;
        while (true) {
            const auto pos = text.find(':', start);
            parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
        auto num = [&](std::size_t i) -> std::uint64_t {
            require(i < parts.size(), ErrorKind::parameter, "generator spec '" + std::string(text) + "' is too short");
            std::uint64_t v = 0;
            const auto* b = parts[i].data();
            const auto* e = b + parts[i].size();
            const auto [ptr, ec] = std::from_chars(b, e, v);
            require(ec == std::errc() && ptr == e, ErrorKind::parameter,
                    "bad number '" + std::string(parts[i]) + "' in generator spec");
            return v;
        };
        GenSpec g;
        const std::string_view kind = parts.front();
        std::size_t expected = 0;
        if (kind == "parity") {
            g.kind = Kind::parity;
            g.n = num(1);
            expected = 2;
        } else if (kind == "sparse_parity") {
            g.kind = Kind::sparse_parity;
            g.n = num(1);
            g.k = num(2);
            expected = 3;
        } else if (kind == "threshold") {
            g.kind = Kind::threshold;
            g.n = num(1);
            expected = 2;
        } else if (kind == "random") {
            g.kind = Kind::random;
            g.m = num(1);
            g.n = num(2);
            g.seed = num(3);
            expected = 4;
        } else {
            fail(ErrorKind::parameter, "unknown generator kind '" + std::string(kind) + "'");
        }
        require(parts.size() == expected, ErrorKind::parameter, "wrong arity in generator spec '" + std::string(text) + "'");
        return g;
    }

    std::string to_string() const {
        switch (kind) {
            case Kind::parity: return "parity:" + std::to_string(n);
            case Kind::sparse_parity: return "sparse_parity:" + std::to_string(n) + ":" + std::to_string(k);
            case Kind::threshold: return "threshold:" + std::to_string(n);
            case Kind::random:
                return "random:" + std::to_string(m) + ":" + std::to_string(n) + ":" + std::to_string(seed);
        }
        return {};
    }
};

inline int parity_label(std::uint64_t c, std::uint64_t x) { return (std::popcount(c & x) % 2 == 0) ? 1 : -1; }

/// Characters chi_c(x) = (-1)^{<c,x> mod 2} for c in {0,1}^k x {0}^{n-k}.
inline ConceptClass make_parity(std::size_t n, std::size_t k) {
    require(n >= 1 && n <= GenSpec::kMaxParityBits, ErrorKind::parameter,
            "parity needs 1 <= n <= " + std::to_string(GenSpec::kMaxParityBits));
    require(k <= n, ErrorKind::parameter, "sparse parity needs k <= n");
    const std::size_t points = std::size_t{1} << n;
    std::vector<Concept> concepts;
    concepts.reserve(std::size_t{1} << k);
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << k); ++c) {
        std::vector<std::int8_t> labels(points);
        for (std::uint64_t x = 0; x < points; ++x) labels[x] = static_cast<std::int8_t>(parity_label(c, x));
        concepts.emplace_back(std::move(labels));
    }
    return ConceptClass(Domain(points), std::move(concepts));
}

/// N + 1 step functions on N ordered points; concept j is +1 exactly on
/// the last j points (j = 0 all -1, j = N all +1).
inline ConceptClass make_threshold(std::size_t points) {
    require(points >= 1, ErrorKind::parameter, "threshold class needs at least one point");
    std::vector<Concept> concepts;
    concepts.reserve(points + 1);
    for (std::size_t j = 0; j <= points; ++j) {
        std::vector<std::int8_t> labels(points);
        for (std::size_t x = 0; x < points; ++x) labels[x] = x + j >= points ? 1 : -1;
        concepts.emplace_back(std::move(labels));
    }
    return ConceptClass(Domain(points), std::move(concepts));
}

/// Independent seeded ±1 coin flips per cell.
inline ConceptClass make_random(std::size_t concepts_count, std::size_t points, std::uint64_t seed) {
    require(concepts_count >= 1 && points >= 1, ErrorKind::parameter, "random class needs m, n >= 1");
    Rng rng(seed);
    std::vector<Concept> concepts;
    concepts.reserve(concepts_count);
    for (std::size_t i = 0; i < concepts_count; ++i) {
        std::vector<std::int8_t> labels(points);
        for (auto& v : labels) v = rng.bernoulli(0.5) ? 1 : -1;
        concepts.emplace_back(std::move(labels));
    }
    return ConceptClass(Domain(points), std::move(concepts));
}

struct Generated {
    ConceptClass cls;
    Distribution P;
};

/// Deterministic construction; the distribution is always uniform.
inline Generated generate(const GenSpec& spec) {
    switch (spec.kind) {
        case GenSpec::Kind::parity: {
            auto cls = make_parity(spec.n, spec.n);
            auto P = Distribution::uniform(cls.domain_size());
            return {std::move(cls), std::move(P)};
        }
        case GenSpec::Kind::sparse_parity: {
            auto cls = make_parity(spec.n, spec.k);
            auto P = Distribution::uniform(cls.domain_size());
            return {std::move(cls), std::move(P)};
        }
        case GenSpec::Kind::threshold: {
            auto cls = make_threshold(spec.n);
            return {cls, Distribution::uniform(spec.n)};
        }
        case GenSpec::Kind::random: {
            auto cls = make_random(spec.m, spec.n, spec.seed);
            return {cls, Distribution::uniform(spec.n)};
        }
    }
    fail(ErrorKind::parameter, "unhandled generator kind");
}

inline Generated generate(std::string_view spec) { return generate(GenSpec::parse(spec)); }

/// Seeded ratio perturbation of P inside the mu-ball: ratios drawn in
/// [mu^{-1/2}, mu^{1/2}] so the normalized result is mu-close to P.
inline Distribution perturb_within_ball(const Distribution& P, double mu, std::uint64_t seed) {
    require(mu >= 1.0, ErrorKind::parameter, "mu must be >= 1");
    Rng rng(seed);
    const double half = std::log(mu) / 2.0;
    std::vector<double> w(P.probs().begin(), P.probs().end());
    for (auto& v : w) v *= std::exp((2.0 * rng.uniform() - 1.0) * half);
    return Distribution::from_weights(w);
}

}  // namespace bml
