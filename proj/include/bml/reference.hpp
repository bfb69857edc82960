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

// Slow, direct re-implementations used to cross-check the library. Nothing
// here calls into the code it checks: sums are taken in long double,
// binomial terms come from an explicit log-factorial table and SQ
// dimensions from subset enumeration.

#pragma once

#include <bml/core.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

namespace bml::reference {

inline long double correlation(const Concept& h, const Concept& c, const Distribution& P) {
    long double s = 0.0L;
    for (Index x = 0; x < P.size(); ++x) s += static_cast<long double>(P[x]) * (h[x] == c[x] ? 1.0L : -1.0L);
    return s;
}

/// Brute-force maximum d such that some d-subset is pairwise |corr| <= 1/d.
inline std::size_t sq_dim(const std::vector<Concept>& cls, const Distribution& P) {
    const std::size_t n = cls.size();
    std::vector<long double> c(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] = reference::correlation(cls[i], cls[j], P);
    std::size_t best = 1;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < n; ++i)
            if ((mask >> i) & 1u) s.push_back(i);
        if (s.size() <= best) continue;
        const long double bound = 1.0L / static_cast<long double>(s.size()) + 1e-12L;
        bool ok = true;
        for (std::size_t a = 0; ok && a < s.size(); ++a)
            for (std::size_t b = a + 1; ok && b < s.size(); ++b) ok = std::fabs(c[s[a] * n + s[b]]) <= bound;
        if (ok) best = s.size();
    }
    return best;
}

inline bool witness_ok(const std::vector<Concept>& members, const Distribution& P) {
    const long double bound = 1.0L / static_cast<long double>(members.size()) + 1e-12L;
    for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
            if (std::fabs(reference::correlation(members[a], members[b], P)) > bound) return false;
    return true;
}

/// ln k! for k = 0..n as running sums of ln i.
class LogFactorial {
public:
    explicit LogFactorial(std::size_t n) : table_(n + 1, 0.0L) {
        for (std::size_t i = 1; i <= n; ++i) table_[i] = table_[i - 1] + std::log(static_cast<long double>(i));
    }
    long double operator()(std::size_t k) const { return table_.at(k); }

private:
    std::vector<long double> table_;
};

/// Pr[Bin(n, p) = k].
inline long double binom(const LogFactorial& lf, std::int64_t n, std::int64_t k, long double p) {
    if (k < 0 || k > n) return 0.0L;
    const long double lc = lf(static_cast<std::size_t>(n)) - lf(static_cast<std::size_t>(k)) -
                           lf(static_cast<std::size_t>(n - k));
    return std::exp(lc + static_cast<long double>(k) * std::log(p) +
                    static_cast<long double>(n - k) * std::log1p(-p));
}

/// The round-(t+1) distribution of Boost-By-Majority after hypotheses
/// `hyps` (t = hyps.size()), built from scratch: margin r = c(x) * sum of
/// votes, weight Pr[Bin(T - t, 1/2 + gamma) = floor((T - t - r)/2)].
inline std::vector<long double> bbm_distribution(const Distribution& P, const std::vector<Concept>& hyps,
                                                 const Concept& target, std::size_t T, long double gamma,
                                                 const LogFactorial& lf) {
    const auto t = static_cast<std::int64_t>(hyps.size());
    const auto rem = static_cast<std::int64_t>(T) - t;
    std::vector<long double> w(P.size(), 0.0L);
    long double z = 0.0L;
    for (Index x = 0; x < P.size(); ++x) {
        std::int64_t votes = 0;
        for (const auto& h : hyps) votes += h[x];
        const std::int64_t r = target[x] * votes;
        const std::int64_t a = rem - r;
        const std::int64_t k = a >= 0 ? a / 2 : -((-a + 1) / 2);
        w[x] = static_cast<long double>(P[x]) * binom(lf, rem, k, 0.5L + gamma);
        z += w[x];
    }
    for (auto& v : w) v = z > 0.0L ? v / z : 0.0L;
    return w;
}

}  // namespace bml::reference
