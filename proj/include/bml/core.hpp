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

// Finite-domain distributions, ±1 concepts and the exact correlation/loss
// arithmetic everything else is built on.

#pragma once

#include <bml/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bml {

/// Absolute slack for "a <= b" tests on correlations that are sums of
/// at most a few thousand doubles.
inline constexpr double kCompareSlack = 1e-12;

/// Tolerance on the total mass of a Distribution.
inline constexpr double kMassTolerance = 1e-12;

using Index = std::size_t;

class Domain {
public:
    explicit Domain(std::size_t size) : size_(size) {
        require(size >= 1, ErrorKind::parameter, "domain size must be >= 1");
    }

    Domain(std::size_t size, std::vector<std::string> labels) : Domain(size) {
        require(labels.size() == size, ErrorKind::parameter, "label count must equal domain size");
        std::set<std::string> seen(labels.begin(), labels.end());
        require(seen.size() == labels.size(), ErrorKind::parameter, "domain labels must be unique");
        labels_ = std::move(labels);
    }

    std::size_t size() const noexcept { return size_; }
    const std::optional<std::vector<std::string>>& labels() const noexcept { return labels_; }

    friend bool operator==(const Domain&, const Domain&) = default;

private:
    std::size_t size_;
    std::optional<std::vector<std::string>> labels_;
};

/// Probability vector over a finite domain. Stored exactly as given.
class Distribution {
public:
    explicit Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
        require(!probs_.empty(), ErrorKind::parameter, "distribution over an empty domain");
        double total = 0.0;
        for (double p : probs_) {
            require(std::isfinite(p) && p >= 0.0, ErrorKind::parameter,
                    "distribution entries must be finite and non-negative");
            total += p;
        }
        require(std::abs(total - 1.0) <= kMassTolerance, ErrorKind::parameter,
                "distribution must sum to 1 (got " + std::to_string(total) + ")");
    }

    static Distribution uniform(std::size_t n) {
        require(n >= 1, ErrorKind::parameter, "uniform distribution needs n >= 1");
        return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    /// Normalizes non-negative weights. Throws on zero total mass.
    static Distribution from_weights(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) {
            require(std::isfinite(w) && w >= 0.0, ErrorKind::parameter, "weights must be finite and >= 0");
            total += w;
        }
        require(total > 0.0, ErrorKind::degenerate, "weights have zero total mass");
        std::vector<double> probs(weights.size());
        for (std::size_t i = 0; i < weights.size(); ++i) probs[i] = weights[i] / total;
        return Distribution(std::move(probs));
    }

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](Index x) const { return probs_[x]; }
    std::span<const double> probs() const noexcept { return probs_; }

    friend bool operator==(const Distribution&, const Distribution&) = default;

private:
    std::vector<double> probs_;
};

/// A ±1 labelling of the domain.
class Concept {
public:
    Concept() = default;

    explicit Concept(std::vector<std::int8_t> labels) : labels_(std::move(labels)) {
        for (auto v : labels_)
            require(v == 1 || v == -1, ErrorKind::parameter, "concept entries must be +1 or -1");
    }

    static Concept constant(std::size_t n, int value) {
        return Concept(std::vector<std::int8_t>(n, static_cast<std::int8_t>(value)));
    }

    std::size_t size() const noexcept { return labels_.size(); }
    int operator[](Index x) const { return labels_[x]; }
    std::span<const std::int8_t> labels() const noexcept { return labels_; }

    Concept operator-() const {
        auto out = labels_;
        for (auto& v : out) v = static_cast<std::int8_t>(-v);
        return Concept(std::move(out));
    }

    /// Pointwise product, again a ±1 vector.
    friend Concept operator*(const Concept& a, const Concept& b) {
        require(a.size() == b.size(), ErrorKind::dimension_mismatch, "concept product of unequal lengths");
        std::vector<std::int8_t> out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = static_cast<std::int8_t>(a.labels_[i] * b.labels_[i]);
        return Concept(std::move(out));
    }

    friend bool operator==(const Concept&, const Concept&) = default;
    friend auto operator<=>(const Concept&, const Concept&) = default;

private:
    std::vector<std::int8_t> labels_;
};

struct LabeledExample {
    Index point = 0;
    int label = 1;

    friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Pairs of concept indices (i < j) holding identical labellings.
struct DedupReport {
    std::vector<std::pair<Index, Index>> duplicate_pairs;
    std::size_t distinct = 0;

    bool has_duplicates() const noexcept { return !duplicate_pairs.empty(); }
};

class ConceptClass {
public:
    ConceptClass(Domain domain, std::vector<Concept> concepts)
        : domain_(std::move(domain)), concepts_(std::move(concepts)) {
        validate();
    }

    explicit ConceptClass(std::vector<Concept> concepts)
        : domain_(concepts.empty() ? 1 : concepts.front().size()), concepts_(std::move(concepts)) {
        validate();
    }

    const Domain& domain() const noexcept { return domain_; }
    std::size_t domain_size() const noexcept { return domain_.size(); }
    std::size_t size() const noexcept { return concepts_.size(); }
    const Concept& operator[](Index i) const { return concepts_[i]; }
    const std::vector<Concept>& concepts() const noexcept { return concepts_; }

    auto begin() const noexcept { return concepts_.begin(); }
    auto end() const noexcept { return concepts_.end(); }

    DedupReport dedup_report() const {
        DedupReport report;
        std::set<Concept> seen;
        for (Index i = 0; i < concepts_.size(); ++i) {
            seen.insert(concepts_[i]);
            for (Index j = i + 1; j < concepts_.size(); ++j)
                if (concepts_[i] == concepts_[j]) report.duplicate_pairs.emplace_back(i, j);
        }
        report.distinct = seen.size();
        return report;
    }

    ConceptClass subset(std::span<const Index> members) const {
        std::vector<Concept> out;
        out.reserve(members.size());
        for (Index i : members) {
            require(i < concepts_.size(), ErrorKind::parameter, "subset index out of range");
            out.push_back(concepts_[i]);
        }
        return ConceptClass(domain_, std::move(out));
    }

    friend bool operator==(const ConceptClass&, const ConceptClass&) = default;

private:
    void validate() const {
        require(!concepts_.empty(), ErrorKind::parameter, "concept class must be non-empty");
        for (const auto& c : concepts_)
            require(c.size() == domain_.size(), ErrorKind::dimension_mismatch,
                    "every concept must have one label per domain point");
    }

    Domain domain_;
    std::vector<Concept> concepts_;
};

namespace detail {

inline void check_lengths(std::size_t a, std::size_t b, const char* what) {
    require(a == b, ErrorKind::dimension_mismatch,
            std::string(what) + ": length " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace detail

/// <h, c>_P = sum_x P(x) h(x) c(x).
inline double correlation(const Concept& h, const Concept& c, const Distribution& P) {
    detail::check_lengths(h.size(), c.size(), "correlation");
    detail::check_lengths(h.size(), P.size(), "correlation");
    double sum = 0.0;
    for (Index x = 0; x < h.size(); ++x) sum += P[x] * static_cast<double>(h[x] * c[x]);
    return sum;
}

/// E_P[f] for a ±1 function f.
inline double expectation(const Concept& f, const Distribution& P) {
    detail::check_lengths(f.size(), P.size(), "expectation");
    double sum = 0.0;
    for (Index x = 0; x < f.size(); ++x) sum += P[x] * static_cast<double>(f[x]);
    return sum;
}

/// Pr_{x~P}(h(x) != c(x)).
inline double loss(const Concept& h, const Concept& c, const Distribution& P) {
    detail::check_lengths(h.size(), c.size(), "loss");
    detail::check_lengths(h.size(), P.size(), "loss");
    double sum = 0.0;
    for (Index x = 0; x < h.size(); ++x)
        if (h[x] != c[x]) sum += P[x];
    return sum;
}

/// mu^{-1} P(x) <= Q(x) <= mu P(x) at every point. Zero mass is only
/// compatible with zero mass. Comparisons are made on the products
/// mu*Q and mu*P with a few ulps of relative slack.
inline bool is_mu_close(const Distribution& P, const Distribution& Q, double mu) {
    require(std::isfinite(mu) && mu >= 1.0, ErrorKind::parameter, "mu must be >= 1");
    detail::check_lengths(P.size(), Q.size(), "is_mu_close");
    constexpr double rel = 8.0 * std::numeric_limits<double>::epsilon();
    for (Index x = 0; x < P.size(); ++x) {
        const double p = P[x];
        const double q = Q[x];
        if (p == 0.0 || q == 0.0) {
            if (p != q) return false;
            continue;
        }
        if (q * mu < p * (1.0 - rel)) return false;
        if (p * mu < q * (1.0 - rel)) return false;
    }
    return true;
}

/// Smallest mu with is_mu_close(P, Q, mu); +inf when supports differ.
inline double closeness_ratio(const Distribution& P, const Distribution& Q) {
    detail::check_lengths(P.size(), Q.size(), "closeness_ratio");
    double mu = 1.0;
    for (Index x = 0; x < P.size(); ++x) {
        const double p = P[x];
        const double q = Q[x];
        if (p == 0.0 && q == 0.0) continue;
        if (p == 0.0 || q == 0.0) return std::numeric_limits<double>::infinity();
        mu = std::max({mu, p / q, q / p});
    }
    return mu;
}

/// delta * P + (1 - delta) * R.
inline Distribution mix(const Distribution& P, const Distribution& R, double delta) {
    require(delta >= 0.0 && delta <= 1.0, ErrorKind::parameter, "mix weight must lie in [0,1]");
    detail::check_lengths(P.size(), R.size(), "mix");
    if (delta == 1.0) return P;
    if (delta == 0.0) return R;
    std::vector<double> out(P.size());
    for (Index x = 0; x < P.size(); ++x) out[x] = delta * P[x] + (1.0 - delta) * R[x];
    return Distribution(std::move(out));
}

/// ceil(log2(n)) with bits_for(1) == 0.
inline std::size_t bits_for(std::uint64_t n) {
    std::size_t bits = 0;
    while (bits < 64 && (std::uint64_t{1} << bits) < n) ++bits;
    return bits;
}

}  // namespace bml
