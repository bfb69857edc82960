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

// SQ dimension: the largest d with d class members pairwise correlated at
// most 1/d in absolute value.

#pragma once

#include <bml/core.hpp>
#include <bml/random.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace bml {

struct SQWitness {
    std::size_t dim = 0;
    std::vector<Index> members;
};

struct SQDimOptions {
    std::size_t exact_cap = 24;
};

/// Symmetric matrix of <h_i, h_j>_P.
class CorrelationMatrix {
public:
    CorrelationMatrix(const ConceptClass& cls, const Distribution& P) : n_(cls.size()), m_(n_ * n_) {
        detail::check_lengths(cls.domain_size(), P.size(), "CorrelationMatrix");
        for (Index i = 0; i < n_; ++i) {
            m_[i * n_ + i] = correlation(cls[i], cls[i], P);
            for (Index j = i + 1; j < n_; ++j) {
                const double c = correlation(cls[i], cls[j], P);
                m_[i * n_ + j] = c;
                m_[j * n_ + i] = c;
            }
        }
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(Index i, Index j) const { return m_[i * n_ + j]; }

    bool near_orthogonal(Index i, Index j, std::size_t d) const {
        return std::abs((*this)(i, j)) <= 1.0 / static_cast<double>(d) + kCompareSlack;
    }

private:
    std::size_t n_;
    std::vector<double> m_;
};

inline bool verify_witness(const CorrelationMatrix& corr, const SQWitness& w) {
    if (w.dim != w.members.size() || w.dim == 0) return false;
    for (std::size_t a = 0; a < w.members.size(); ++a) {
        if (w.members[a] >= corr.size()) return false;
        for (std::size_t b = a + 1; b < w.members.size(); ++b) {
            if (w.members[a] == w.members[b]) return false;
            if (!corr.near_orthogonal(w.members[a], w.members[b], w.dim)) return false;
        }
    }
    return true;
}

inline bool verify_witness(const ConceptClass& cls, const Distribution& P, const SQWitness& w) {
    for (Index i : w.members)
        require(i < cls.size(), ErrorKind::parameter, "witness index out of range");
    return verify_witness(CorrelationMatrix(cls, P), w);
}

namespace detail {

/// Depth-first search for a clique of size `target` in a graph on <= 64
/// vertices given as adjacency bitmasks.
class CliqueSearch {
public:
    CliqueSearch(const std::vector<std::uint64_t>& adj, std::size_t target) : adj_(adj), target_(target) {}

    bool run(std::uint64_t candidates) { return extend(candidates); }

    const std::vector<Index>& clique() const noexcept { return clique_; }

private:
    bool extend(std::uint64_t candidates) {
        if (clique_.size() == target_) return true;
        while (candidates != 0) {
            if (clique_.size() + static_cast<std::size_t>(std::popcount(candidates)) < target_) return false;
            const auto v = static_cast<Index>(std::countr_zero(candidates));
            candidates &= candidates - 1;
            clique_.push_back(v);
            if (extend(candidates & adj_[v])) return true;
            clique_.pop_back();
        }
        return false;
    }

    const std::vector<std::uint64_t>& adj_;
    std::size_t target_;
    std::vector<Index> clique_;
};

}  // namespace detail

/// Exact SQ dimension by descending d. A pair violating the 1/d bound is a
/// missing edge, so it prunes every superset during the clique search.
inline SQWitness sq_dim_exact(const CorrelationMatrix& corr, SQDimOptions opts = {}) {
    const std::size_t n = corr.size();
    require(n <= opts.exact_cap && n <= 64, ErrorKind::capacity,
            "class of " + std::to_string(n) + " concepts exceeds the exact-mode cap of " +
                std::to_string(std::min<std::size_t>(opts.exact_cap, 64)) + "; use greedy mode");
    for (std::size_t d = n; d >= 2; --d) {
        std::vector<std::uint64_t> adj(n, 0);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                if (i != j && corr.near_orthogonal(i, j, d)) adj[i] |= std::uint64_t{1} << j;
        std::uint64_t candidates = 0;
        for (Index i = 0; i < n; ++i)
            if (static_cast<std::size_t>(std::popcount(adj[i])) + 1 >= d) candidates |= std::uint64_t{1} << i;
        detail::CliqueSearch search(adj, d);
        if (search.run(candidates)) return SQWitness{d, search.clique()};
    }
    return SQWitness{1, {0}};
}

inline SQWitness sq_dim_exact(const ConceptClass& cls, const Distribution& P, SQDimOptions opts = {}) {
    require(cls.size() <= opts.exact_cap && cls.size() <= 64, ErrorKind::capacity,
            "class of " + std::to_string(cls.size()) + " concepts exceeds the exact-mode cap of " +
                std::to_string(std::min<std::size_t>(opts.exact_cap, 64)) + "; use greedy mode");
    return sq_dim_exact(CorrelationMatrix(cls, P), opts);
}

/// Certified lower bound: grows a set in seeded random order, keeping a
/// concept when every pair of the grown set satisfies 1/|grown set|.
inline SQWitness sq_dim_greedy(const CorrelationMatrix& corr, std::uint64_t seed) {
    std::vector<Index> order(corr.size());
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng.engine());

    std::vector<Index> kept;
    for (Index h : order) {
        const std::size_t grown = kept.size() + 1;
        bool ok = true;
        for (std::size_t a = 0; ok && a < kept.size(); ++a) {
            ok = corr.near_orthogonal(kept[a], h, grown);
            for (std::size_t b = a + 1; ok && b < kept.size(); ++b)
                ok = corr.near_orthogonal(kept[a], kept[b], grown);
        }
        if (ok) kept.push_back(h);
    }
    SQWitness w{kept.size(), kept};
    require(verify_witness(corr, w), ErrorKind::invariant, "greedy witness failed verification");
    return w;
}

inline SQWitness sq_dim_greedy(const ConceptClass& cls, const Distribution& P, std::uint64_t seed) {
    return sq_dim_greedy(CorrelationMatrix(cls, P), seed);
}

/// Exact when the class fits under the cap, greedy otherwise.
inline SQWitness sq_dim_auto(const ConceptClass& cls, const Distribution& P, std::uint64_t seed,
                             SQDimOptions opts = {}) {
    CorrelationMatrix corr(cls, P);
    if (cls.size() <= opts.exact_cap && cls.size() <= 64) return sq_dim_exact(corr, opts);
    return sq_dim_greedy(corr, seed);
}

struct BallEstimate {
    double mu = 1.0;
    Distribution best_Q;
    std::size_t dim_at_best_Q = 0;
    SQWitness witness;
    std::size_t restarts = 0;
    /// Best dimension after restart 0, 1, ..., restarts.
    std::vector<std::size_t> best_by_restart;
};

struct BallSearchOptions {
    std::size_t restarts = 20;
    std::size_t moves_per_restart = 0;  // 0 -> 10 * domain size
    SQDimOptions dim;
};

/// Heuristic lower bound on max over Q in the mu-ball of SQ_Q(class).
/// Restart 0 starts at P; restart r >= 1 starts from random ratios in
/// [mu^{-1/2}, mu^{1/2}], which always normalizes into the ball. Moves
/// rescale one coordinate and are rejected if they leave the ball.
inline BallEstimate ball_max_sqdim(const ConceptClass& cls, const Distribution& P, double mu,
                                   std::uint64_t seed, BallSearchOptions opts = {}) {
    require(std::isfinite(mu) && mu >= 1.0, ErrorKind::parameter, "mu must be >= 1");
    detail::check_lengths(cls.domain_size(), P.size(), "ball_max_sqdim");

    auto dim_under = [&](const Distribution& Q, std::uint64_t s) { return sq_dim_auto(cls, Q, s, opts.dim); };

    SQWitness at_p = dim_under(P, mix_seed(seed, 0));
    BallEstimate best{mu, P, at_p.dim, at_p, opts.restarts, {}};
    if (mu == 1.0) {
        best.best_by_restart.assign(opts.restarts + 1, best.dim_at_best_Q);
        return best;
    }

    const std::size_t n = P.size();
    const std::size_t moves = opts.moves_per_restart == 0 ? 10 * n : opts.moves_per_restart;
    std::vector<Index> support;
    for (Index x = 0; x < n; ++x)
        if (P[x] > 0.0) support.push_back(x);
    const double half_log = std::log(mu) / 2.0;

    for (std::size_t r = 0; r <= opts.restarts; ++r) {
        Rng rng(mix_seed(seed, r + 1));
        std::vector<double> w(P.probs().begin(), P.probs().end());
        if (r > 0)
            for (Index x : support) w[x] *= std::exp((2.0 * rng.uniform() - 1.0) * half_log);
        Distribution Q = r == 0 ? P : Distribution::from_weights(w);
        if (!is_mu_close(P, Q, mu)) Q = P;
        SQWitness cur = dim_under(Q, rng.engine()());

        for (std::size_t m = 0; m < moves && !support.empty(); ++m) {
            std::vector<double> trial(Q.probs().begin(), Q.probs().end());
            const Index x = support[rng.below(support.size())];
            trial[x] *= std::exp((2.0 * rng.uniform() - 1.0) * 2.0 * half_log);
            Distribution cand = Distribution::from_weights(trial);
            if (!is_mu_close(P, cand, mu)) continue;
            SQWitness w2 = dim_under(cand, rng.engine()());
            if (w2.dim >= cur.dim) {
                Q = std::move(cand);
                cur = std::move(w2);
            }
        }
        if (cur.dim > best.dim_at_best_Q) {
            best.dim_at_best_Q = cur.dim;
            best.best_Q = Q;
            best.witness = cur;
        }
        best.best_by_restart.push_back(best.dim_at_best_Q);
    }
    return best;
}

}  // namespace bml
