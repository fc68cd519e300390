#pragma once

#include <hyperjsq/hypergraph.hpp>

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperjsq {

namespace detail {

inline void check_rates(double lambda, double mu) {
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw std::invalid_argument("arrival rate must be nonnegative and finite");
    }
    if (!std::isfinite(mu) || mu <= 0.0) {
        throw std::invalid_argument("service rate must be positive and finite");
    }
}

// binomial(n, d), capped so generator sizes stay sane
inline std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t d, std::uint64_t cap) {
    if (d > n) return 0;
    d = std::min(d, n - d);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= d; ++i) {
        r = r * (n - d + i) / i;
        if (r > cap) return cap + 1;
    }
    return r;
}

}  // namespace detail

/// Ring of n vertices with the n edges {i, (i+1) mod n}, uniform rates.
inline Hypergraph gen_cycle(std::uint32_t n, double lambda, double mu) {
    if (n < 3) throw std::invalid_argument("cycle requires n >= 3");
    detail::check_rates(lambda, mu);
    Hypergraph h;
    h.mu.assign(n, mu);
    h.edges.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        h.edges.push_back({i, {i, (i + 1) % n}, lambda});
    }
    return h;
}

/// All n(n-1)/2 vertex pairs as edges, uniform rates.
inline Hypergraph gen_complete_graph(std::uint32_t n, double lambda, double mu) {
    if (n < 2) throw std::invalid_argument("complete graph requires n >= 2");
    detail::check_rates(lambda, mu);
    Hypergraph h;
    h.mu.assign(n, mu);
    EdgeId id = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            h.edges.push_back({id++, {i, j}, lambda});
        }
    }
    return h;
}

/// All binomial(n, d) vertex subsets of size d as edges, uniform rates.
inline Hypergraph gen_complete_d_hypergraph(std::uint32_t n, std::uint32_t d,
                                            double lambda, double mu) {
    if (n < 1 || d < 1 || d > n) {
        throw std::invalid_argument("complete d-hypergraph requires 1 <= d <= n");
    }
    detail::check_rates(lambda, mu);
    constexpr std::uint64_t kMaxEdges = 1'000'000;
    if (detail::binomial_capped(n, d, kMaxEdges) > kMaxEdges) {
        throw LimitError("complete d-hypergraph would exceed " +
                         std::to_string(kMaxEdges) + " edges");
    }
    Hypergraph h;
    h.mu.assign(n, mu);
    std::vector<VertexId> pick(d);
    std::iota(pick.begin(), pick.end(), 0);
    EdgeId id = 0;
    while (true) {
        h.edges.push_back({id++, pick, lambda});
        // next lexicographic d-combination of {0..n-1}
        std::int64_t i = static_cast<std::int64_t>(d) - 1;
        while (i >= 0 && pick[static_cast<std::size_t>(i)] ==
                             n - d + static_cast<std::uint32_t>(i)) {
            --i;
        }
        if (i < 0) break;
        ++pick[static_cast<std::size_t>(i)];
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < d; ++j) {
            pick[j] = pick[j - 1] + 1;
        }
    }
    return h;
}

/// 2k vertices: 0..k-1 form a clique, vertex k+i is a leaf attached to i.
/// k(k-1)/2 clique edges followed by k leaf edges {i, k+i}, uniform rates.
inline Hypergraph gen_clique_with_leaves(std::uint32_t k, double lambda, double mu) {
    if (k <= 2) throw std::invalid_argument("clique-with-leaves requires k > 2");
    detail::check_rates(lambda, mu);
    Hypergraph h;
    h.mu.assign(2 * k, mu);
    EdgeId id = 0;
    for (std::uint32_t i = 0; i < k; ++i) {
        for (std::uint32_t j = i + 1; j < k; ++j) {
            h.edges.push_back({id++, {i, j}, lambda});
        }
    }
    for (std::uint32_t i = 0; i < k; ++i) {
        h.edges.push_back({id++, {i, k + i}, lambda});
    }
    return h;
}

/// Converts a neighborhood-routing graph into an equivalent hypergraph:
/// node i of the undirected graph becomes hyperedge i = {i} + neighbors(i)
/// with arrival rate lambda[i]; vertex i keeps service rate mu[i].
inline Hypergraph from_neighborhood_graph(const std::vector<std::vector<VertexId>>& adjacency,
                                          const std::vector<double>& lambda,
                                          const std::vector<double>& mu) {
    const std::size_t n = adjacency.size();
    if (n == 0) throw std::invalid_argument("adjacency must be nonempty");
    if (lambda.size() != n || mu.size() != n) {
        throw std::invalid_argument("lambda and mu must have one entry per node");
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<VertexId> seen;
        for (VertexId j : adjacency[i]) {
            if (j >= n) {
                throw std::invalid_argument("node " + std::to_string(i) +
                                            ": neighbor " + std::to_string(j) +
                                            " out of range");
            }
            if (j == i) {
                throw std::invalid_argument("node " + std::to_string(i) +
                                            ": self loop not allowed");
            }
            if (std::find(seen.begin(), seen.end(), j) != seen.end()) {
                throw std::invalid_argument("node " + std::to_string(i) +
                                            ": duplicate neighbor " + std::to_string(j));
            }
            seen.push_back(j);
            const auto& back = adjacency[j];
            if (std::find(back.begin(), back.end(), static_cast<VertexId>(i)) == back.end()) {
                throw std::invalid_argument("adjacency is not symmetric: " +
                                            std::to_string(i) + " -> " + std::to_string(j) +
                                            " has no reverse entry");
            }
        }
    }
    Hypergraph h;
    h.mu = mu;
    h.edges.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<VertexId> members = adjacency[i];
        members.push_back(static_cast<VertexId>(i));
        std::sort(members.begin(), members.end());
        h.edges.push_back({static_cast<EdgeId>(i), std::move(members), lambda[i]});
    }
    return h;
}

}  // namespace hyperjsq
