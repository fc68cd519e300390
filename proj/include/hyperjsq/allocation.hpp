#pragma once

#include <hyperjsq/hypergraph.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hyperjsq {

/// Probability row sums must match 1 within this tolerance.
inline constexpr double kAllocationRowTol = 1e-9;

/// Static randomized routing: probs[e][j] is the probability that an arrival
/// on edge e is sent to edges[e].members[j]. Rows are aligned with the member
/// lists of one specific hypergraph.
struct StaticAllocation {
    std::vector<std::vector<double>> probs;

    bool operator==(const StaticAllocation&) const = default;
};

/// Per-vertex aggregate arrival rate and normalized load rho = lambda / mu.
struct LoadProfile {
    std::vector<double> lambda;
    std::vector<double> rho;

    double max_rho() const {
        double m = 0.0;
        for (double r : rho) m = std::max(m, r);
        return m;
    }
};

/// Throws std::invalid_argument unless P is structurally valid for h:
/// one row per edge, one entry per member, entries nonnegative and finite,
/// each row summing to 1 within kAllocationRowTol.
inline void check_allocation(const Hypergraph& h, const StaticAllocation& P) {
    if (P.probs.size() != h.edges.size()) {
        throw std::invalid_argument("allocation covers " + std::to_string(P.probs.size()) +
                                    " edges but hypergraph has " +
                                    std::to_string(h.edges.size()));
    }
    for (std::size_t e = 0; e < h.edges.size(); ++e) {
        const std::string loc = "edge " + std::to_string(e);
        const std::vector<double>& row = P.probs[e];
        if (row.size() != h.edges[e].members.size()) {
            throw std::invalid_argument(loc + ": allocation row has " +
                                        std::to_string(row.size()) + " entries for " +
                                        std::to_string(h.edges[e].members.size()) +
                                        " members");
        }
        double sum = 0.0;
        for (double p : row) {
            if (!std::isfinite(p) || p < 0.0) {
                throw std::invalid_argument(loc + ": probabilities must be nonnegative");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kAllocationRowTol) {
            throw std::invalid_argument(loc + ": probabilities sum to " +
                                        std::to_string(sum) + ", expected 1");
        }
    }
}

inline bool is_valid_allocation(const Hypergraph& h, const StaticAllocation& P) {
    try {
        check_allocation(h, P);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

/// Splits every edge uniformly across its members.
inline StaticAllocation uniform_allocation(const Hypergraph& h) {
    StaticAllocation P;
    P.probs.reserve(h.edges.size());
    for (const Edge& e : h.edges) {
        P.probs.emplace_back(e.members.size(), 1.0 / static_cast<double>(e.members.size()));
    }
    return P;
}

/// Aggregate Poisson rate arriving at each vertex under P, and the normalized
/// load rho_v = lambda_v / mu_v.
inline LoadProfile vertex_load(const Hypergraph& h, const StaticAllocation& P) {
    check_allocation(h, P);
    LoadProfile out;
    out.lambda.assign(h.vertex_count(), 0.0);
    for (std::size_t e = 0; e < h.edges.size(); ++e) {
        const Edge& edge = h.edges[e];
        for (std::size_t j = 0; j < edge.members.size(); ++j) {
            out.lambda[edge.members[j]] += P.probs[e][j] * edge.lambda;
        }
    }
    out.rho.resize(out.lambda.size());
    for (std::size_t v = 0; v < out.lambda.size(); ++v) {
        out.rho[v] = out.lambda[v] / h.mu[v];
    }
    return out;
}

/// Stable iff every vertex satisfies rho_v < 1 strictly; rho_v = 1 is unstable.
inline std::pair<bool, LoadProfile> is_stable_static(const Hypergraph& h,
                                                     const StaticAllocation& P) {
    LoadProfile lp = vertex_load(h, P);
    bool stable = true;
    for (double r : lp.rho) {
        if (!(r < 1.0)) stable = false;
    }
    return {stable, std::move(lp)};
}

/// True iff all normalized loads are equal within tol.
inline bool is_balanced(const Hypergraph& h, const StaticAllocation& P, double tol) {
    LoadProfile lp = vertex_load(h, P);
    double lo = lp.rho.front(), hi = lp.rho.front();
    for (double r : lp.rho) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return hi - lo <= tol;
}

}  // namespace hyperjsq
