#pragma once

#include <hyperjsq/allocation.hpp>
#include <hyperjsq/hypergraph.hpp>
#include <hyperjsq/simplex.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperjsq {

/// Result of the min-max load optimization.
///
/// z_star is the optimal value of
///   min_P max_v (1/mu_v) sum_{e : v in e} p_{v,e} lambda_e,
/// the smallest achievable worst-case normalized load. A stable static
/// allocation exists iff z_star < 1.
///
/// lambda_star is populated only for symmetric inputs (all lambda_e equal,
/// all mu_v equal, lambda > 0): the largest per-edge arrival rate that still
/// admits a stable static allocation.
///
/// certificate, when present, is an edge subset F whose density
/// sum_{e in F} lambda_e / sum_{v in V(F)} mu_v equals z_star, certifying
/// optimality from below.
struct OptimizationResult {
    StaticAllocation allocation;
    double z_star = 0.0;
    std::optional<double> lambda_star;
    std::optional<std::vector<EdgeId>> certificate;
};

struct DensityResult {
    double z = 0.0;
    std::vector<EdgeId> subset;
};

/// Exhaustive maximum-density edge subset: max over nonempty F of
/// sum_{e in F} lambda_e / sum_{v in V(F)} mu_v, where V(F) is the union of
/// member sets. Returns the lexicographically smallest maximizing subset.
/// Limited to |E| <= 20 (2^|E|-1 candidates); larger inputs are rejected.
///
/// No allocation can load the vertices of V(F) with less than the total rate
/// of F, so every density is a lower bound on the optimal min-max load; the
/// maximum is attained, which makes this an independent oracle for
/// optimize_allocation.
inline DensityResult critical_density(const Hypergraph& h) {
    ensure_valid(h);
    const std::size_t ne = h.edge_count();
    if (ne > 20) {
        throw LimitError("oracle limit: critical_density supports at most 20 edges, got " +
                         std::to_string(ne));
    }
    const std::uint32_t full = static_cast<std::uint32_t>((1u << ne) - 1u);

    std::vector<std::uint32_t> stamp(h.vertex_count(), 0);
    std::uint32_t tick = 0;

    double best = -1.0;
    std::uint32_t best_mask = 0;

    auto lex_smaller = [ne](std::uint32_t a, std::uint32_t b) {
        // compare subsets as ascending id sequences
        std::vector<EdgeId> sa, sb;
        for (std::uint32_t j = 0; j < ne; ++j) {
            if (a & (1u << j)) sa.push_back(j);
            if (b & (1u << j)) sb.push_back(j);
        }
        return std::lexicographical_compare(sa.begin(), sa.end(), sb.begin(), sb.end());
    };

    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        ++tick;
        double rate = 0.0, capacity = 0.0;
        for (std::uint32_t j = 0; j < ne; ++j) {
            if (!(mask & (1u << j))) continue;
            rate += h.edges[j].lambda;
            for (VertexId v : h.edges[j].members) {
                if (stamp[v] != tick) {
                    stamp[v] = tick;
                    capacity += h.mu[v];
                }
            }
        }
        const double density = rate / capacity;
        if (density > best) {
            best = density;
            best_mask = mask;
        } else if (density == best && lex_smaller(mask, best_mask)) {
            best_mask = mask;
        }
    }

    DensityResult out;
    out.z = best;
    for (std::uint32_t j = 0; j < ne; ++j) {
        if (best_mask & (1u << j)) out.subset.push_back(j);
    }
    return out;
}

/// Minimizes the worst normalized load over all static allocations by solving
///   min z   s.t.  sum_{e : v in e} (lambda_e / mu_v) p_{v,e} <= z  for all v,
///                 sum_{v in e} p_{v,e} = 1                         for all e,
///                 p >= 0
/// with a deterministic simplex, then cleans the returned probabilities
/// (clamps roundoff negatives, renormalizes rows). The allocation achieving
/// z_star is generally not unique; only z_star is contractual.
inline OptimizationResult optimize_allocation(const Hypergraph& h, double tol = 1e-6) {
    ensure_valid(h);
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");

    // var 0 = z, then the p variables grouped by edge
    std::vector<std::size_t> offset(h.edge_count());
    std::size_t nv = 1;
    for (std::size_t e = 0; e < h.edge_count(); ++e) {
        offset[e] = nv;
        nv += h.edges[e].members.size();
    }

    LpProblem lp;
    lp.var_count = nv;
    lp.objective.assign(nv, 0.0);
    lp.objective[0] = 1.0;

    for (std::size_t v = 0; v < h.vertex_count(); ++v) {
        LpRow row;
        row.coeffs.assign(nv, 0.0);
        row.coeffs[0] = -1.0;
        row.sense = RowSense::LessEqual;
        row.rhs = 0.0;
        for (std::size_t e = 0; e < h.edge_count(); ++e) {
            const Edge& edge = h.edges[e];
            for (std::size_t j = 0; j < edge.members.size(); ++j) {
                if (edge.members[j] == v) {
                    row.coeffs[offset[e] + j] += edge.lambda / h.mu[v];
                }
            }
        }
        lp.rows.push_back(std::move(row));
    }
    for (std::size_t e = 0; e < h.edge_count(); ++e) {
        LpRow row;
        row.coeffs.assign(nv, 0.0);
        row.sense = RowSense::Equal;
        row.rhs = 1.0;
        for (std::size_t j = 0; j < h.edges[e].members.size(); ++j) {
            row.coeffs[offset[e] + j] = 1.0;
        }
        lp.rows.push_back(std::move(row));
    }

    LpSolution sol = SimplexSolver().solve(lp);
    if (sol.status != LpStatus::Optimal) {
        throw std::runtime_error("allocation LP is feasible and bounded by construction; "
                                 "solver disagreed");
    }

    OptimizationResult out;
    out.z_star = std::max(0.0, sol.objective);
    out.allocation.probs.resize(h.edge_count());
    for (std::size_t e = 0; e < h.edge_count(); ++e) {
        std::vector<double>& row = out.allocation.probs[e];
        row.resize(h.edges[e].members.size());
        double sum = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = std::max(0.0, sol.x[offset[e] + j]);
            sum += row[j];
        }
        for (double& p : row) p /= sum;
    }

    if (h.is_symmetric() && h.edges.front().lambda > 0.0 && out.z_star > 0.0) {
        out.lambda_star = h.mu.front() * h.edges.front().lambda / out.z_star;
    }
    if (h.edge_count() <= 20) {
        DensityResult d = critical_density(h);
        if (std::abs(d.z - out.z_star) <= std::max(tol, 1e-9 * (1.0 + out.z_star))) {
            out.certificate = std::move(d.subset);
        }
    }
    return out;
}

/// Largest per-edge arrival rate admitting a stable static allocation, for
/// symmetric systems: mu / z_star evaluated at unit edge rates.
inline double max_symmetric_rate(const Hypergraph& h) {
    ensure_valid(h);
    if (!h.is_symmetric()) {
        throw std::invalid_argument("symmetric case only: all arrival rates and all "
                                    "service rates must be equal");
    }
    Hypergraph unit = h;
    for (Edge& e : unit.edges) e.lambda = 1.0;
    const double z_unit = optimize_allocation(unit, 1e-9).z_star;
    return h.mu.front() / z_unit;
}

}  // namespace hyperjsq
