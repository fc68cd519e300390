#pragma once

#include <hyperjsq/allocation.hpp>
#include <hyperjsq/hypergraph.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace hyperjsq {

/// Quadratic potential L(x) = sum_v x_v^2, evaluated in integer arithmetic.
inline double lyapunov_value(const QueueState& x) {
    __int128 sum = 0;
    for (std::int64_t q : x) {
        if (q < 0) throw std::invalid_argument("queue lengths must be nonnegative");
        sum += static_cast<__int128>(q) * q;
    }
    return static_cast<double>(sum);
}

/// Generator of the shortest-queue chain applied to L at state x:
///   sum_v mu_v 1{x_v>0} ((x_v-1)^2 - x_v^2) + sum_e lambda_e ((m_e+1)^2 - m_e^2)
/// with m_e = min over the edge's members. Every minimizer of an edge shares
/// m_e, so the value does not depend on how ties are broken. The quadratic
/// differences are formed in integer arithmetic and only weighted by the
/// rates in floating point.
inline double exact_drift(const Hypergraph& h, const QueueState& x) {
    detail::check_state(h, x);
    double drift = 0.0;
    for (std::size_t v = 0; v < x.size(); ++v) {
        if (x[v] > 0) {
            drift += h.mu[v] * static_cast<double>(1 - 2 * x[v]);
        }
    }
    for (const Edge& e : h.edges) {
        std::int64_t m = x[e.members.front()];
        for (VertexId v : e.members) m = std::min(m, x[v]);
        drift += e.lambda * static_cast<double>(2 * m + 1);
    }
    return drift;
}

struct DriftBound {
    double bound = 0.0;
    double c = 0.0;
};

/// Linear upper bound on the drift obtained by replacing each edge minimum
/// with the p-weighted average of its members:
///   -2 sum_v mu_v x_v + 2 sum_v x_v sum_{e : v in e} lambda_e p_{v,e} + c,
/// with c = sum_v mu_v + sum_e lambda_e, the smallest state-independent
/// constant for which exact_drift <= bound holds at every state.
inline DriftBound drift_upper_bound(const Hypergraph& h, const StaticAllocation& P,
                                    const QueueState& x) {
    check_allocation(h, P);
    detail::check_state(h, x);
    const double c = h.total_service_rate() + h.total_arrival_rate();
    double bound = c;
    for (std::size_t v = 0; v < x.size(); ++v) {
        bound -= 2.0 * h.mu[v] * static_cast<double>(x[v]);
    }
    for (std::size_t e = 0; e < h.edges.size(); ++e) {
        const Edge& edge = h.edges[e];
        for (std::size_t j = 0; j < edge.members.size(); ++j) {
            bound += 2.0 * edge.lambda * P.probs[e][j] *
                     static_cast<double>(x[edge.members[j]]);
        }
    }
    return {bound, c};
}

/// Worst-case slack of the per-vertex stability inequalities:
///   min_v (mu_v - sum_{e : v in e} p_{v,e} lambda_e).
/// Nonpositive iff P is not a stable static allocation.
inline double epsilon_gap(const Hypergraph& h, const StaticAllocation& P) {
    LoadProfile lp = vertex_load(h, P);
    double eps = h.mu[0] - lp.lambda[0];
    for (std::size_t v = 1; v < lp.lambda.size(); ++v) {
        eps = std::min(eps, h.mu[v] - lp.lambda[v]);
    }
    return eps;
}

/// State-size cutoff (c + delta) / (2 epsilon): once sum_v x_v exceeds it,
/// the drift bound (hence the exact drift) is below -delta.
inline double negative_drift_threshold(const Hypergraph& h, const StaticAllocation& P,
                                       double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    const double eps = epsilon_gap(h, P);
    if (!(eps > 0.0)) {
        throw std::domain_error("no stable static allocation: epsilon gap is " +
                                std::to_string(eps));
    }
    const double c = h.total_service_rate() + h.total_arrival_rate();
    return (c + delta) / (2.0 * eps);
}

struct DriftReport {
    double exact = 0.0;
    double bound = 0.0;
    double c = 0.0;
    double epsilon = 0.0;
    std::optional<double> threshold;  // absent when epsilon <= 0
};

inline DriftReport make_drift_report(const Hypergraph& h, const StaticAllocation& P,
                                     const QueueState& x, double delta) {
    DriftReport r;
    r.exact = exact_drift(h, x);
    DriftBound b = drift_upper_bound(h, P, x);
    r.bound = b.bound;
    r.c = b.c;
    r.epsilon = epsilon_gap(h, P);
    if (r.epsilon > 0.0 && delta > 0.0) {
        r.threshold = negative_drift_threshold(h, P, delta);
    }
    return r;
}

}  // namespace hyperjsq
