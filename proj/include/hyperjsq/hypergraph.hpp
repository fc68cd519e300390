#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperjsq {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

/// Queue lengths, one nonnegative entry per vertex.
using QueueState = std::vector<std::int64_t>;

/// Thrown when a document cannot be parsed into a well-formed object.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when an operation exceeds a hard runtime limit (oracle size,
/// generator blowup, invalid search bracket).
struct LimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A hyperedge: a class of customers arriving as a Poisson stream of rate
/// `lambda`, each servable by any of the member vertices.
struct Edge {
    EdgeId id = 0;
    std::vector<VertexId> members;
    double lambda = 0.0;

    bool operator==(const Edge&) const = default;
};

/// Hypergraph of queues: one exponential server with rate mu[v] per vertex,
/// one arrival stream per edge. Vertex and edge ids are dense array indices.
/// Values are immutable after construction by convention; share const
/// references freely across threads.
struct Hypergraph {
    std::vector<double> mu;   // service rate per vertex, indexed by VertexId
    std::vector<Edge> edges;  // indexed by EdgeId

    std::size_t vertex_count() const { return mu.size(); }
    std::size_t edge_count() const { return edges.size(); }

    /// Ids of all edges containing v, ascending. Throws on unknown vertex.
    std::vector<EdgeId> incident_edges(VertexId v) const {
        if (v >= mu.size()) {
            throw std::out_of_range("unknown vertex " + std::to_string(v));
        }
        std::vector<EdgeId> out;
        for (const Edge& e : edges) {
            if (std::find(e.members.begin(), e.members.end(), v) != e.members.end()) {
                out.push_back(e.id);
            }
        }
        return out;
    }

    double total_service_rate() const {
        double s = 0.0;
        for (double m : mu) s += m;
        return s;
    }

    double total_arrival_rate() const {
        double s = 0.0;
        for (const Edge& e : edges) s += e.lambda;
        return s;
    }

    /// All arrival rates equal and all service rates equal (exact compare).
    bool is_symmetric() const {
        if (mu.empty() || edges.empty()) return false;
        for (double m : mu) {
            if (m != mu.front()) return false;
        }
        for (const Edge& e : edges) {
            if (e.lambda != edges.front().lambda) return false;
        }
        return true;
    }

    bool operator==(const Hypergraph&) const = default;
};

namespace detail {

inline void check_state(const Hypergraph& h, const QueueState& x) {
    if (x.size() != h.vertex_count()) {
        throw std::invalid_argument("state has " + std::to_string(x.size()) +
                                    " entries, hypergraph has " +
                                    std::to_string(h.vertex_count()) + " vertices");
    }
    for (std::int64_t q : x) {
        if (q < 0) throw std::invalid_argument("queue lengths must be nonnegative");
    }
}

}  // namespace detail

/// One invariant violation, with the offending location ("vertex 3", "edge 0").
struct Violation {
    std::string location;
    std::string message;

    std::string str() const { return location + ": " + message; }
};

/// Checks every structural invariant and returns all violations found.
/// An empty result means the hypergraph is valid. Violations are data,
/// not failures; nothing is thrown.
inline std::vector<Violation> validate(const Hypergraph& h) {
    std::vector<Violation> out;
    if (h.mu.empty()) out.push_back({"graph", "must contain at least one vertex"});
    if (h.edges.empty()) out.push_back({"graph", "must contain at least one edge"});

    for (std::size_t v = 0; v < h.mu.size(); ++v) {
        if (!std::isfinite(h.mu[v]) || h.mu[v] <= 0.0) {
            out.push_back({"vertex " + std::to_string(v),
                           "service rate must be positive and finite"});
        }
    }

    for (std::size_t i = 0; i < h.edges.size(); ++i) {
        const Edge& e = h.edges[i];
        const std::string loc = "edge " + std::to_string(i);
        if (e.id != i) {
            out.push_back({loc, "id " + std::to_string(e.id) +
                                    " does not match its position (ids must be dense)"});
        }
        if (e.members.empty()) {
            out.push_back({loc, "empty member list"});
        }
        std::vector<VertexId> sorted = e.members;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t j = 1; j < sorted.size(); ++j) {
            if (sorted[j] == sorted[j - 1]) {
                out.push_back({loc, "duplicate member " + std::to_string(sorted[j])});
            }
        }
        for (VertexId m : e.members) {
            if (m >= h.mu.size()) {
                out.push_back({loc, "unknown vertex " + std::to_string(m)});
            }
        }
        if (!std::isfinite(e.lambda) || e.lambda < 0.0) {
            out.push_back({loc, "arrival rate must be nonnegative and finite"});
        }
    }
    return out;
}

inline bool is_valid(const Hypergraph& h) { return validate(h).empty(); }

/// Throws std::invalid_argument listing the violations, if any.
inline void ensure_valid(const Hypergraph& h) {
    std::vector<Violation> vs = validate(h);
    if (vs.empty()) return;
    std::string msg = "invalid hypergraph:";
    for (const Violation& v : vs) msg += " [" + v.str() + "]";
    throw std::invalid_argument(msg);
}

}  // namespace hyperjsq
