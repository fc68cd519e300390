#pragma once

#include <hyperjsq/allocation.hpp>
#include <hyperjsq/hypergraph.hpp>
#include <hyperjsq/lyapunov.hpp>
#include <hyperjsq/optimization.hpp>
#include <hyperjsq/simulator.hpp>

#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hyperjsq {

namespace detail {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline Json parse_json(std::string_view text, const char* what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

inline void reject_unknown(const Json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) known = true;
        }
        if (!known) {
            throw ParseError(where + ": unknown field \"" + it.key() + "\"");
        }
    }
}

inline const Json& require(const Json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing field \"" + key + "\"");
    return *it;
}

inline double require_number(const Json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(where + ": expected a number");
    return v.get<double>();
}

inline std::uint32_t require_index(const Json& v, const std::string& where) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ParseError(where + ": expected a nonnegative integer");
    }
    const auto raw = v.get<std::uint64_t>();
    if (raw > 0xFFFFFFFFull) throw ParseError(where + ": index too large");
    return static_cast<std::uint32_t>(raw);
}

}  // namespace detail

/// Shortest round-trip decimal form, for byte-stable tabular output.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Hypergraph document
// {"vertices":[{"id":0,"mu":1.0},...],"edges":[{"id":0,"members":[0,1],"lambda":0.5},...]}
// ---------------------------------------------------------------------------

inline std::string serialize(const Hypergraph& h) {
    detail::OrderedJson doc;
    doc["vertices"] = detail::OrderedJson::array();
    for (std::size_t v = 0; v < h.mu.size(); ++v) {
        doc["vertices"].push_back({{"id", v}, {"mu", h.mu[v]}});
    }
    doc["edges"] = detail::OrderedJson::array();
    for (const Edge& e : h.edges) {
        doc["edges"].push_back({{"id", e.id}, {"members", e.members}, {"lambda", e.lambda}});
    }
    return doc.dump(2) + "\n";
}

/// Parses the hypergraph document. Structural problems (bad syntax, unknown
/// fields, non-dense ids) always throw; when enforce_invariants is set (the
/// default) invariant violations such as negative rates throw too, with the
/// offending vertex or edge named. Pass false to obtain the raw object for
/// use with validate().
inline Hypergraph parse_hypergraph(std::string_view text, bool enforce_invariants = true) {
    const detail::Json doc = detail::parse_json(text, "hypergraph");
    if (!doc.is_object()) throw ParseError("hypergraph: expected an object");
    detail::reject_unknown(doc, {"vertices", "edges"}, "hypergraph");
    const detail::Json& jv = detail::require(doc, "vertices", "hypergraph");
    const detail::Json& je = detail::require(doc, "edges", "hypergraph");
    if (!jv.is_array() || !je.is_array()) {
        throw ParseError("hypergraph: \"vertices\" and \"edges\" must be arrays");
    }

    std::vector<std::pair<VertexId, double>> verts;
    for (std::size_t i = 0; i < jv.size(); ++i) {
        const std::string where = "vertex entry " + std::to_string(i);
        const detail::Json& o = jv[i];
        if (!o.is_object()) throw ParseError(where + ": expected an object");
        detail::reject_unknown(o, {"id", "mu"}, where);
        verts.emplace_back(detail::require_index(detail::require(o, "id", where), where),
                           detail::require_number(detail::require(o, "mu", where), where));
    }
    std::sort(verts.begin(), verts.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    Hypergraph h;
    h.mu.resize(verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i) {
        if (verts[i].first != i) {
            throw ParseError("vertex ids must be dense 0.." + std::to_string(verts.size() - 1) +
                             " without duplicates");
        }
        h.mu[i] = verts[i].second;
    }

    std::vector<Edge> edges;
    for (std::size_t i = 0; i < je.size(); ++i) {
        const std::string where = "edge entry " + std::to_string(i);
        const detail::Json& o = je[i];
        if (!o.is_object()) throw ParseError(where + ": expected an object");
        detail::reject_unknown(o, {"id", "members", "lambda"}, where);
        Edge e;
        e.id = detail::require_index(detail::require(o, "id", where), where);
        const detail::Json& jm = detail::require(o, "members", where);
        if (!jm.is_array()) throw ParseError(where + ": \"members\" must be an array");
        for (const detail::Json& m : jm) {
            e.members.push_back(detail::require_index(m, where));
        }
        e.lambda = detail::require_number(detail::require(o, "lambda", where), where);
        edges.push_back(std::move(e));
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (edges[i].id != i) {
            throw ParseError("edge ids must be dense 0.." + std::to_string(edges.size() - 1) +
                             " without duplicates");
        }
    }
    h.edges = std::move(edges);

    if (enforce_invariants) {
        const std::vector<Violation> vs = validate(h);
        if (!vs.empty()) {
            std::string msg = "hypergraph violates invariants:";
            for (const Violation& v : vs) msg += " [" + v.str() + "]";
            throw ParseError(msg);
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// Allocation document
// {"allocations":[{"edge":0,"p":{"0":0.5,"1":0.5}},...]}
// ---------------------------------------------------------------------------

inline std::string serialize_allocation(const Hypergraph& h, const StaticAllocation& P) {
    detail::OrderedJson doc;
    doc["allocations"] = detail::OrderedJson::array();
    for (std::size_t e = 0; e < h.edges.size(); ++e) {
        // emit probabilities keyed by vertex id, ascending for stable bytes
        std::vector<std::pair<VertexId, double>> entries;
        for (std::size_t j = 0; j < h.edges[e].members.size(); ++j) {
            entries.emplace_back(h.edges[e].members[j], P.probs[e][j]);
        }
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        detail::OrderedJson p = detail::OrderedJson::object();
        for (const auto& [v, prob] : entries) p[std::to_string(v)] = prob;
        doc["allocations"].push_back({{"edge", e}, {"p", std::move(p)}});
    }
    return doc.dump(2) + "\n";
}

inline StaticAllocation parse_allocation(std::string_view text, const Hypergraph& h) {
    const detail::Json doc = detail::parse_json(text, "allocation");
    if (!doc.is_object()) throw ParseError("allocation: expected an object");
    detail::reject_unknown(doc, {"allocations"}, "allocation");
    const detail::Json& ja = detail::require(doc, "allocations", "allocation");
    if (!ja.is_array()) throw ParseError("allocation: \"allocations\" must be an array");

    StaticAllocation P;
    P.probs.resize(h.edges.size());
    std::vector<bool> seen(h.edges.size(), false);
    for (std::size_t i = 0; i < ja.size(); ++i) {
        const std::string where = "allocation entry " + std::to_string(i);
        const detail::Json& o = ja[i];
        if (!o.is_object()) throw ParseError(where + ": expected an object");
        detail::reject_unknown(o, {"edge", "p"}, where);
        const EdgeId e = detail::require_index(detail::require(o, "edge", where), where);
        if (e >= h.edges.size()) throw ParseError(where + ": unknown edge " + std::to_string(e));
        if (seen[e]) throw ParseError(where + ": duplicate edge " + std::to_string(e));
        seen[e] = true;
        const detail::Json& jp = detail::require(o, "p", where);
        if (!jp.is_object()) throw ParseError(where + ": \"p\" must be an object");

        const std::vector<VertexId>& members = h.edges[e].members;
        std::vector<double>& row = P.probs[e];
        row.assign(members.size(), 0.0);
        for (auto it = jp.begin(); it != jp.end(); ++it) {
            std::uint32_t v = 0;
            const std::string& key = it.key();
            auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), v);
            if (ec != std::errc() || ptr != key.data() + key.size()) {
                throw ParseError(where + ": key \"" + key + "\" is not a vertex id");
            }
            const auto pos = std::find(members.begin(), members.end(), v);
            if (pos == members.end()) {
                throw ParseError(where + ": vertex " + key + " is not a member of edge " +
                                 std::to_string(e));
            }
            const double prob = detail::require_number(*it, where);
            if (!std::isfinite(prob) || prob < 0.0) {
                throw ParseError(where + ": probability for vertex " + key +
                                 " must be nonnegative");
            }
            row[static_cast<std::size_t>(pos - members.begin())] = prob;
        }
        double sum = 0.0;
        for (double p : row) sum += p;
        if (std::abs(sum - 1.0) > kAllocationRowTol) {
            throw ParseError(where + ": probabilities sum to " + format_double(sum) +
                             ", expected 1");
        }
    }
    for (std::size_t e = 0; e < h.edges.size(); ++e) {
        if (!seen[e]) {
            throw ParseError("allocation: missing entry for edge " + std::to_string(e));
        }
    }
    return P;
}

// ---------------------------------------------------------------------------
// Optimization result document
// ---------------------------------------------------------------------------

inline std::string serialize_optimization(const Hypergraph& h, const OptimizationResult& r) {
    detail::OrderedJson doc;
    doc["z_star"] = r.z_star;
    if (r.lambda_star) {
        doc["lambda_star"] = *r.lambda_star;
    } else {
        doc["lambda_star"] = nullptr;
    }
    doc["allocation"] =
        detail::OrderedJson::parse(serialize_allocation(h, r.allocation));
    if (r.certificate) {
        doc["certificate"] = *r.certificate;
    } else {
        doc["certificate"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

inline OptimizationResult parse_optimization(std::string_view text, const Hypergraph& h) {
    const detail::Json doc = detail::parse_json(text, "optimization result");
    OptimizationResult r;
    r.z_star = detail::require_number(detail::require(doc, "z_star", "optimization result"),
                                      "z_star");
    const detail::Json& ls = detail::require(doc, "lambda_star", "optimization result");
    if (!ls.is_null()) r.lambda_star = detail::require_number(ls, "lambda_star");
    r.allocation =
        parse_allocation(detail::require(doc, "allocation", "optimization result").dump(), h);
    const detail::Json& cert = detail::require(doc, "certificate", "optimization result");
    if (!cert.is_null()) {
        std::vector<EdgeId> subset;
        for (const detail::Json& e : cert) subset.push_back(detail::require_index(e, "certificate"));
        r.certificate = std::move(subset);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Drift report document
// ---------------------------------------------------------------------------

inline std::string serialize_drift_report(const DriftReport& r) {
    detail::OrderedJson doc;
    doc["exact"] = r.exact;
    doc["bound"] = r.bound;
    doc["c"] = r.c;
    doc["epsilon"] = r.epsilon;
    if (r.threshold) {
        doc["threshold"] = *r.threshold;
    } else {
        doc["threshold"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

inline DriftReport parse_drift_report(std::string_view text) {
    const detail::Json doc = detail::parse_json(text, "drift report");
    DriftReport r;
    r.exact = detail::require_number(detail::require(doc, "exact", "drift report"), "exact");
    r.bound = detail::require_number(detail::require(doc, "bound", "drift report"), "bound");
    r.c = detail::require_number(detail::require(doc, "c", "drift report"), "c");
    r.epsilon =
        detail::require_number(detail::require(doc, "epsilon", "drift report"), "epsilon");
    const detail::Json& th = detail::require(doc, "threshold", "drift report");
    if (!th.is_null()) r.threshold = detail::require_number(th, "threshold");
    return r;
}

// ---------------------------------------------------------------------------
// Simulation metrics: one JSON document per run, plus two tabular forms
// ---------------------------------------------------------------------------

inline std::string serialize_metrics(const Hypergraph& h, const SimMetrics& m) {
    detail::OrderedJson doc;
    doc["time_avg_queue"] = m.time_avg_queue;
    doc["busy_fraction"] = m.busy_fraction;
    doc["routing_fraction"] = detail::OrderedJson::array();
    for (std::size_t e = 0; e < m.routing_fraction.size(); ++e) {
        std::vector<std::pair<VertexId, double>> entries;
        for (std::size_t j = 0; j < h.edges[e].members.size(); ++j) {
            entries.emplace_back(h.edges[e].members[j], m.routing_fraction[e][j]);
        }
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        detail::OrderedJson pi = detail::OrderedJson::object();
        for (const auto& [v, f] : entries) pi[std::to_string(v)] = f;
        doc["routing_fraction"].push_back({{"edge", e}, {"pi", std::move(pi)}});
    }
    doc["growth_slope"] = m.growth_slope;
    doc["growth_slope_stderr"] = m.growth_slope_stderr;
    doc["regeneration_count"] = m.regeneration_count;
    doc["event_count"] = m.event_count;
    doc["arrival_count"] = m.arrival_count;
    doc["departure_count"] = m.departure_count;
    doc["final_state"] = m.final_state;
    doc["measure_begin"] = m.measure_begin;
    doc["measure_end"] = m.measure_end;
    doc["total_queue_samples"] = detail::OrderedJson::array();
    for (const auto& [t, q] : m.total_queue_samples) {
        doc["total_queue_samples"].push_back({t, q});
    }
    return doc.dump(2) + "\n";
}

/// Reads back the fields emitted by serialize_metrics. Batch-level detail is
/// not serialized, so a parsed SimMetrics supports inspection but not the
/// batch-means analyses.
inline SimMetrics parse_metrics(std::string_view text, const Hypergraph& h) {
    const detail::Json doc = detail::parse_json(text, "metrics");
    SimMetrics m;
    m.time_avg_queue = doc.at("time_avg_queue").get<std::vector<double>>();
    m.busy_fraction = doc.at("busy_fraction").get<std::vector<double>>();
    m.routing_fraction.resize(h.edges.size());
    for (const detail::Json& entry : doc.at("routing_fraction")) {
        const EdgeId e = detail::require_index(entry.at("edge"), "routing_fraction");
        if (e >= h.edges.size()) throw ParseError("routing_fraction: unknown edge");
        const std::vector<VertexId>& members = h.edges[e].members;
        m.routing_fraction[e].assign(members.size(), 0.0);
        for (auto it = entry.at("pi").begin(); it != entry.at("pi").end(); ++it) {
            const auto v = static_cast<VertexId>(std::stoul(it.key()));
            const auto pos = std::find(members.begin(), members.end(), v);
            if (pos == members.end()) throw ParseError("routing_fraction: vertex not in edge");
            m.routing_fraction[e][static_cast<std::size_t>(pos - members.begin())] =
                it->get<double>();
        }
    }
    m.growth_slope = doc.at("growth_slope").get<double>();
    m.growth_slope_stderr = doc.at("growth_slope_stderr").get<double>();
    m.regeneration_count = doc.at("regeneration_count").get<std::int64_t>();
    m.event_count = doc.at("event_count").get<std::uint64_t>();
    m.arrival_count = doc.at("arrival_count").get<std::uint64_t>();
    m.departure_count = doc.at("departure_count").get<std::uint64_t>();
    m.final_state = doc.at("final_state").get<QueueState>();
    m.measure_begin = doc.at("measure_begin").get<double>();
    m.measure_end = doc.at("measure_end").get<double>();
    for (const detail::Json& s : doc.at("total_queue_samples")) {
        m.total_queue_samples.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
    }
    return m;
}

inline std::string metrics_series_csv(const SimMetrics& m) {
    std::string out = "t,total_queue\n";
    for (const auto& [t, q] : m.total_queue_samples) {
        out += format_double(t);
        out += ',';
        out += format_double(q);
        out += '\n';
    }
    return out;
}

inline std::string metrics_summary_csv(const SimMetrics& m) {
    std::string out = "vertex,time_avg_queue,busy_fraction\n";
    for (std::size_t v = 0; v < m.time_avg_queue.size(); ++v) {
        out += std::to_string(v);
        out += ',';
        out += format_double(m.time_avg_queue[v]);
        out += ',';
        out += format_double(m.busy_fraction[v]);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Threshold estimate document
// ---------------------------------------------------------------------------

inline std::string serialize_threshold(const ThresholdEstimate& est) {
    detail::OrderedJson doc;
    doc["estimate"] = est.estimate;
    doc["probes"] = detail::OrderedJson::array();
    for (const ThresholdProbe& p : est.probes) {
        doc["probes"].push_back({{"lambda", p.lambda},
                                 {"label", to_string(p.label)},
                                 {"growth_slope", p.growth_slope},
                                 {"growth_slope_stderr", p.growth_slope_stderr},
                                 {"regeneration_count", p.regeneration_count},
                                 {"retried", p.retried}});
    }
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Neighborhood-graph document
// {"adjacency":[[1,2],[0],[0]],"lambda":[1.0,...],"mu":[1.0,...]}
// ---------------------------------------------------------------------------

inline Hypergraph parse_neighborhood(std::string_view text) {
    const detail::Json doc = detail::parse_json(text, "neighborhood graph");
    if (!doc.is_object()) throw ParseError("neighborhood graph: expected an object");
    detail::reject_unknown(doc, {"adjacency", "lambda", "mu"}, "neighborhood graph");
    const detail::Json& ja = detail::require(doc, "adjacency", "neighborhood graph");
    if (!ja.is_array()) throw ParseError("neighborhood graph: \"adjacency\" must be an array");
    std::vector<std::vector<VertexId>> adjacency;
    for (std::size_t i = 0; i < ja.size(); ++i) {
        const std::string where = "adjacency entry " + std::to_string(i);
        if (!ja[i].is_array()) throw ParseError(where + ": expected an array");
        std::vector<VertexId> row;
        for (const detail::Json& n : ja[i]) row.push_back(detail::require_index(n, where));
        adjacency.push_back(std::move(row));
    }
    const auto lambda =
        detail::require(doc, "lambda", "neighborhood graph").get<std::vector<double>>();
    const auto mu = detail::require(doc, "mu", "neighborhood graph").get<std::vector<double>>();
    try {
        return from_neighborhood_graph(adjacency, lambda, mu);
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("neighborhood graph: ") + e.what());
    }
}

/// Comma-separated queue lengths, e.g. "2,5,0".
inline QueueState parse_state_csv(std::string_view text, std::size_t expected_size) {
    QueueState x;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        std::string_view tok = text.substr(pos, comma - pos);
        while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\n')) tok.remove_prefix(1);
        while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\n')) tok.remove_suffix(1);
        if (tok.empty()) throw ParseError("state: empty entry");
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) {
            throw ParseError("state: \"" + std::string(tok) +
                             "\" is not a nonnegative integer");
        }
        x.push_back(v);
        if (comma == text.size()) break;
        pos = comma + 1;
    }
    if (x.size() != expected_size) {
        throw ParseError("state has " + std::to_string(x.size()) + " entries, expected " +
                         std::to_string(expected_size));
    }
    return x;
}

}  // namespace hyperjsq
