#pragma once

#include <hyperjsq/allocation.hpp>
#include <hyperjsq/hypergraph.hpp>
#include <hyperjsq/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hyperjsq {

enum class TieBreak { UniformRandom, LowestIndex };

/// Route every edge arrival by the fixed probabilities of an allocation.
struct StaticPolicy {
    StaticAllocation allocation;
};

/// Route every edge arrival to the shortest member queue.
struct JsqPolicy {
    TieBreak tiebreak = TieBreak::UniformRandom;
};

using Policy = std::variant<StaticPolicy, JsqPolicy>;

/// Classification thresholds for empirical stability verdicts. The defaults
/// are deliberately conservative; see classify_metrics.
struct StabilityRule {
    double unstable_slope_sigma = 4.0;
    double stable_slope_sigma = 2.0;
    std::int64_t min_regenerations = 10;
};

struct SimConfig {
    Policy policy = JsqPolicy{};
    double horizon = 1e5;    // simulated time units
    double warmup = 1e4;     // discarded before measuring; horizon > warmup >= 0
    std::uint64_t seed = 0;
    QueueState initial_state;       // empty means all zeros
    double sample_interval = 1.0;   // total-queue recording period
    std::size_t batch_count = 20;   // batches for variance estimation, >= 3
    StabilityRule rule;
};

/// Per-batch raw sums over one slice of the measurement window. Batch means
/// are close to independent once the slice is long against the mixing time,
/// which is what all the standard-error estimates here lean on.
struct BatchStats {
    double t_begin = 0.0;
    double t_end = 0.0;
    std::vector<double> queue_integral;  // per vertex, integral of x_v dt
    std::vector<double> busy_time;       // per vertex, time with x_v > 0
    double total_queue_integral = 0.0;
    std::vector<std::vector<std::uint64_t>> routed;  // [edge][member index]
    std::vector<std::uint64_t> edge_arrivals;        // per edge

    double duration() const { return t_end - t_begin; }

    bool operator==(const BatchStats&) const = default;
};

struct SimMetrics {
    std::vector<double> time_avg_queue;  // per vertex, post-warmup
    std::vector<double> busy_fraction;   // per vertex, empirical P(x_v > 0)
    // routing_fraction[e][j]: fraction of edge-e arrivals routed to member j
    // (post-warmup); all zeros when the edge saw no arrivals
    std::vector<std::vector<double>> routing_fraction;
    std::vector<std::pair<double, double>> total_queue_samples;  // (t, sum x)
    double growth_slope = 0.0;         // total queue vs time, post-warmup
    double growth_slope_stderr = 0.0;  // from the batch-mean regression
    std::int64_t regeneration_count = 0;  // post-warmup returns to the all-zero state
    std::uint64_t event_count = 0;
    std::uint64_t arrival_count = 0;
    std::uint64_t departure_count = 0;
    QueueState final_state;
    double measure_begin = 0.0;
    double measure_end = 0.0;
    std::vector<BatchStats> batches;

    bool operator==(const SimMetrics&) const = default;

    /// routing_fraction looked up by (vertex, edge); 0 when v is not a member.
    double routing_fraction_of(const Hypergraph& h, VertexId v, EdgeId e) const {
        const std::vector<VertexId>& members = h.edges[e].members;
        for (std::size_t j = 0; j < members.size(); ++j) {
            if (members[j] == v) return routing_fraction[e][j];
        }
        return 0.0;
    }
};

namespace detail {

/// Index of the member that JSQ routes to. With LowestIndex ties go to the
/// first minimizer; with UniformRandom the choice is uniform over minimizers.
inline std::size_t jsq_pick(const std::vector<VertexId>& members, const QueueState& x,
                            TieBreak tiebreak, Xoshiro256StarStar& rng) {
    std::int64_t min_len = x[members[0]];
    std::size_t ties = 1;
    for (std::size_t j = 1; j < members.size(); ++j) {
        const std::int64_t len = x[members[j]];
        if (len < min_len) {
            min_len = len;
            ties = 1;
        } else if (len == min_len) {
            ++ties;
        }
    }
    if (tiebreak == TieBreak::LowestIndex || ties == 1) {
        for (std::size_t j = 0; j < members.size(); ++j) {
            if (x[members[j]] == min_len) return j;
        }
    }
    std::uint64_t skip = rng.bounded(ties);
    for (std::size_t j = 0; j < members.size(); ++j) {
        if (x[members[j]] == min_len) {
            if (skip == 0) return j;
            --skip;
        }
    }
    return members.size() - 1;  // unreachable
}

struct SlopeFit {
    double slope = 0.0;
    double std_err = 0.0;
};

/// Least-squares slope of y against t with the textbook standard error.
inline SlopeFit fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = t.size();
    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tm += t[i];
        ym += y[i];
    }
    tm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (t[i] - tm) * (t[i] - tm);
        sxy += (t[i] - tm) * (y[i] - ym);
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - ym - fit.slope * (t[i] - tm);
        ssr += r * r;
    }
    fit.std_err = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    return fit;
}

inline double sample_stddev(const std::vector<double>& v) {
    const std::size_t n = v.size();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

}  // namespace detail

/// Event-driven simulation of the queueing chain: at state x the next event
/// arrives after an Exponential(R) delay with R = sum_e lambda_e +
/// sum_{v busy} mu_v, and is an edge arrival or a busy-server departure with
/// probability proportional to its rate. Arrivals are routed by the policy.
/// Identical (h, cfg) reproduce identical metrics bit for bit within a build.
inline SimMetrics simulate(const Hypergraph& h, const SimConfig& cfg) {
    ensure_valid(h);
    if (!(cfg.horizon > cfg.warmup) || !(cfg.warmup >= 0.0)) {
        throw std::invalid_argument("require horizon > warmup >= 0");
    }
    if (!(cfg.sample_interval > 0.0)) {
        throw std::invalid_argument("sample_interval must be positive");
    }
    if (cfg.batch_count < 3) {
        throw std::invalid_argument("batch_count must be at least 3");
    }
    const StaticPolicy* static_policy = std::get_if<StaticPolicy>(&cfg.policy);
    if (static_policy != nullptr) check_allocation(h, static_policy->allocation);
    const TieBreak tiebreak = static_policy == nullptr
                                  ? std::get<JsqPolicy>(cfg.policy).tiebreak
                                  : TieBreak::LowestIndex;

    const std::size_t nv = h.vertex_count();
    const std::size_t ne = h.edge_count();
    const double horizon = cfg.horizon;
    const double warmup = cfg.warmup;
    const std::size_t nbatch = cfg.batch_count;
    const double span = (horizon - warmup) / static_cast<double>(nbatch);

    QueueState x = cfg.initial_state;
    if (x.empty()) {
        x.assign(nv, 0);
    } else {
        detail::check_state(h, x);
    }

    std::int64_t total_jobs = 0;
    for (std::int64_t q : x) total_jobs += q;

    double total_lambda = 0.0;
    std::vector<double> lambda_prefix(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        total_lambda += h.edges[e].lambda;
        lambda_prefix[e] = total_lambda;
    }
    double busy_mu = 0.0;
    for (std::size_t v = 0; v < nv; ++v) {
        if (x[v] > 0) busy_mu += h.mu[v];
    }

    SimMetrics m;
    m.measure_begin = warmup;
    m.measure_end = horizon;
    m.batches.resize(nbatch);
    for (std::size_t k = 0; k < nbatch; ++k) {
        BatchStats& b = m.batches[k];
        b.t_begin = warmup + span * static_cast<double>(k);
        b.t_end = (k + 1 == nbatch) ? horizon : warmup + span * static_cast<double>(k + 1);
        b.queue_integral.assign(nv, 0.0);
        b.busy_time.assign(nv, 0.0);
        b.routed.resize(ne);
        for (std::size_t e = 0; e < ne; ++e) b.routed[e].assign(h.edges[e].members.size(), 0);
        b.edge_arrivals.assign(ne, 0);
    }

    const auto batch_index = [&](double t) {
        const auto k = static_cast<std::size_t>(std::max(0.0, (t - warmup) / span));
        return std::min(k, nbatch - 1);
    };

    // Accumulators are flushed lazily: each vertex remembers when its queue
    // last changed and books the elapsed span (clipped to the measurement
    // window, split across batch boundaries) right before the next change.
    std::vector<double> last_change(nv, 0.0);
    double last_total_change = 0.0;

    const auto accumulate_vertex = [&](std::size_t v, double from, double to) {
        double lo = std::max(from, warmup);
        const double hi = std::min(to, horizon);
        if (lo >= hi) return;
        const double len = static_cast<double>(x[v]);
        const bool busy = x[v] > 0;
        while (lo < hi) {
            const std::size_t k = batch_index(lo);
            const double seg_end = std::min(hi, m.batches[k].t_end);
            const double seg = seg_end - lo;
            m.batches[k].queue_integral[v] += len * seg;
            if (busy) m.batches[k].busy_time[v] += seg;
            if (seg_end >= hi || seg <= 0.0) break;
            lo = seg_end;
        }
    };
    const auto accumulate_total = [&](double from, double to) {
        double lo = std::max(from, warmup);
        const double hi = std::min(to, horizon);
        if (lo >= hi) return;
        const double jobs = static_cast<double>(total_jobs);
        while (lo < hi) {
            const std::size_t k = batch_index(lo);
            const double seg_end = std::min(hi, m.batches[k].t_end);
            m.batches[k].total_queue_integral += jobs * (seg_end - lo);
            if (seg_end >= hi || seg_end - lo <= 0.0) break;
            lo = seg_end;
        }
    };

    Xoshiro256StarStar rng(cfg.seed);
    double t = 0.0;
    double next_sample = 0.0;

    while (true) {
        const double rate = total_lambda + busy_mu;
        if (rate <= 0.0) break;  // frozen: no arrivals possible, all servers idle
        const double t_next = t + rng.exponential(rate);
        if (t_next > horizon) break;

        while (next_sample < t_next) {
            m.total_queue_samples.emplace_back(next_sample, static_cast<double>(total_jobs));
            next_sample += cfg.sample_interval;
        }

        const double pick = rng.uniform01() * rate;
        if (pick < total_lambda) {
            const std::size_t e = static_cast<std::size_t>(
                std::upper_bound(lambda_prefix.begin(), lambda_prefix.end(), pick) -
                lambda_prefix.begin());
            const Edge& edge = h.edges[std::min(e, ne - 1)];
            std::size_t j;
            if (static_policy != nullptr) {
                const std::vector<double>& row = static_policy->allocation.probs[edge.id];
                const double u = rng.uniform01();
                double cum = 0.0;
                j = row.size() - 1;
                for (std::size_t i = 0; i < row.size(); ++i) {
                    cum += row[i];
                    if (u < cum) {
                        j = i;
                        break;
                    }
                }
            } else {
                j = detail::jsq_pick(edge.members, x, tiebreak, rng);
            }
            const VertexId v = edge.members[j];
            accumulate_vertex(v, last_change[v], t_next);
            last_change[v] = t_next;
            accumulate_total(last_total_change, t_next);
            last_total_change = t_next;
            if (x[v] == 0) busy_mu += h.mu[v];
            ++x[v];
            ++total_jobs;
            ++m.arrival_count;
            if (t_next >= warmup) {
                const std::size_t k = batch_index(t_next);
                ++m.batches[k].routed[edge.id][j];
                ++m.batches[k].edge_arrivals[edge.id];
            }
        } else {
            double target = pick - total_lambda;
            std::size_t v = nv;
            for (std::size_t i = 0; i < nv; ++i) {
                if (x[i] == 0) continue;
                v = i;
                target -= h.mu[i];
                if (target < 0.0) break;
            }
            // v is the last busy vertex if roundoff pushed target past the
            // sum; a drifted busy_mu with no busy vertex at all is a phantom
            if (v == nv) {
                t = t_next;
                continue;
            }
            accumulate_vertex(v, last_change[v], t_next);
            last_change[v] = t_next;
            accumulate_total(last_total_change, t_next);
            last_total_change = t_next;
            --x[v];
            --total_jobs;
            if (x[v] == 0) busy_mu -= h.mu[v];
            ++m.departure_count;
            if (total_jobs == 0 && t_next >= warmup) ++m.regeneration_count;
        }
        ++m.event_count;
        t = t_next;

        if ((m.event_count & 0xFFFFFu) == 0) {
            busy_mu = 0.0;  // undo accumulated roundoff
            for (std::size_t i = 0; i < nv; ++i) {
                if (x[i] > 0) busy_mu += h.mu[i];
            }
        }
    }

    while (next_sample <= horizon) {
        m.total_queue_samples.emplace_back(next_sample, static_cast<double>(total_jobs));
        next_sample += cfg.sample_interval;
    }
    for (std::size_t v = 0; v < nv; ++v) accumulate_vertex(v, last_change[v], horizon);
    accumulate_total(last_total_change, horizon);

    const double measure_time = horizon - warmup;
    m.time_avg_queue.assign(nv, 0.0);
    m.busy_fraction.assign(nv, 0.0);
    for (const BatchStats& b : m.batches) {
        for (std::size_t v = 0; v < nv; ++v) {
            m.time_avg_queue[v] += b.queue_integral[v];
            m.busy_fraction[v] += b.busy_time[v];
        }
    }
    for (std::size_t v = 0; v < nv; ++v) {
        m.time_avg_queue[v] /= measure_time;
        m.busy_fraction[v] /= measure_time;
    }

    m.routing_fraction.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const std::size_t deg = h.edges[e].members.size();
        m.routing_fraction[e].assign(deg, 0.0);
        std::uint64_t total = 0;
        std::vector<std::uint64_t> routed(deg, 0);
        for (const BatchStats& b : m.batches) {
            total += b.edge_arrivals[e];
            for (std::size_t j = 0; j < deg; ++j) routed[j] += b.routed[e][j];
        }
        if (total > 0) {
            for (std::size_t j = 0; j < deg; ++j) {
                m.routing_fraction[e][j] =
                    static_cast<double>(routed[j]) / static_cast<double>(total);
            }
        }
    }

    std::vector<double> mids(nbatch), means(nbatch);
    for (std::size_t k = 0; k < nbatch; ++k) {
        mids[k] = 0.5 * (m.batches[k].t_begin + m.batches[k].t_end);
        means[k] = m.batches[k].total_queue_integral / m.batches[k].duration();
    }
    const detail::SlopeFit fit = detail::fit_slope(mids, means);
    m.growth_slope = fit.slope;
    m.growth_slope_stderr = fit.std_err;

    m.final_state = std::move(x);
    return m;
}

enum class StabilityLabel { Stable, Unstable, Inconclusive };

inline const char* to_string(StabilityLabel label) {
    switch (label) {
        case StabilityLabel::Stable: return "Stable";
        case StabilityLabel::Unstable: return "Unstable";
        default: return "Inconclusive";
    }
}

struct StabilityVerdict {
    StabilityLabel label = StabilityLabel::Inconclusive;
    double growth_slope = 0.0;
    double growth_slope_stderr = 0.0;
    std::int64_t regeneration_count = 0;
};

/// Applies the classification rule to finished metrics:
///   Unstable  iff slope > unstable_slope_sigma * stderr and no regeneration,
///   Stable    iff |slope| <= stable_slope_sigma * stderr and at least
///             min_regenerations returns to the empty state,
///   Inconclusive otherwise.
inline StabilityVerdict classify_metrics(const SimMetrics& m, const StabilityRule& rule) {
    StabilityVerdict v;
    v.growth_slope = m.growth_slope;
    v.growth_slope_stderr = m.growth_slope_stderr;
    v.regeneration_count = m.regeneration_count;
    if (m.growth_slope > rule.unstable_slope_sigma * m.growth_slope_stderr &&
        m.regeneration_count == 0) {
        v.label = StabilityLabel::Unstable;
    } else if (std::abs(m.growth_slope) <= rule.stable_slope_sigma * m.growth_slope_stderr &&
               m.regeneration_count >= rule.min_regenerations) {
        v.label = StabilityLabel::Stable;
    } else {
        v.label = StabilityLabel::Inconclusive;
    }
    return v;
}

inline StabilityVerdict classify_stability(const Hypergraph& h, const Policy& policy,
                                           SimConfig cfg) {
    cfg.policy = policy;
    return classify_metrics(simulate(h, cfg), cfg.rule);
}

struct ThresholdProbe {
    double lambda = 0.0;
    StabilityLabel label = StabilityLabel::Inconclusive;
    double growth_slope = 0.0;
    double growth_slope_stderr = 0.0;
    std::int64_t regeneration_count = 0;
    bool retried = false;
};

struct ThresholdEstimate {
    double estimate = 0.0;
    std::vector<ThresholdProbe> probes;
};

namespace detail {

inline Hypergraph with_edge_rate(Hypergraph h, double lambda) {
    for (Edge& e : h.edges) e.lambda = lambda;
    return h;
}

}  // namespace detail

/// Bisects the per-edge arrival rate of a symmetric template for the policy's
/// empirical stability threshold. Endpoints are classified first and must
/// bracket (lo Stable, hi Unstable). An Inconclusive probe is retried once at
/// doubled horizon and then treated as Unstable, which biases the search
/// conservatively downward. Probe k draws its seed from derive_stream(seed,
/// 2k) and its retry from derive_stream(seed, 2k + 1).
inline ThresholdEstimate estimate_threshold(const Hypergraph& h_template,
                                            const Policy& policy, double lo, double hi,
                                            int iters, const SimConfig& cfg) {
    ensure_valid(h_template);
    if (!h_template.is_symmetric()) {
        throw std::invalid_argument("symmetric case only: estimate_threshold scales a "
                                    "uniform per-edge rate");
    }
    if (!(lo < hi) || !(lo >= 0.0)) {
        throw std::invalid_argument("require 0 <= lo < hi");
    }
    if (iters < 1) throw std::invalid_argument("iters must be at least 1");

    ThresholdEstimate out;
    std::uint64_t ordinal = 0;

    const auto probe = [&](double rate) {
        const Hypergraph probe_graph = detail::with_edge_rate(h_template, rate);
        SimConfig run_cfg = cfg;
        run_cfg.seed = derive_stream(cfg.seed, 2 * ordinal);
        StabilityVerdict v = classify_stability(probe_graph, policy, run_cfg);
        ThresholdProbe p;
        p.lambda = rate;
        if (v.label == StabilityLabel::Inconclusive) {
            run_cfg.seed = derive_stream(cfg.seed, 2 * ordinal + 1);
            run_cfg.horizon = 2.0 * cfg.horizon;
            run_cfg.warmup = 2.0 * cfg.warmup;
            v = classify_stability(probe_graph, policy, run_cfg);
            p.retried = true;
        }
        ++ordinal;
        p.label = v.label;
        p.growth_slope = v.growth_slope;
        p.growth_slope_stderr = v.growth_slope_stderr;
        p.regeneration_count = v.regeneration_count;
        out.probes.push_back(p);
        return p.label;
    };

    if (probe(lo) != StabilityLabel::Stable) {
        throw LimitError("bracket invalid: lower endpoint " + std::to_string(lo) +
                         " did not classify as Stable");
    }
    if (probe(hi) == StabilityLabel::Stable) {
        throw LimitError("bracket invalid: upper endpoint " + std::to_string(hi) +
                         " classified as Stable");
    }

    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid) == StabilityLabel::Stable) {
            lo = mid;
        } else {
            hi = mid;  // Unstable, or Inconclusive after retry
        }
    }
    out.estimate = 0.5 * (lo + hi);
    return out;
}

struct ConservationResidual {
    double residual = 0.0;  // sum_e lambda_e pi_{v,e} - mu_v P(x_v > 0)
    double std_err = 0.0;   // batch-means standard error
    bool within = false;
};

/// Stationarity check: for every vertex the measured routed inflow rate must
/// balance mu_v times the busy fraction. Residuals and their batch-means
/// standard errors are reported along with a |residual| <= ci_multiple * se
/// flag; meaningful only for runs that look stationary (Stable-classified).
inline std::vector<ConservationResidual> rate_conservation_check(
    const Hypergraph& h, const SimMetrics& m, double ci_multiple = 3.0) {
    const std::size_t nv = h.vertex_count();
    const std::size_t nbatch = m.batches.size();
    if (nbatch < 2) {
        throw std::invalid_argument("metrics carry no batch detail (metrics parsed from "
                                    "a document cannot drive this check)");
    }
    std::vector<ConservationResidual> out(nv);

    std::vector<double> batch_residual(nbatch);
    for (std::size_t v = 0; v < nv; ++v) {
        double inflow = 0.0;
        for (const Edge& e : h.edges) {
            for (std::size_t j = 0; j < e.members.size(); ++j) {
                if (e.members[j] == v) inflow += e.lambda * m.routing_fraction[e.id][j];
            }
        }
        out[v].residual = inflow - h.mu[v] * m.busy_fraction[v];

        for (std::size_t k = 0; k < nbatch; ++k) {
            const BatchStats& b = m.batches[k];
            double batch_inflow = 0.0;
            for (const Edge& e : h.edges) {
                if (b.edge_arrivals[e.id] == 0) continue;
                for (std::size_t j = 0; j < e.members.size(); ++j) {
                    if (e.members[j] == v) {
                        batch_inflow += e.lambda *
                                        static_cast<double>(b.routed[e.id][j]) /
                                        static_cast<double>(b.edge_arrivals[e.id]);
                    }
                }
            }
            batch_residual[k] =
                batch_inflow - h.mu[v] * b.busy_time[v] / b.duration();
        }
        out[v].std_err = detail::sample_stddev(batch_residual) /
                         std::sqrt(static_cast<double>(nbatch));
        out[v].within = out[v].std_err > 0.0
                            ? std::abs(out[v].residual) <= ci_multiple * out[v].std_err
                            : out[v].residual == 0.0;
    }
    return out;
}

}  // namespace hyperjsq
