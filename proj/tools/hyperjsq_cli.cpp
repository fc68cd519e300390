// Command-line front end: generate, validate, and optimize hypergraphs of
// queues, evaluate drift bounds, and run reproducible stability experiments.
//
// Machine-readable output goes to stdout, diagnostics to stderr. "-" means
// stdin or stdout wherever a FILE is expected. Exit codes: 0 success,
// 1 usage error, 2 invalid input, 3 runtime limit (oracle size, bad bracket).

#include <hyperjsq/hyperjsq.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitLimit = 3;

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw hyperjsq::ParseError("cannot open \"" + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& text) { std::cout << text; }

std::uint64_t pick_seed(const std::optional<std::uint64_t>& requested) {
    if (requested) return *requested;
    std::random_device rd;
    const std::uint64_t seed =
        (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    std::cerr << "seed: " << seed << "\n";
    return seed;
}

hyperjsq::Hypergraph load_hypergraph(const std::string& path) {
    return hyperjsq::parse_hypergraph(read_input(path));
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw hyperjsq::ParseError("\"" + tok + "\" is not a number");
        }
    }
    if (out.empty()) throw hyperjsq::ParseError("expected a comma-separated list of numbers");
    return out;
}

struct SimOptions {
    std::string policy = "jsq";
    std::string tiebreak = "uniform";
    std::string alloc_path;
    double horizon = 1e5;
    std::optional<double> warmup;
    std::optional<std::uint64_t> seed;
    double sample_interval = 1.0;
    std::size_t batches = 20;

    void attach(CLI::App* cmd, bool with_policy = true) {
        if (with_policy) {
            cmd->add_option("--policy", policy, "routing policy")
                ->check(CLI::IsMember({"jsq", "static"}))
                ->capture_default_str();
            cmd->add_option("--tiebreak", tiebreak, "JSQ tie-break rule")
                ->check(CLI::IsMember({"uniform", "lowest"}))
                ->capture_default_str();
            cmd->add_option("--alloc", alloc_path,
                            "allocation FILE for the static policy "
                            "(default: the optimizer's allocation)");
        }
        cmd->add_option("--horizon", horizon, "simulated time units")
            ->capture_default_str();
        cmd->add_option("--warmup", warmup, "time discarded before measuring "
                                            "(default: horizon / 10)");
        cmd->add_option("--seed", seed, "RNG seed (auto-chosen and echoed if omitted)");
        cmd->add_option("--sample-interval", sample_interval,
                        "total-queue recording period")
            ->capture_default_str();
        cmd->add_option("--batches", batches, "batch count for standard errors")
            ->capture_default_str();
    }

    hyperjsq::SimConfig config(const hyperjsq::Hypergraph& h) const {
        hyperjsq::SimConfig cfg;
        cfg.horizon = horizon;
        cfg.warmup = warmup.value_or(horizon / 10.0);
        cfg.seed = pick_seed(seed);
        cfg.sample_interval = sample_interval;
        cfg.batch_count = batches;
        cfg.policy = make_policy(h);
        return cfg;
    }

    hyperjsq::Policy make_policy(const hyperjsq::Hypergraph& h) const {
        if (policy == "static") {
            if (alloc_path.empty()) {
                // default to the optimizer's allocation for this graph
                return hyperjsq::StaticPolicy{
                    hyperjsq::optimize_allocation(h).allocation};
            }
            return hyperjsq::StaticPolicy{
                hyperjsq::parse_allocation(read_input(alloc_path), h)};
        }
        return hyperjsq::JsqPolicy{tiebreak == "lowest"
                                       ? hyperjsq::TieBreak::LowestIndex
                                       : hyperjsq::TieBreak::UniformRandom};
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shortest-queue load balancing on hypergraphs of queues"};
    app.require_subcommand(1);

    // --- validate ---
    std::string validate_file;
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "check a hypergraph document; exit 0 iff valid");
    validate_cmd->add_option("file", validate_file, "hypergraph FILE or -")->required();

    // --- gen ---
    CLI::App* gen_cmd = app.add_subcommand("gen", "emit a generated hypergraph document");
    gen_cmd->require_subcommand(1);
    std::uint32_t gen_n = 4, gen_d = 2, gen_k = 4;
    double gen_lambda = 1.0, gen_mu = 1.0;
    std::string gen_neighborhood_file;
    CLI::App* gen_cycle_cmd = gen_cmd->add_subcommand("cycle", "ring of n vertices");
    gen_cycle_cmd->add_option("--n", gen_n, "vertex count")->required();
    CLI::App* gen_complete_cmd =
        gen_cmd->add_subcommand("complete", "complete graph on n vertices");
    gen_complete_cmd->add_option("--n", gen_n, "vertex count")->required();
    CLI::App* gen_complete_d_cmd = gen_cmd->add_subcommand(
        "complete-d", "every d-subset of n vertices is an edge");
    gen_complete_d_cmd->add_option("--n", gen_n, "vertex count")->required();
    gen_complete_d_cmd->add_option("--d", gen_d, "edge size")->required();
    CLI::App* gen_clique_cmd = gen_cmd->add_subcommand(
        "clique-leaves", "k-clique with one leaf per clique vertex");
    gen_clique_cmd->add_option("--k", gen_k, "clique size")->required();
    CLI::App* gen_neighborhood_cmd = gen_cmd->add_subcommand(
        "neighborhood", "hypergraph equivalent of neighborhood routing on a graph");
    gen_neighborhood_cmd
        ->add_option("file", gen_neighborhood_file, "adjacency document FILE or -")
        ->required();
    for (CLI::App* c : {gen_cycle_cmd, gen_complete_cmd, gen_complete_d_cmd, gen_clique_cmd}) {
        c->add_option("--lambda", gen_lambda, "arrival rate per edge")->capture_default_str();
        c->add_option("--mu", gen_mu, "service rate per vertex")->capture_default_str();
    }

    // --- optimize ---
    std::string optimize_file;
    double optimize_tol = 1e-6;
    CLI::App* optimize_cmd =
        app.add_subcommand("optimize", "min-max load allocation and critical density");
    optimize_cmd->add_option("file", optimize_file, "hypergraph FILE or -")->required();
    optimize_cmd->add_option("--tol", optimize_tol, "optimality tolerance")
        ->capture_default_str();

    // --- drift ---
    std::string drift_file, drift_alloc, drift_state;
    double drift_delta = 1.0;
    CLI::App* drift_cmd =
        app.add_subcommand("drift", "exact drift, upper bound, and negative-drift threshold");
    drift_cmd->add_option("file", drift_file, "hypergraph FILE or -")->required();
    drift_cmd->add_option("--alloc", drift_alloc, "allocation FILE or -")->required();
    drift_cmd->add_option("--state", drift_state, "queue lengths, e.g. 2,5,0")->required();
    drift_cmd->add_option("--delta", drift_delta, "drift margin")->capture_default_str();

    // --- simulate ---
    std::string simulate_file, simulate_initial, simulate_format = "json";
    SimOptions simulate_opts;
    CLI::App* simulate_cmd = app.add_subcommand("simulate", "one simulation run");
    simulate_cmd->add_option("file", simulate_file, "hypergraph FILE or -")->required();
    simulate_opts.attach(simulate_cmd);
    simulate_cmd->add_option("--initial", simulate_initial,
                             "initial queue lengths, e.g. 2,5,0 (default all zero)");
    simulate_cmd->add_option("--format", simulate_format, "output form")
        ->check(CLI::IsMember({"json", "summary-csv", "series-csv"}))
        ->capture_default_str();

    // --- threshold ---
    std::string threshold_file;
    double threshold_lo = 0.0, threshold_hi = 0.0;
    int threshold_iters = 6;
    SimOptions threshold_opts;
    CLI::App* threshold_cmd = app.add_subcommand(
        "threshold", "bisect the per-edge rate for the empirical stability threshold");
    threshold_cmd->add_option("file", threshold_file, "symmetric hypergraph FILE or -")
        ->required();
    threshold_cmd->add_option("--lo", threshold_lo, "stable bracket endpoint")->required();
    threshold_cmd->add_option("--hi", threshold_hi, "unstable bracket endpoint")->required();
    threshold_cmd->add_option("--iters", threshold_iters, "bisection rounds")
        ->capture_default_str();
    threshold_opts.attach(threshold_cmd);

    // --- sweep ---
    std::string sweep_file, sweep_lambdas;
    SimOptions sweep_opts;
    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "classify a list of per-edge rates; emits a CSV table");
    sweep_cmd->add_option("file", sweep_file, "hypergraph FILE or -")->required();
    sweep_cmd->add_option("--lambdas", sweep_lambdas, "comma-separated per-edge rates")
        ->required();
    sweep_opts.attach(sweep_cmd);

    try {
        app.parse(argc, argv);

        if (*validate_cmd) {
            const hyperjsq::Hypergraph h =
                hyperjsq::parse_hypergraph(read_input(validate_file), false);
            const std::vector<hyperjsq::Violation> vs = hyperjsq::validate(h);
            nlohmann::ordered_json doc;
            doc["valid"] = vs.empty();
            doc["violations"] = nlohmann::ordered_json::array();
            for (const hyperjsq::Violation& v : vs) {
                doc["violations"].push_back(
                    {{"location", v.location}, {"message", v.message}});
            }
            write_output(doc.dump(2) + "\n");
            return vs.empty() ? 0 : kExitInvalidInput;
        }

        if (*gen_cmd) {
            hyperjsq::Hypergraph h;
            if (*gen_cycle_cmd) {
                h = hyperjsq::gen_cycle(gen_n, gen_lambda, gen_mu);
            } else if (*gen_complete_cmd) {
                h = hyperjsq::gen_complete_graph(gen_n, gen_lambda, gen_mu);
            } else if (*gen_complete_d_cmd) {
                h = hyperjsq::gen_complete_d_hypergraph(gen_n, gen_d, gen_lambda, gen_mu);
            } else if (*gen_clique_cmd) {
                h = hyperjsq::gen_clique_with_leaves(gen_k, gen_lambda, gen_mu);
            } else {
                h = hyperjsq::parse_neighborhood(read_input(gen_neighborhood_file));
            }
            write_output(hyperjsq::serialize(h));
            return 0;
        }

        if (*optimize_cmd) {
            const hyperjsq::Hypergraph h = load_hypergraph(optimize_file);
            const hyperjsq::OptimizationResult r =
                hyperjsq::optimize_allocation(h, optimize_tol);
            write_output(hyperjsq::serialize_optimization(h, r));
            return 0;
        }

        if (*drift_cmd) {
            const hyperjsq::Hypergraph h = load_hypergraph(drift_file);
            const hyperjsq::StaticAllocation P =
                hyperjsq::parse_allocation(read_input(drift_alloc), h);
            const hyperjsq::QueueState x =
                hyperjsq::parse_state_csv(drift_state, h.vertex_count());
            const hyperjsq::DriftReport r =
                hyperjsq::make_drift_report(h, P, x, drift_delta);
            write_output(hyperjsq::serialize_drift_report(r));
            return 0;
        }

        if (*simulate_cmd) {
            const hyperjsq::Hypergraph h = load_hypergraph(simulate_file);
            hyperjsq::SimConfig cfg = simulate_opts.config(h);
            if (!simulate_initial.empty()) {
                cfg.initial_state =
                    hyperjsq::parse_state_csv(simulate_initial, h.vertex_count());
            }
            const hyperjsq::SimMetrics m = hyperjsq::simulate(h, cfg);
            if (simulate_format == "summary-csv") {
                write_output(hyperjsq::metrics_summary_csv(m));
            } else if (simulate_format == "series-csv") {
                write_output(hyperjsq::metrics_series_csv(m));
            } else {
                write_output(hyperjsq::serialize_metrics(h, m));
            }
            return 0;
        }

        if (*threshold_cmd) {
            const hyperjsq::Hypergraph h = load_hypergraph(threshold_file);
            hyperjsq::SimConfig cfg = threshold_opts.config(h);
            hyperjsq::Policy policy = cfg.policy;
            if (threshold_opts.policy == "static" && threshold_opts.alloc_path.empty()) {
                // the optimal allocation is scale invariant; derive it at rate 1
                hyperjsq::Hypergraph unit = h;
                for (hyperjsq::Edge& e : unit.edges) e.lambda = 1.0;
                policy = hyperjsq::StaticPolicy{
                    hyperjsq::optimize_allocation(unit).allocation};
            }
            const hyperjsq::ThresholdEstimate est = hyperjsq::estimate_threshold(
                h, policy, threshold_lo, threshold_hi, threshold_iters, cfg);
            write_output(hyperjsq::serialize_threshold(est));
            return 0;
        }

        if (*sweep_cmd) {
            const hyperjsq::Hypergraph h = load_hypergraph(sweep_file);
            hyperjsq::SimConfig cfg = sweep_opts.config(h);
            std::vector<double> lambdas = parse_double_list(sweep_lambdas);
            std::sort(lambdas.begin(), lambdas.end());
            const std::uint64_t base_seed = cfg.seed;
            std::string out =
                "lambda,label,mean_total_queue,growth_slope,regeneration_count\n";
            for (std::size_t i = 0; i < lambdas.size(); ++i) {
                hyperjsq::Hypergraph probe = h;
                for (hyperjsq::Edge& e : probe.edges) e.lambda = lambdas[i];
                hyperjsq::SimConfig run_cfg = cfg;
                run_cfg.seed = hyperjsq::derive_stream(base_seed, i);
                run_cfg.policy = sweep_opts.make_policy(probe);
                const hyperjsq::SimMetrics m = hyperjsq::simulate(probe, run_cfg);
                const hyperjsq::StabilityVerdict v =
                    hyperjsq::classify_metrics(m, run_cfg.rule);
                double mean_total = 0.0;
                for (double q : m.time_avg_queue) mean_total += q;
                out += hyperjsq::format_double(lambdas[i]);
                out += ',';
                out += hyperjsq::to_string(v.label);
                out += ',';
                out += hyperjsq::format_double(mean_total);
                out += ',';
                out += hyperjsq::format_double(m.growth_slope);
                out += ',';
                out += std::to_string(m.regeneration_count);
                out += '\n';
            }
            write_output(out);
            return 0;
        }

        return kExitUsage;  // unreachable: a subcommand is required
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const hyperjsq::LimitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitLimit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
}
