// Demonstrates the capacity loss of clique-with-leaves topologies: the
// maximum stably supportable total arrival rate stays well below the total
// service rate as the clique grows, in contrast to cycles and complete
// graphs, which pool perfectly.

#include <hyperjsq/hyperjsq.hpp>

#include <cstdio>

using namespace hyperjsq;

int main() {
    std::printf("clique-with-leaves, mu = 1 per vertex\n");
    std::printf("%3s %10s %12s %14s %14s\n", "k", "z*", "lambda*", "max total rate",
                "service rate");
    for (std::uint32_t k = 3; k <= 10; ++k) {
        const Hypergraph h = gen_clique_with_leaves(k, 1.0, 1.0);
        const OptimizationResult r = optimize_allocation(h);
        const double lambda_star = max_symmetric_rate(h);
        const double total = lambda_star * static_cast<double>(h.edge_count());
        std::printf("%3u %10.4f %12.4f %14.4f %14.1f\n", k, r.z_star, lambda_star, total,
                    h.total_service_rate());
    }

    std::printf("\ncycle (perfect pooling for comparison)\n");
    std::printf("%3s %10s %12s %14s %14s\n", "n", "z*", "lambda*", "max total rate",
                "service rate");
    for (std::uint32_t n = 4; n <= 10; n += 2) {
        const Hypergraph h = gen_cycle(n, 1.0, 1.0);
        const double lambda_star = max_symmetric_rate(h);
        std::printf("%3u %10.4f %12.4f %14.4f %14.1f\n", n,
                    optimize_allocation(h).z_star, lambda_star,
                    lambda_star * static_cast<double>(h.edge_count()),
                    h.total_service_rate());
    }

    // a short simulated check on either side of the k = 4 threshold (2/3)
    std::printf("\nsimulated verdicts, clique-with-leaves k = 4, JSQ\n");
    const Hypergraph tmpl = gen_clique_with_leaves(4, 1.0, 1.0);
    SimConfig cfg;
    cfg.horizon = 6e4;
    cfg.warmup = 6e3;
    cfg.seed = 1;
    for (double lambda : {0.5, 0.6, 0.75, 0.9}) {
        Hypergraph probe = tmpl;
        for (Edge& e : probe.edges) e.lambda = lambda;
        const StabilityVerdict v = classify_stability(probe, JsqPolicy{}, cfg);
        std::printf("  lambda = %.2f -> %s (slope %.4f, regenerations %lld)\n", lambda,
                    to_string(v.label), v.growth_slope,
                    static_cast<long long>(v.regeneration_count));
    }
    return 0;
}
