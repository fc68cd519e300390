#include <hyperjsq/generators.hpp>
#include <hyperjsq/optimization.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace hyperjsq;

using Catch::Matchers::WithinAbs;

namespace {

/// Best hand-built allocation for clique-with-leaves: equalize across the
/// clique, send all leaf-edge traffic to the leaf.
StaticAllocation clique_leaves_best(const Hypergraph& h, std::uint32_t k) {
    StaticAllocation P;
    const std::size_t clique_edges = static_cast<std::size_t>(k) * (k - 1) / 2;
    for (std::size_t e = 0; e < h.edges.size(); ++e) {
        if (e < clique_edges) {
            P.probs.push_back({0.5, 0.5});
        } else {
            P.probs.push_back({0.0, 1.0});  // members are {clique vertex, leaf}
        }
    }
    return P;
}

double subset_density(const Hypergraph& h, const std::vector<EdgeId>& subset) {
    double rate = 0.0, capacity = 0.0;
    std::vector<bool> seen(h.vertex_count(), false);
    for (EdgeId e : subset) {
        rate += h.edges[e].lambda;
        for (VertexId v : h.edges[e].members) {
            if (!seen[v]) {
                seen[v] = true;
                capacity += h.mu[v];
            }
        }
    }
    return rate / capacity;
}

}  // namespace

TEST_CASE("vertex_load sums edge contributions") {
    const Hypergraph cycle = gen_cycle(4, 1.0, 1.0);
    const LoadProfile lp = vertex_load(cycle, uniform_allocation(cycle));
    for (double l : lp.lambda) CHECK_THAT(l, WithinAbs(1.0, 1e-12));
    for (double r : lp.rho) CHECK_THAT(r, WithinAbs(1.0, 1e-12));

    Hypergraph single;
    single.mu = {1.0, 1.0};
    single.edges = {{0, {0, 1}, 2.0}};
    StaticAllocation degenerate;
    degenerate.probs = {{1.0, 0.0}};
    const LoadProfile dlp = vertex_load(single, degenerate);
    CHECK(dlp.lambda == std::vector<double>{2.0, 0.0});

    const Hypergraph cl = gen_clique_with_leaves(4, 1.0, 1.0);
    const LoadProfile clp = vertex_load(cl, clique_leaves_best(cl, 4));
    for (VertexId v = 0; v < 4; ++v) CHECK_THAT(clp.lambda[v], WithinAbs(1.5, 1e-12));
    for (VertexId v = 4; v < 8; ++v) CHECK_THAT(clp.lambda[v], WithinAbs(1.0, 1e-12));
}

TEST_CASE("vertex_load rejects structurally invalid allocations") {
    const Hypergraph h = gen_cycle(3, 1.0, 1.0);
    StaticAllocation wrong_count;
    wrong_count.probs = {{0.5, 0.5}};
    CHECK_THROWS_AS(vertex_load(h, wrong_count), std::invalid_argument);

    StaticAllocation bad_sum = uniform_allocation(h);
    bad_sum.probs[1] = {0.7, 0.7};
    CHECK_THROWS_AS(vertex_load(h, bad_sum), std::invalid_argument);

    StaticAllocation negative = uniform_allocation(h);
    negative.probs[0] = {1.5, -0.5};
    CHECK_THROWS_AS(vertex_load(h, negative), std::invalid_argument);
}

TEST_CASE("is_stable_static requires strict inequality") {
    const Hypergraph stable = gen_cycle(4, 0.9, 1.0);
    CHECK(is_stable_static(stable, uniform_allocation(stable)).first);

    const Hypergraph boundary = gen_cycle(4, 1.0, 1.0);
    auto [ok, lp] = is_stable_static(boundary, uniform_allocation(boundary));
    CHECK_FALSE(ok);  // rho = 1 is not stable
    CHECK_THAT(lp.max_rho(), WithinAbs(1.0, 1e-12));

    const Hypergraph cl = gen_clique_with_leaves(4, 1.0, 1.0);
    CHECK_FALSE(is_stable_static(cl, clique_leaves_best(cl, 4)).first);
}

TEST_CASE("is_balanced compares normalized loads") {
    const Hypergraph cycle = gen_cycle(5, 1.0, 1.0);
    CHECK(is_balanced(cycle, uniform_allocation(cycle), 1e-9));

    const Hypergraph cl = gen_clique_with_leaves(4, 1.0, 1.0);
    CHECK_FALSE(is_balanced(cl, clique_leaves_best(cl, 4), 1e-9));

    Hypergraph singleton;
    singleton.mu = {2.0};
    singleton.edges = {{0, {0}, 1.0}};
    StaticAllocation p1;
    p1.probs = {{1.0}};
    CHECK(is_balanced(singleton, p1, 1e-9));
}

TEST_CASE("optimize_allocation on the single edge splits evenly") {
    Hypergraph h;
    h.mu = {1.0, 1.0};
    h.edges = {{0, {0, 1}, 1.0}};
    const OptimizationResult r = optimize_allocation(h);
    CHECK_THAT(r.z_star, WithinAbs(0.5, 1e-9));
    CHECK_THAT(r.allocation.probs[0][0], WithinAbs(0.5, 1e-9));
    CHECK_THAT(r.allocation.probs[0][1], WithinAbs(0.5, 1e-9));
}

TEST_CASE("optimize_allocation finds the clique-with-leaves capacity loss") {
    const Hypergraph h = gen_clique_with_leaves(4, 1.0, 1.0);
    const OptimizationResult r = optimize_allocation(h);
    CHECK_THAT(r.z_star, WithinAbs(1.5, 1e-9));
    REQUIRE(r.lambda_star.has_value());
    CHECK_THAT(*r.lambda_star, WithinAbs(2.0 / 3.0, 1e-9));
    REQUIRE(r.certificate.has_value());
    CHECK(*r.certificate == std::vector<EdgeId>{0, 1, 2, 3, 4, 5});  // the clique edges
    // the certificate achieves the optimum
    CHECK_THAT(subset_density(h, *r.certificate), WithinAbs(r.z_star, 1e-12));
}

TEST_CASE("optimize_allocation output is feasible and deterministic") {
    Xoshiro256StarStar rng(99);
    for (int i = 0; i < 20; ++i) {
        const Hypergraph h = testutil::random_hypergraph(rng);
        const OptimizationResult r = optimize_allocation(h);
        check_allocation(h, r.allocation);  // throws on structural problems
        const LoadProfile lp = vertex_load(h, r.allocation);
        CHECK(lp.max_rho() <= r.z_star + 1e-6);

        const OptimizationResult again = optimize_allocation(h);
        CHECK(again.z_star == r.z_star);
        CHECK(again.allocation == r.allocation);
    }
}

TEST_CASE("optimize_allocation matches the subset-density oracle") {
    Xoshiro256StarStar rng(123);
    for (int i = 0; i < 20; ++i) {
        const Hypergraph h = testutil::random_hypergraph(rng);
        const double lp = optimize_allocation(h).z_star;
        const double oracle = critical_density(h).z;
        CHECK_THAT(lp, WithinAbs(oracle, 1e-6));
    }
}

TEST_CASE("every edge subset gives a lower bound on z_star") {
    Xoshiro256StarStar rng(321);
    for (int i = 0; i < 20; ++i) {
        const Hypergraph h = testutil::random_hypergraph(rng);
        const double z = optimize_allocation(h).z_star;
        for (int s = 0; s < 10; ++s) {
            std::vector<EdgeId> subset;
            for (EdgeId e = 0; e < h.edge_count(); ++e) {
                if (rng.bounded(2) == 1) subset.push_back(e);
            }
            if (subset.empty()) subset.push_back(0);
            CHECK(subset_density(h, subset) <= z + 1e-6);
        }
    }
}

TEST_CASE("adding an edge never decreases z_star") {
    Xoshiro256StarStar rng(555);
    for (int i = 0; i < 15; ++i) {
        Hypergraph h = testutil::random_hypergraph(rng);
        const double before = optimize_allocation(h).z_star;
        Edge extra;
        extra.id = static_cast<EdgeId>(h.edge_count());
        extra.members = {static_cast<VertexId>(rng.bounded(h.vertex_count()))};
        extra.lambda = 0.5;
        h.edges.push_back(extra);
        const double after = optimize_allocation(h).z_star;
        CHECK(after >= before - 1e-9);
    }

    // capacity loss: the clique-with-leaves optimum strictly exceeds the
    // resource-pooled level |E|/|V| once k > 3 (and equals it at k = 3)
    for (std::uint32_t k = 4; k <= 6; ++k) {
        const Hypergraph cl = gen_clique_with_leaves(k, 1.0, 1.0);
        const double z = optimize_allocation(cl).z_star;
        const double pooled = static_cast<double>(cl.edge_count()) /
                              static_cast<double>(cl.vertex_count());
        CHECK(z > pooled + 0.1);
        CHECK_THAT(z, WithinAbs((k - 1) / 2.0, 1e-9));
    }
    const Hypergraph cl3 = gen_clique_with_leaves(3, 1.0, 1.0);
    CHECK_THAT(optimize_allocation(cl3).z_star, WithinAbs(1.0, 1e-9));
}

TEST_CASE("z_star scales linearly in lambda and inversely in mu") {
    Xoshiro256StarStar rng(777);
    for (int i = 0; i < 10; ++i) {
        const Hypergraph h = testutil::random_hypergraph(rng);
        const double z = optimize_allocation(h).z_star;
        const double alpha = 0.25 + 2.0 * rng.uniform01();

        Hypergraph scaled_lambda = h;
        for (Edge& e : scaled_lambda.edges) e.lambda *= alpha;
        CHECK_THAT(optimize_allocation(scaled_lambda).z_star,
                   WithinAbs(alpha * z, 1e-6 * (1.0 + alpha * z)));

        Hypergraph scaled_mu = h;
        for (double& m : scaled_mu.mu) m *= alpha;
        CHECK_THAT(optimize_allocation(scaled_mu).z_star,
                   WithinAbs(z / alpha, 1e-6 * (1.0 + z / alpha)));
    }
}

TEST_CASE("singleton edges force probability one, zero-rate edges stay") {
    Hypergraph h;
    h.mu = {1.0, 2.0};
    h.edges = {{0, {0}, 0.4}, {1, {0, 1}, 0.0}};
    const OptimizationResult r = optimize_allocation(h);
    CHECK_THAT(r.allocation.probs[0][0], WithinAbs(1.0, 1e-12));
    REQUIRE(r.allocation.probs[1].size() == 2);
    double sum = r.allocation.probs[1][0] + r.allocation.probs[1][1];
    CHECK_THAT(sum, WithinAbs(1.0, 1e-9));
    CHECK_THAT(r.z_star, WithinAbs(0.4, 1e-9));
}

TEST_CASE("balanced symmetric allocations pool resources") {
    // when all rho_v are equal in the unit-rate symmetric case they must
    // equal |E| / (|V| mu)
    for (const Hypergraph& h :
         {gen_cycle(5, 1.0, 2.0), gen_complete_graph(4, 1.0, 2.0)}) {
        const StaticAllocation P = uniform_allocation(h);
        REQUIRE(is_balanced(h, P, 1e-9));
        const LoadProfile lp = vertex_load(h, P);
        const double expected = static_cast<double>(h.edge_count()) /
                                (static_cast<double>(h.vertex_count()) * h.mu.front());
        for (double r : lp.rho) CHECK_THAT(r, WithinAbs(expected, 1e-12));
    }
}

TEST_CASE("critical_density on the reference graphs") {
    const Hypergraph cl = gen_clique_with_leaves(4, 1.0, 1.0);
    const DensityResult d = critical_density(cl);
    CHECK_THAT(d.z, WithinAbs(1.5, 1e-12));
    CHECK(d.subset == std::vector<EdgeId>{0, 1, 2, 3, 4, 5});

    Hypergraph single;
    single.mu = {1.0, 3.0};
    single.edges = {{0, {0, 1}, 2.0}};
    CHECK_THAT(critical_density(single).z, WithinAbs(0.5, 1e-12));

    const Hypergraph k4 = gen_complete_graph(4, 1.0, 1.0);
    const DensityResult dk = critical_density(k4);
    CHECK_THAT(dk.z, WithinAbs(1.5, 1e-12));
    CHECK(dk.subset.size() == 6);  // all edges
}

TEST_CASE("critical_density tie-break picks the lexicographically smallest subset") {
    Hypergraph h;
    h.mu = {1.0, 1.0};
    h.edges = {{0, {0}, 1.0}, {1, {1}, 1.0}};
    // {0}, {1}, and {0,1} all have density 1
    const DensityResult d = critical_density(h);
    CHECK_THAT(d.z, WithinAbs(1.0, 1e-12));
    CHECK(d.subset == std::vector<EdgeId>{0});
}

TEST_CASE("critical_density refuses large edge sets") {
    const Hypergraph big = gen_complete_graph(7, 1.0, 1.0);  // 21 edges
    REQUIRE(big.edge_count() == 21);
    CHECK_THROWS_WITH(critical_density(big),
                      Catch::Matchers::ContainsSubstring("oracle limit"));
    CHECK_THROWS_AS(critical_density(big), LimitError);
    // optimize still works, just without a certificate
    const OptimizationResult r = optimize_allocation(big);
    CHECK_FALSE(r.certificate.has_value());
    CHECK_THAT(r.z_star, WithinAbs(3.0, 1e-9));
}

TEST_CASE("max_symmetric_rate matches the closed forms") {
    CHECK_THAT(max_symmetric_rate(gen_clique_with_leaves(4, 1.0, 1.0)),
               WithinAbs(2.0 / 3.0, 1e-9));
    for (std::uint32_t n = 3; n <= 7; ++n) {
        CHECK_THAT(max_symmetric_rate(gen_cycle(n, 1.0, 1.0)), WithinAbs(1.0, 1e-9));
    }
    // rate is independent of the template's own lambda
    CHECK_THAT(max_symmetric_rate(gen_clique_with_leaves(4, 7.5, 1.0)),
               WithinAbs(2.0 / 3.0, 1e-9));
    // total stable rate for k = 4: lambda_star * k(k+1)/2 = k(k+1)/(k-1)
    const double total = max_symmetric_rate(gen_clique_with_leaves(4, 1.0, 1.0)) * 10.0;
    CHECK_THAT(total, WithinAbs(20.0 / 3.0, 1e-9));

    Hypergraph asym = gen_cycle(4, 1.0, 1.0);
    asym.mu[1] = 2.0;
    CHECK_THROWS_WITH(max_symmetric_rate(asym),
                      Catch::Matchers::ContainsSubstring("symmetric"));
}
