#include <hyperjsq/generators.hpp>
#include <hyperjsq/io.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace hyperjsq;

TEST_CASE("hypergraph serialization round-trips exactly") {
    const Hypergraph h = gen_cycle(3, 1.0, 1.0);
    const std::string text = serialize(h);
    CHECK(parse_hypergraph(text) == h);
    CHECK(serialize(h) == text);  // byte-stable

    Xoshiro256StarStar rng(7);
    for (int i = 0; i < 25; ++i) {
        const Hypergraph g = testutil::random_hypergraph(rng);
        CHECK(parse_hypergraph(serialize(g)) == g);
    }
}

TEST_CASE("hypergraph parser reports locations") {
    CHECK_THROWS_AS(parse_hypergraph("not json"), ParseError);

    const std::string negative_mu = R"({"vertices":[{"id":0,"mu":1.0},{"id":1,"mu":-2.0}],
        "edges":[{"id":0,"members":[0,1],"lambda":1.0}]})";
    CHECK_THROWS_WITH(parse_hypergraph(negative_mu),
                      Catch::Matchers::ContainsSubstring("vertex 1"));

    const std::string dup_member = R"({"vertices":[{"id":0,"mu":1.0},{"id":1,"mu":1.0}],
        "edges":[{"id":0,"members":[0,0],"lambda":1.0}]})";
    CHECK_THROWS_WITH(parse_hypergraph(dup_member),
                      Catch::Matchers::ContainsSubstring("duplicate member"));

    const std::string unknown_field = R"({"vertices":[{"id":0,"mu":1.0,"name":"a"}],
        "edges":[{"id":0,"members":[0],"lambda":1.0}]})";
    CHECK_THROWS_WITH(parse_hypergraph(unknown_field),
                      Catch::Matchers::ContainsSubstring("unknown field"));

    const std::string extra_root = R"({"vertices":[],"edges":[],"comment":"hi"})";
    CHECK_THROWS_WITH(parse_hypergraph(extra_root),
                      Catch::Matchers::ContainsSubstring("unknown field"));

    const std::string gap_ids = R"({"vertices":[{"id":0,"mu":1.0},{"id":2,"mu":1.0}],
        "edges":[{"id":0,"members":[0],"lambda":1.0}]})";
    CHECK_THROWS_WITH(parse_hypergraph(gap_ids),
                      Catch::Matchers::ContainsSubstring("dense"));

    const std::string missing = R"({"vertices":[{"id":0}],
        "edges":[{"id":0,"members":[0],"lambda":1.0}]})";
    CHECK_THROWS_WITH(parse_hypergraph(missing),
                      Catch::Matchers::ContainsSubstring("missing field"));

    // lenient mode builds the object so validate() can collect violations
    const Hypergraph lenient = parse_hypergraph(negative_mu, false);
    CHECK(validate(lenient).size() == 1);
}

TEST_CASE("allocation serialization round-trips and validates") {
    const Hypergraph h = gen_cycle(4, 1.0, 1.0);
    const StaticAllocation P = uniform_allocation(h);
    const std::string text = serialize_allocation(h, P);
    CHECK(parse_allocation(text, h) == P);

    CHECK_THROWS_WITH(
        parse_allocation(R"({"allocations":[{"edge":9,"p":{"0":1.0}}]})", h),
        Catch::Matchers::ContainsSubstring("unknown edge"));
    CHECK_THROWS_WITH(
        parse_allocation(R"({"allocations":[{"edge":0,"p":{"2":1.0}}]})", h),
        Catch::Matchers::ContainsSubstring("not a member"));
    const std::string bad_sum = R"({"allocations":[
        {"edge":0,"p":{"0":0.5,"1":0.2}},{"edge":1,"p":{"1":0.5,"2":0.5}},
        {"edge":2,"p":{"2":0.5,"3":0.5}},{"edge":3,"p":{"3":0.5,"0":0.5}}]})";
    CHECK_THROWS_WITH(parse_allocation(bad_sum, h),
                      Catch::Matchers::ContainsSubstring("sum"));
    CHECK_THROWS_WITH(parse_allocation(R"({"allocations":[]})", h),
                      Catch::Matchers::ContainsSubstring("missing entry"));
}

TEST_CASE("optimization result and drift report round-trip") {
    const Hypergraph h = gen_clique_with_leaves(4, 1.0, 1.0);
    const OptimizationResult r = optimize_allocation(h);
    const OptimizationResult back = parse_optimization(serialize_optimization(h, r), h);
    CHECK(back.z_star == r.z_star);
    REQUIRE(back.lambda_star.has_value());
    CHECK(*back.lambda_star == *r.lambda_star);
    CHECK(back.allocation == r.allocation);
    REQUIRE(back.certificate.has_value());
    CHECK(*back.certificate == *r.certificate);

    DriftReport d;
    d.exact = -7.0;
    d.bound = -3.5;
    d.c = 4.0;
    d.epsilon = 0.25;
    d.threshold = 10.0;
    const DriftReport dback = parse_drift_report(serialize_drift_report(d));
    CHECK(dback.exact == d.exact);
    CHECK(dback.bound == d.bound);
    CHECK(dback.c == d.c);
    CHECK(dback.epsilon == d.epsilon);
    CHECK(dback.threshold == d.threshold);
}

TEST_CASE("metrics serialize to json and csv") {
    const Hypergraph h = gen_cycle(3, 0.5, 1.0);
    SimConfig cfg;
    cfg.horizon = 500.0;
    cfg.warmup = 50.0;
    cfg.seed = 11;
    cfg.sample_interval = 10.0;
    const SimMetrics m = simulate(h, cfg);

    const SimMetrics back = parse_metrics(serialize_metrics(h, m), h);
    CHECK(back.time_avg_queue == m.time_avg_queue);
    CHECK(back.busy_fraction == m.busy_fraction);
    CHECK(back.routing_fraction == m.routing_fraction);
    CHECK(back.growth_slope == m.growth_slope);
    CHECK(back.event_count == m.event_count);
    CHECK(back.final_state == m.final_state);
    CHECK(back.total_queue_samples == m.total_queue_samples);

    const std::string series = metrics_series_csv(m);
    CHECK(series.rfind("t,total_queue\n", 0) == 0);
    const std::string summary = metrics_summary_csv(m);
    CHECK(summary.rfind("vertex,time_avg_queue,busy_fraction\n", 0) == 0);
    // one row per vertex plus header
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 4);
}

TEST_CASE("neighborhood document parses") {
    const Hypergraph h = parse_neighborhood(
        R"({"adjacency":[[1],[0],[]],"lambda":[1.0,2.0,3.0],"mu":[1.0,1.0,1.0]})");
    REQUIRE(h.edge_count() == 3);
    CHECK(h.edges[2].members == std::vector<VertexId>{2});
    CHECK_THROWS_AS(
        parse_neighborhood(R"({"adjacency":[[1],[]],"lambda":[1,1],"mu":[1,1]})"),
        ParseError);
}

TEST_CASE("state csv parser") {
    CHECK(parse_state_csv("2,5,0", 3) == QueueState{2, 5, 0});
    CHECK_THROWS_AS(parse_state_csv("2,5", 3), ParseError);
    CHECK_THROWS_AS(parse_state_csv("2,-1,0", 3), ParseError);
    CHECK_THROWS_AS(parse_state_csv("2,x,0", 3), ParseError);
}
