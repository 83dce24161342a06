#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "gegcn/errors.hpp"
#include "gegcn/flow.hpp"
#include "test_support.hpp"

using namespace gegcn;
using namespace gegcn::test;

namespace {

FlowConfig exact_cfg(int T, double delta, double alpha = 0.0) {
    FlowConfig cfg;
    cfg.T = T;
    cfg.delta = delta;
    cfg.alpha = alpha;
    cfg.method = TransportMethod::exact;
    return cfg;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("flow_step arithmetic") {
    auto g = add_self_loops(two_node_edge());
    DistanceOracle oracle(g);
    auto rho = edge_distances(g, oracle);
    CurvatureField field;
    field.weights_token = g.weights_token();
    field.kappa.assign(static_cast<std::size_t>(g.edge_count()), 0.0);
    FlowConfig cfg = exact_cfg(1, 0.2);
    const EdgeId e01 = *g.find_edge(0, 1);

    SUBCASE("zero curvature is a fixed point") {
        auto next = flow_step(g, field, rho, cfg);
        CHECK(next == g.weights());
    }
    SUBCASE("direct substitution") {
        field.kappa[static_cast<std::size_t>(e01)] = 0.5;
        auto next = flow_step(g, field, rho, cfg);
        CHECK(next[static_cast<std::size_t>(e01)] == doctest::Approx(0.9).epsilon(1e-15));
    }
    SUBCASE("negative curvature expands") {
        field.kappa[static_cast<std::size_t>(e01)] = -1.0;
        auto next = flow_step(g, field, rho, cfg);
        CHECK(next[static_cast<std::size_t>(e01)] == doctest::Approx(1.2).epsilon(1e-15));
    }
    SUBCASE("self-loops untouched") {
        field.kappa[static_cast<std::size_t>(e01)] = 0.5;
        auto next = flow_step(g, field, rho, cfg);
        CHECK(next[static_cast<std::size_t>(*g.find_edge(0, 0))] == 1.0);
        CHECK(next[static_cast<std::size_t>(*g.find_edge(1, 1))] == 1.0);
    }
    SUBCASE("clamped at w_min") {
        field.kappa[static_cast<std::size_t>(e01)] = 0.9;
        cfg.delta = 10.0;
        auto next = flow_step(g, field, rho, cfg);
        CHECK(next[static_cast<std::size_t>(e01)] == cfg.w_min);
    }
    SUBCASE("stale curvature refused") {
        auto g2 = g.with_weights([&] {
            auto w = g.weights();
            w[static_cast<std::size_t>(e01)] = 2.0;
            return w;
        }());
        CHECK_THROWS_AS(flow_step(g2, field, rho, cfg), StalenessError);
    }
}

TEST_CASE("run_flow on the triangle matches the hand-derived trajectory") {
    auto g = add_self_loops(triangle());
    auto seq = run_flow(g, exact_cfg(1, 0.2));
    CHECK(seq.T == 1);
    for (EdgeId e = 0; e < seq.edge_count(); ++e) {
        const auto& k = seq.kappa[static_cast<std::size_t>(e)];
        const auto& w = seq.weight[static_cast<std::size_t>(e)];
        REQUIRE(k.size() == 2);
        REQUIRE(w.size() == 2);
        if (seq.edges[static_cast<std::size_t>(e)].is_loop()) {
            CHECK(k == std::vector<double>{0.0, 0.0});
            CHECK(w == std::vector<double>{1.0, 1.0});
        } else {
            CHECK(k[0] == doctest::Approx(0.5).epsilon(1e-12));
            CHECK(w[0] == 1.0);
            CHECK(w[1] == doctest::Approx(0.9).epsilon(1e-12));
        }
    }
}

TEST_CASE("run_flow preconditions") {
    CHECK_THROWS_AS(run_flow(triangle(), exact_cfg(1, 0.2)), ValidationError);  // no self-loops
    auto bad = WeightedGraph::build(2, {{0, 0, 2.0}, {1, 1, 1.0}, {0, 1, 1.0}});
    CHECK_THROWS_AS(run_flow(bad, exact_cfg(1, 0.2)), ValidationError);  // loop weight != 1
    auto g = add_self_loops(triangle());
    FlowConfig cfg = exact_cfg(0, 0.2);
    CHECK_THROWS_AS(run_flow(g, cfg), ValidationError);  // T < 1
}

TEST_CASE("flow invariants on random graphs") {
    Rng rng(404);
    for (int trial = 0; trial < 6; ++trial) {
        auto g = add_self_loops(random_connected_graph(rng, 16, true));
        FlowConfig cfg = exact_cfg(4, 0.2, 0.5);
        auto seq = run_flow(g, cfg);

        CHECK(seq.edges == g.edges());  // topology preserved
        for (EdgeId e = 0; e < seq.edge_count(); ++e) {
            const auto& k = seq.kappa[static_cast<std::size_t>(e)];
            const auto& w = seq.weight[static_cast<std::size_t>(e)];
            for (int t = 0; t <= cfg.T; ++t) {
                CHECK(w[static_cast<std::size_t>(t)] >= cfg.w_min);
            }
            if (seq.edges[static_cast<std::size_t>(e)].is_loop()) continue;
            // positively curved, unclamped edges strictly shrink; the 1e-12
            // floor skips kappa values that are rounding residue of an exact
            // zero, whose update would fall below one ulp of the weight
            for (int t = 0; t < cfg.T; ++t) {
                if (k[static_cast<std::size_t>(t)] > 1e-12 && w[static_cast<std::size_t>(t + 1)] > cfg.w_min) {
                    CHECK(w[static_cast<std::size_t>(t + 1)] < w[static_cast<std::size_t>(t)]);
                }
            }
        }
    }
}

TEST_CASE("flow is deterministic bit for bit") {
    Rng rng(505);
    auto g = add_self_loops(random_connected_graph(rng, 14, true));
    FlowConfig cfg;
    cfg.T = 3;
    cfg.delta = 0.5;
    cfg.method = TransportMethod::sinkhorn;
    cfg.workers = 4;
    auto s1 = run_flow(g, cfg);
    auto s2 = run_flow(g, cfg);
    CHECK(s1.kappa == s2.kappa);
    CHECK(s1.weight == s2.weight);
}

TEST_CASE("kernels coincide on trees where rho equals w") {
    Rng rng(606);
    auto g = add_self_loops(random_connected_graph(rng, 12, true, 0.0));  // spanning tree only
    FlowConfig ma = exact_cfg(3, 0.1, 0.5);
    FlowConfig ol = ma;
    ol.kernel = FlowKernel::ollivier;
    auto s1 = run_flow(g, ma);
    auto s2 = run_flow(g, ol);
    for (EdgeId e = 0; e < s1.edge_count(); ++e) {
        for (int t = 0; t <= 3; ++t) {
            CHECK(s1.weight[static_cast<std::size_t>(e)][static_cast<std::size_t>(t)] ==
                  doctest::Approx(s2.weight[static_cast<std::size_t>(e)][static_cast<std::size_t>(t)]).epsilon(1e-12));
        }
    }
}

TEST_CASE("sequence persistence") {
    TempDir dir("seq");
    auto g = add_self_loops(triangle());
    auto seq = run_flow(g, exact_cfg(2, 0.2));
    const auto p = dir.file("tri.jsonl");
    save_sequence(seq, p);

    SUBCASE("round trip is bit-exact") {
        auto back = load_sequence(p);
        CHECK(back.T == seq.T);
        CHECK(back.edges == seq.edges);
        CHECK(back.kappa == seq.kappa);
        CHECK(back.weight == seq.weight);
        CHECK(back.graph_sha256 == seq.graph_sha256);
        CHECK_NOTHROW(validate_sequence(back, g));
    }
    SUBCASE("rerun writes byte-identical files") {
        const auto p2 = dir.file("tri2.jsonl");
        save_sequence(run_flow(g, exact_cfg(2, 0.2)), p2);
        CHECK(slurp(p) == slurp(p2));
    }
    SUBCASE("wrong graph is refused") {
        auto other = add_self_loops(path_graph(3));
        auto back = load_sequence(p);
        CHECK_THROWS_AS(validate_sequence(back, other), ValidationError);
    }
    SUBCASE("sample-count mismatch is corrupt") {
        std::string text = slurp(p);
        // manifest claims T=2 (3 samples); rewrite one record with 2 samples
        auto lines_end = text.find('\n');
        std::string manifest = text.substr(0, lines_end);
        std::string rest = text.substr(lines_end + 1);
        auto second_end = rest.find('\n');
        std::string tampered = manifest + "\n" +
                               R"({"u":0,"v":0,"kappa":[0.0,0.0],"weight":[1.0,1.0]})" + "\n" +
                               rest.substr(second_end + 1);
        write_file(dir.file("bad.jsonl"), tampered);
        CHECK_THROWS_AS(load_sequence(dir.file("bad.jsonl")), FormatError);
    }
    SUBCASE("truncated final line is corrupt") {
        std::string text = slurp(p);
        write_file(dir.file("trunc.jsonl"), text.substr(0, text.size() - 20));
        CHECK_THROWS_AS(load_sequence(dir.file("trunc.jsonl")), FormatError);
    }
    SUBCASE("bad magic is refused") {
        write_file(dir.file("magic.jsonl"), R"({"magic":"nope","version":1})" "\n");
        CHECK_THROWS_AS(load_sequence(dir.file("magic.jsonl")), FormatError);
    }
    SUBCASE("version mismatch is refused") {
        std::string text = slurp(p);
        auto pos = text.find("\"version\":1");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 11, "\"version\":9");
        write_file(dir.file("ver.jsonl"), text);
        CHECK_THROWS_AS(load_sequence(dir.file("ver.jsonl")), FormatError);
    }
}

TEST_CASE("sequence_stats") {
    auto g = add_self_loops(triangle());
    auto seq = run_flow(g, exact_cfg(1, 0.2));
    auto stats = sequence_stats(seq);
    REQUIRE(stats.size() == 2);
    CHECK(stats[0].kappa_mean == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(stats[0].kappa_min == doctest::Approx(stats[0].kappa_max).epsilon(1e-12));
    CHECK(stats[0].weight_mean == 1.0);
    CHECK(stats[0].clamped == 0);
    CHECK(stats[1].clamped == 0);
    CHECK(stats[1].weight_mean == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("renormalization flag keeps total non-loop weight constant") {
    auto g = add_self_loops(triangle());
    FlowConfig cfg = exact_cfg(3, 0.4);
    cfg.renormalize_total_weight = true;
    auto seq = run_flow(g, cfg);
    for (int t = 0; t <= cfg.T; ++t) {
        double total = 0.0;
        for (EdgeId e = 0; e < seq.edge_count(); ++e) {
            if (!seq.edges[static_cast<std::size_t>(e)].is_loop()) {
                total += seq.weight[static_cast<std::size_t>(e)][static_cast<std::size_t>(t)];
            }
        }
        CHECK(total == doctest::Approx(3.0).epsilon(1e-9));
    }
}
