#include <catch2/catch_amalgamated.hpp>

#include "mixdag/graph.hpp"
#include "mixdag/mixture.hpp"
#include "mixdag/reference.hpp"
#include "mixdag/rng.hpp"
#include "test_helpers.hpp"

using namespace mixdag;

TEST_CASE("dag construction rejects cycles and self-loops", "[graph]") {
    CHECK_THROWS_AS(Dag(3, {{0, 1}, {1, 2}, {2, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(Dag(2, {{0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(Dag(2, {{0, 3}}), std::invalid_argument);
    CHECK_NOTHROW(Dag(3, {{0, 1}, {0, 2}, {1, 2}}));

    Rng rng(11);
    int rejected = 0;
    for (int t = 0; t < 200; ++t) {
        const int n = 3 + static_cast<int>(rng.below(4));
        Dag base = test::random_dag(n, 0.4, rng);
        if (base.edges().empty()) continue;
        // reverse one edge and add the original back: guaranteed 2-cycle
        auto edges = base.edges();
        const auto [u, v] = edges[rng.below(edges.size())];
        edges.emplace_back(v, u);
        CHECK_THROWS_AS(Dag(n, edges), std::invalid_argument);
        ++rejected;
    }
    CHECK(rejected > 100);
}

TEST_CASE("mixed graph enforces one edge per pair", "[graph]") {
    CHECK_THROWS_AS(MixedGraph(3, {{0, 1}}, {{0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(MixedGraph(3, {{0, 1}, {1, 0}}, {}), std::invalid_argument);
    MixedGraph g(3, {{0, 1}}, {{1, 2}});
    CHECK(g.adjacent(0, 1));
    CHECK(g.adjacent(2, 1));
    CHECK_FALSE(g.adjacent(0, 2));
    CHECK(g.has_bidirected(2, 1));
}

TEST_CASE("ancestors include the node itself", "[graph]") {
    // the running example's first component: 1 -> 2 (0-based 0 -> 1)
    Dag d1(4, {{0, 1}});
    CHECK(ancestors(d1, 1) == NodeSet{0, 1});
    CHECK(ancestors(d1, 2) == NodeSet{2});  // isolated node
    CHECK_THROWS_AS(ancestors(d1, 9), std::invalid_argument);
}

TEST_CASE("ancestors agree with directed-path enumeration", "[graph]") {
    Rng rng(23);
    for (int t = 0; t < 50; ++t) {
        Dag g = test::random_dag(8, 0.3, rng);
        const auto anc = ancestor_matrix(g);
        // brute force: directed-path closure by repeated edge relaxation
        std::vector<std::vector<char>> reach(8, std::vector<char>(8, 0));
        for (int v = 0; v < 8; ++v) reach[v][v] = 1;
        bool grown = true;
        while (grown) {
            grown = false;
            for (const auto& [u, v] : g.edges())
                for (int s = 0; s < 8; ++s)
                    if (reach[s][u] && !reach[s][v]) {
                        reach[s][v] = 1;
                        grown = true;
                    }
        }
        for (int v = 0; v < 8; ++v)
            for (int u = 0; u < 8; ++u) CHECK(static_cast<bool>(anc[v][u]) == static_cast<bool>(reach[u][v]));
    }
}

TEST_CASE("ancestors are transitive", "[graph]") {
    Rng rng(5);
    for (int t = 0; t < 30; ++t) {
        Dag g = test::random_dag(7, 0.35, rng);
        const auto anc = ancestor_matrix(g);
        for (int w = 0; w < 7; ++w)
            for (int v = 0; v < 7; ++v)
                for (int u = 0; u < 7; ++u)
                    if (anc[v][u] && anc[w][v]) CHECK(anc[w][u]);
    }
}

TEST_CASE("topological order", "[graph]") {
    CHECK(topological_order(Dag(3, {{0, 1}, {1, 2}})) == std::vector<NodeId>{0, 1, 2});
    CHECK(topological_order(Dag(3)) == std::vector<NodeId>{0, 1, 2});

    auto [dmu, y] = mixture_dag(test::running_example_spec());
    const auto order = topological_order(dmu);
    std::vector<int> pos(dmu.node_count());
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
    for (NodeId c : dmu.children(y)) CHECK(pos[y] < pos[c]);
}

TEST_CASE("induced subgraph keeps exactly the inner edges", "[graph]") {
    auto [dmu, y] = mixture_dag(test::running_example_spec());
    // component 1 copies {0,1,2,3} plus y=8
    auto sub = induced_subgraph(dmu, NodeSet{0, 1, 2, 3, 8});
    CHECK(sub.graph.node_count() == 5);
    CHECK(sub.graph.edges() == std::vector<Edge>{{0, 1}, {4, 1}, {4, 2}});
    CHECK(sub.original == std::vector<NodeId>{0, 1, 2, 3, 8});

    NodeSet all;
    for (NodeId v = 0; v < dmu.node_count(); ++v) all.push_back(v);
    CHECK(induced_subgraph(dmu, all).graph == dmu);
    CHECK(induced_subgraph(dmu, NodeSet{}).graph.node_count() == 0);
    CHECK_THROWS_AS(induced_subgraph(dmu, NodeSet{99}), std::invalid_argument);
}

TEST_CASE("induced subgraph on all nodes is the identity for random dags", "[graph]") {
    Rng rng(31);
    for (int t = 0; t < 20; ++t) {
        Dag g = test::random_dag(6, 0.4, rng);
        NodeSet all{0, 1, 2, 3, 4, 5};
        CHECK(induced_subgraph(g, all).graph == g);
    }
}
