#include <catch2/catch_amalgamated.hpp>

#include "mixdag/marginal.hpp"
#include "mixdag/mixture.hpp"
#include "mixdag/reference.hpp"
#include "mixdag/sem.hpp"
#include "mixdag/separation.hpp"
#include "test_helpers.hpp"

using namespace mixdag;

TEST_CASE("marginalizing the component sub-DAGs of the running example", "[marginal]") {
    // component 1: 1->2 plus y->2, y->3 over {1,2,3,4,y}; 0-based y = 4
    Dag d1(5, {{0, 1}, {4, 1}, {4, 2}});
    MixedGraph m1 = marginalize_root(d1, 4);
    CHECK(m1 == MixedGraph(4, {{0, 1}}, {{1, 2}}));

    Dag d2(5, {{3, 2}, {4, 1}, {4, 2}});
    MixedGraph m2 = marginalize_root(d2, 4);
    CHECK(m2 == MixedGraph(4, {{3, 2}}, {{1, 2}}));
}

TEST_CASE("marginalization validation and trivial cases", "[marginal]") {
    Dag d(3, {{0, 1}});
    CHECK_THROWS_AS(marginalize_root(d, 1), std::invalid_argument);  // in-degree 1
    CHECK_THROWS_AS(marginalize_root(d, 7), std::invalid_argument);

    // y with no children: output is d minus y, unchanged
    Dag d2(4, {{0, 1}, {1, 2}});
    MixedGraph m = marginalize_root(d2, 3);
    CHECK(m == MixedGraph(3, {{0, 1}, {1, 2}}, {}));
}

TEST_CASE("directed replacement keeps ancestor-related child pairs directed", "[marginal]") {
    // y -> {1, 2}, 1 -> 2: the bidirected 1 <-> 2 must become 1 -> 2
    Dag d(3, {{0, 1}, {2, 0}, {2, 1}});
    MixedGraph m = marginalize_root(d, 2);
    CHECK(m == MixedGraph(2, {{0, 1}}, {}));
}

TEST_CASE("new directed edges flow into bidirected partners of descendants", "[marginal]") {
    // t -> u, u -> v, y -> {u, v}: step adds t -> v and u <-> v resolves to u -> v
    Dag d(4, {{0, 1}, {1, 2}, {3, 1}, {3, 2}});
    MixedGraph m = marginalize_root(d, 3);
    CHECK(m == MixedGraph(3, {{0, 1}, {0, 2}, {1, 2}}, {}));
}

TEST_CASE("mixture MAG of the running example", "[marginal]") {
    auto [dmu, y] = mixture_dag(test::running_example_spec());
    MixedGraph mm = mixture_mag(dmu, y);
    // component edges of both component MAGs plus all cross-component
    // bidirected edges among the copies of the varying nodes {2, 3}
    MixedGraph expected(8, {{0, 1}, {7, 6}},
                        {{1, 2}, {5, 6}, {1, 5}, {1, 6}, {2, 5}, {2, 6}});
    CHECK(mm == expected);
}

TEST_CASE("single-component mixture MAG is the component itself", "[marginal]") {
    Dag d(4, {{0, 1}, {1, 2}});
    MixtureSpec spec = make_mixture_spec({d}, {0, 1, 2, 3});  // V_INV = V
    auto [dmu, y] = mixture_dag(spec);
    CHECK(mixture_mag(dmu, y) == MixedGraph(4, d.edges(), {}));
}

TEST_CASE("outputs are ancestral and maximal", "[marginal]") {
    Rng rng(101);
    for (int t = 0; t < 500; ++t) {
        auto [d, y] = test::random_rooted_dag(3 + static_cast<int>(rng.below(4)), 0.3, rng);
        MixedGraph m = marginalize_root(d, y);
        REQUIRE(is_ancestral(m));
        REQUIRE(is_maximal(m));
        CHECK_FALSE(find_inducing_path(m).has_value());
    }
}

TEST_CASE("marginalization preserves separation among the retained nodes", "[marginal]") {
    Rng rng(103);
    for (int t = 0; t < 60; ++t) {
        const int nb = 3 + static_cast<int>(rng.below(3));  // up to 6 nodes total
        auto [d, y] = test::random_rooted_dag(nb, 0.35, rng);
        MixedGraph m = marginalize_root(d, y);
        for (NodeId a = 0; a < nb; ++a)
            for (NodeId b = a + 1; b < nb; ++b) {
                NodeSet rest;
                for (NodeId w = 0; w < nb; ++w)
                    if (w != a && w != b) rest.push_back(w);
                for_each_subset_by_size(rest, -1, [&](const NodeSet& c) {
                    SeparationQuery q{{a}, {b}, c};
                    CHECK(d_separated(d, q) == m_separated(m, q));
                    return false;
                });
            }
    }
}

TEST_CASE("lifted separations in the mixture DAG equal mixture-MAG separations", "[marginal]") {
    Rng rng(107);
    for (int t = 0; t < 40; ++t) {
        const int k = 2;
        const int nb = 2 + static_cast<int>(rng.below(2));  // [V] up to 6
        MixtureSpec spec =
            random_mixture_structure(k, nb, rng, {.require_poset_compatible = false});
        auto [dmu, y] = mixture_dag(spec);
        MixedGraph mm = mixture_mag(dmu, y);
        const int n_obs = k * nb;
        for (NodeId a = 0; a < n_obs; ++a)
            for (NodeId b = a + 1; b < n_obs; ++b) {
                NodeSet rest;
                for (NodeId w = 0; w < n_obs; ++w)
                    if (w != a && w != b) rest.push_back(w);
                for_each_subset_by_size(rest, 3, [&](const NodeSet& c) {
                    SeparationQuery q{{a}, {b}, c};
                    CHECK(d_separated(dmu, q) == m_separated(mm, q));
                    return false;
                });
            }
    }
}

TEST_CASE("cross-component bidirected edges replicate across all components", "[marginal]") {
    // if a^(i) <-> b^(k) exists then a^(i) <-> b^(j) for every other j
    Rng rng(109);
    for (int t = 0; t < 150; ++t) {
        const int k = 2 + static_cast<int>(rng.below(2));
        const int nb = 2 + static_cast<int>(rng.below(3));
        MixtureSpec spec =
            random_mixture_structure(k, nb, rng, {.require_poset_compatible = false});
        auto [dmu, y] = mixture_dag(spec);
        MixedGraph mm = mixture_mag(dmu, y);
        for (const auto& [x, z] : mm.bidirected_edges()) {
            const int i = x / nb;
            const NodeId b_base = z % nb;
            for (int j = 0; j < k; ++j) {
                const NodeId zj = j * nb + b_base;
                if (j == i || zj == x) continue;
                CHECK(mm.has_bidirected(x, zj));
            }
        }
    }
}

TEST_CASE("fault injection keeps defective bidirected edges", "[marginal]") {
    // with the replacement step disabled, a child pair linked by a two-step
    // directed path stays bidirected and the output stops being ancestral
    Dag d(4, {{0, 1}, {1, 2}, {3, 0}, {3, 2}});
    MixedGraph broken = marginalize_root(d, 3, {.skip_directed_replacement = true});
    CHECK(broken.has_bidirected(0, 2));
    CHECK_FALSE(is_ancestral(broken));
    // the honest run resolves the pair to a directed edge
    CHECK(marginalize_root(d, 3) == MixedGraph(3, {{0, 1}, {0, 2}, {1, 2}}, {}));
}
