#include <catch2/catch_amalgamated.hpp>

#include "mixdag/fci.hpp"
#include "mixdag/metrics.hpp"
#include "mixdag/sem.hpp"
#include "mixdag/verify.hpp"
#include "test_helpers.hpp"

using namespace mixdag;

namespace {

class ConstantOracle : public CiOracle {
public:
    ConstantOracle(int n, bool verdict) : n_(n), verdict_(verdict) {}
    bool independent(NodeId, NodeId, const NodeSet&) const override { return verdict_; }
    int variable_count() const override { return n_; }
    std::string kind() const override { return "constant"; }

private:
    int n_;
    bool verdict_;
};

class ThrowingOracle : public CiOracle {
public:
    bool independent(NodeId, NodeId, const NodeSet&) const override {
        throw std::runtime_error("backing store unavailable");
    }
    int variable_count() const override { return 3; }
    std::string kind() const override { return "throwing"; }
};

}  // namespace

TEST_CASE("oracle FCI on the running example union graph", "[fci]") {
    MixedGraph mu(4, {{0, 1}, {3, 2}}, {{1, 2}});
    FciRun run = fci_run(GraphicalOracle(mu), 4);
    const Pag& pag = run.pag;

    // adjacencies 1-2, 2-3, 3-4 with the collider pinned on the middle edge
    CHECK(pag.adjacent(0, 1));
    CHECK(pag.adjacent(1, 2));
    CHECK(pag.adjacent(2, 3));
    CHECK_FALSE(pag.adjacent(0, 2));
    CHECK_FALSE(pag.adjacent(0, 3));
    CHECK_FALSE(pag.adjacent(1, 3));

    CHECK(pag.mark_at(1, 2) == Mark::Arrow);
    CHECK(pag.mark_at(2, 1) == Mark::Arrow);
    CHECK(pag.mark_at(1, 0) == Mark::Arrow);
    CHECK(pag.mark_at(2, 3) == Mark::Arrow);
    // the far endpoints stay undecided in the equivalence class
    CHECK(pag.mark_at(0, 1) == Mark::Circle);
    CHECK(pag.mark_at(3, 2) == Mark::Circle);

    // sepsets recorded for the removed pairs are empty sets
    REQUIRE(run.sepsets.find(0, 2) != nullptr);
    CHECK(run.sepsets.find(0, 2)->empty());
    REQUIRE(run.sepsets.find(1, 3) != nullptr);
    CHECK(run.sepsets.find(1, 3)->empty());

    CHECK(pag == brute_force_pag(mu));
}

TEST_CASE("an always-independent oracle yields the empty PAG", "[fci]") {
    Pag pag = fci(ConstantOracle(5, true), 5);
    CHECK(pag.marks().empty());
}

TEST_CASE("an always-dependent oracle keeps the complete circle graph", "[fci]") {
    Pag pag = fci(ConstantOracle(4, false), 4);
    for (NodeId a = 0; a < 4; ++a)
        for (NodeId b = a + 1; b < 4; ++b) {
            CHECK(pag.adjacent(a, b));
            CHECK(pag.mark_at(a, b) == Mark::Circle);
        }
}

TEST_CASE("oracle failures carry the offending query", "[fci]") {
    CHECK_THROWS_WITH(fci(ThrowingOracle(), 3),
                      Catch::Matchers::ContainsSubstring("(0,1 | {})") &&
                          Catch::Matchers::ContainsSubstring("backing store unavailable"));
}

TEST_CASE("lifted mixture oracle gives the same PAG as the union oracle", "[fci]") {
    MixtureSpec spec = test::running_example_spec();
    auto [dmu, y] = mixture_dag(spec);
    (void)y;
    Pag from_mixture = fci(graphical_oracle_lifted(dmu, 2, 4), 4);
    Pag from_union = fci(GraphicalOracle(union_graph(component_mags(spec))), 4);
    CHECK(from_mixture == from_union);
}

TEST_CASE("brute force PAG on primitive fixtures", "[fci]") {
    // a single edge is entirely undecided
    Pag two = brute_force_pag(MixedGraph(2, {{0, 1}}, {}));
    CHECK(two.mark_at(0, 1) == Mark::Circle);
    CHECK(two.mark_at(1, 0) == Mark::Circle);

    // unshielded collider: arrowheads at the middle are invariant
    Pag collider = brute_force_pag(MixedGraph(3, {{0, 2}, {1, 2}}, {}));
    CHECK(collider.mark_at(2, 0) == Mark::Arrow);
    CHECK(collider.mark_at(2, 1) == Mark::Arrow);
    CHECK(collider.mark_at(0, 2) == Mark::Circle);
    CHECK(collider.mark_at(1, 2) == Mark::Circle);

    CHECK_THROWS_AS(brute_force_pag(MixedGraph(8)), std::invalid_argument);
}

TEST_CASE("fci agrees with the enumeration PAG on random MAGs", "[fci][slow]") {
    VerifyOptions opt;
    opt.fci_oracle_mags = 60;
    opt.seed = 777;
    const auto suite = verify_fci_oracle_consistency(opt);
    for (const auto& cert : suite.certificates) INFO(cert);
    CHECK(suite.passed);
    CHECK(suite.cases == 60);
}

TEST_CASE("exact-oracle FCI matches the union PAG end to end", "[fci][slow]") {
    VerifyOptions opt;
    opt.oracle_end_to_end_mixtures = 15;
    opt.seed = 778;
    const auto suite = verify_oracle_end_to_end(opt);
    for (const auto& cert : suite.certificates) INFO(cert);
    CHECK(suite.passed);
}

TEST_CASE("raising alpha never removes adjacencies on a fixed dataset", "[fci][slow]") {
    Rng rng(779);
    for (int t = 0; t < 6; ++t) {
        GaussianMixtureSem sem = random_mixture_sem(2, 7, rng);
        auto sampled = sample(sem, 800, {0.5, 0.5}, rng);
        auto stats = std::make_shared<FisherZStats>(sampled.data);
        std::vector<Pag> pags;
        for (double alpha : {0.001, 0.01, 0.05, 0.1})
            pags.push_back(fci(FisherZOracle(stats, alpha), 7));
        for (std::size_t i = 0; i + 1 < pags.size(); ++i) {
            for (NodeId a = 0; a < 7; ++a)
                for (NodeId b = a + 1; b < 7; ++b)
                    if (pags[i].adjacent(a, b)) CHECK(pags[i + 1].adjacent(a, b));
        }
    }
}

TEST_CASE("stability selection thresholds", "[fci]") {
    Rng rng(781);
    GaussianMixtureSem sem = random_mixture_sem(2, 5, rng);
    auto sampled = sample(sem, 600, {0.5, 0.5}, rng);

    Rng r1(5), r2(5), r3(5);
    Pag everything = fci_stability_selection(sampled.data, 0.05, 8, 0.5, 0.0, r1);
    Pag nothing = fci_stability_selection(sampled.data, 0.05, 8, 0.5, 1.1, r2);
    CHECK(nothing.marks().empty());

    // threshold 0 keeps the union of adjacencies across runs
    Rng rs(5);
    std::map<Edge, int> counts;
    for (int s = 0; s < 8; ++s) {
        Rng sub_rng = rs.derive(s);
        std::vector<int> rows = sub_rng.permutation(600);
        rows.resize(300);
        std::sort(rows.begin(), rows.end());
        Eigen::MatrixXd sub(300, 5);
        for (int i = 0; i < 300; ++i) sub.row(i) = sampled.data.row(rows[i]);
        Pag p = fci(FisherZOracle(sub, 0.05), 5);
        for (const auto& [e, m] : p.marks()) {
            (void)m;
            counts[e]++;
        }
    }
    for (const auto& [e, c] : counts) {
        (void)c;
        CHECK(everything.adjacent(e.first, e.second));
    }
    CHECK(everything.marks().size() == counts.size());

    // deterministic under a fixed seed
    Pag again = fci_stability_selection(sampled.data, 0.05, 8, 0.5, 0.0, r3);
    CHECK(again == everything);

    CHECK_THROWS_AS(fci_stability_selection(sampled.data, 0.05, 1, 0.5, 0.5, r1),
                    std::invalid_argument);
    CHECK_THROWS_AS(fci_stability_selection(sampled.data, 0.05, 8, 1.5, 0.5, r1),
                    std::invalid_argument);
}
