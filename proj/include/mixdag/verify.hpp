#ifndef MIXDAG_VERIFY_HPP
#define MIXDAG_VERIFY_HPP

// Randomized verification suites for the structural claims the library
// rests on, each reporting case counts and counterexample certificates.
// The companion brute-force checkers live in reference.hpp.

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "mixdag/ci.hpp"
#include "mixdag/fci.hpp"
#include "mixdag/io.hpp"
#include "mixdag/marginal.hpp"
#include "mixdag/metrics.hpp"
#include "mixdag/mixture.hpp"
#include "mixdag/reference.hpp"
#include "mixdag/sem.hpp"
#include "mixdag/separation.hpp"

namespace mixdag {

struct SuiteResult {
    std::string name;
    long cases = 0;
    long violations = 0;
    bool passed = false;
    std::vector<std::string> certificates;
    double seconds = 0;

    void add_certificate(const json& j) {
        if (certificates.size() < 10) certificates.push_back(j.dump());
    }
};

struct VerifyOptions {
    int sep_equivalence_mixtures = 200;   // union-vs-mixture separation suite
    int markov_mixtures = 100;            // discrete Markov-property suite
    int mag_instances = 500;              // marginalization / union MAG suite
    int faithfulness_mixtures = 60;       // generic-faithfulness rate suite
    int single_bidirected_mixtures = 100; // one-bidirected-edge path suite
    int oracle_end_to_end_mixtures = 50;  // FCI on exact mixture CI suite
    int fci_oracle_mags = 100;            // FCI vs enumeration PAG suite
    std::uint64_t seed = 20200127;
    bool inject_skip_step3 = false;       // fault injection for the MAG suite
};

namespace verify_detail {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline json query_json(const SeparationQuery& q) {
    return json{{"A", q.set_a}, {"B", q.set_b}, {"C", q.set_c}};
}

inline json spec_certificate(const MixtureSpec& spec) { return to_json(spec); }

// Exhaustive singleton queries with |C| <= max_c over the base node set.
template <class Fn>
void for_each_singleton_query(int n, int max_c, Fn&& fn) {
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b) {
            NodeSet rest;
            for (NodeId w = 0; w < n; ++w)
                if (w != a && w != b) rest.push_back(w);
            for_each_subset_by_size(rest, max_c, [&](const NodeSet& c) {
                fn(a, b, c);
                return false;
            });
        }
}

// All disjoint (A, B, C) triples with A, B nonempty over n nodes, encoded by
// a base-4 assignment (0 none, 1 A, 2 B, 3 C). A < B canonically by first
// member to avoid double counting symmetric queries.
template <class Fn>
void for_each_set_query(int n, Fn&& fn) {
    std::vector<int> role(n, 0);
    for (;;) {
        NodeSet a, b, c;
        for (NodeId v = 0; v < n; ++v) {
            if (role[v] == 1) a.push_back(v);
            else if (role[v] == 2) b.push_back(v);
            else if (role[v] == 3) c.push_back(v);
        }
        if (!a.empty() && !b.empty() && a.front() < b.front()) fn(a, b, c);
        int pos = 0;
        while (pos < n && role[pos] == 3) role[pos++] = 0;
        if (pos == n) break;
        role[pos]++;
    }
}

// Mixture-faithfulness screen for exact discrete mixtures: every singleton
// d-connection must show a dependence signal above `margin`.
inline bool numerically_faithful(const MixtureSpec& spec, const Dag& dmu, const JointTable& joint,
                                 double margin) {
    const int n = spec.base_node_count();
    bool ok = true;
    for_each_singleton_query(n, -1, [&](NodeId a, NodeId b, const NodeSet& c) {
        if (!ok) return;
        SeparationQuery lifted{spec.lift_set({a}), spec.lift_set({b}), spec.lift_set(c)};
        if (!d_separated(dmu, lifted) && exact_discrete_ci(joint, {a}, {b}, c, margin)) ok = false;
    });
    return ok;
}

}  // namespace verify_detail

// Separation equivalence: m-separation in the union graph must match
// d-separation of the lifted sets in the mixture DAG, exhaustively over
// singleton pairs with |C| <= 3, for random poset-compatible mixtures.
inline SuiteResult verify_union_separation_equivalence(const VerifyOptions& opt) {
    verify_detail::Stopwatch clock;
    SuiteResult out{.name = "union-separation-equivalence"};
    Rng rng(Rng::mix(opt.seed ^ 0xa1));
    for (int t = 0; t < opt.sep_equivalence_mixtures; ++t) {
        const int k = 2 + static_cast<int>(rng.below(2));           // K in {2,3}
        const int n = 3 + static_cast<int>(rng.below(4));           // |V| in 3..6
        MixtureSpec spec = random_mixture_structure(k, n, rng);
        auto [dmu, y] = mixture_dag(spec);
        (void)y;
        MixedGraph mu = union_graph(component_mags(spec));
        verify_detail::for_each_singleton_query(n, 3, [&](NodeId a, NodeId b, const NodeSet& c) {
            ++out.cases;
            SeparationQuery base{{a}, {b}, c};
            SeparationQuery lifted{spec.lift_set({a}), spec.lift_set({b}), spec.lift_set(c)};
            const bool in_union = m_separated(mu, base);
            const bool in_mixture = d_separated(dmu, lifted);
            if (in_union != in_mixture) {
                ++out.violations;
                out.add_certificate(json{{"spec", verify_detail::spec_certificate(spec)},
                                         {"query", verify_detail::query_json(base)},
                                         {"union_separated", in_union},
                                         {"mixture_separated", in_mixture}});
            }
        });
    }
    out.passed = out.violations == 0;
    out.seconds = clock.seconds();
    return out;
}

// Markov property: every d-separation of lifted sets in the mixture DAG
// must be an exact conditional independence in the enumerated mixture
// joint, over all set-valued queries of random binary two-component
// mixtures.
inline SuiteResult verify_mixture_markov(const VerifyOptions& opt) {
    verify_detail::Stopwatch clock;
    SuiteResult out{.name = "mixture-markov-property"};
    Rng rng(Rng::mix(opt.seed ^ 0xa2));
    for (int t = 0; t < opt.markov_mixtures; ++t) {
        const int n = 3 + static_cast<int>(rng.below(3));  // |V| in 3..5
        DiscreteMixture dm =
            random_discrete_mixture(2, n, 2, rng, {.require_poset_compatible = false});
        auto [dmu, y] = mixture_dag(dm.spec);
        (void)y;
        const JointTable joint = exact_joint(dm);
        verify_detail::for_each_set_query(n, [&](const NodeSet& a, const NodeSet& b,
                                                 const NodeSet& c) {
            SeparationQuery lifted{dm.spec.lift_set(a), dm.spec.lift_set(b), dm.spec.lift_set(c)};
            if (!d_separated(dmu, lifted)) return;
            ++out.cases;
            if (!exact_discrete_ci(joint, a, b, c, 1e-9)) {
                ++out.violations;
                out.add_certificate(json{{"spec", verify_detail::spec_certificate(dm.spec)},
                                         {"query", json{{"A", a}, {"B", b}, {"C", c}}}});
            }
        });
    }
    out.passed = out.violations == 0;
    out.seconds = clock.seconds();
    return out;
}

// Marginalization outputs and poset-compatible union graphs must be
// ancestral and maximal; small instances are cross-checked against the
// definitional separability criterion.
inline SuiteResult verify_mag_property(const VerifyOptions& opt) {
    verify_detail::Stopwatch clock;
    SuiteResult out{.name = "marginal-and-union-mag-property"};
    Rng rng(Rng::mix(opt.seed ^ 0xa3));
    MarginalizeOptions mopt{.skip_directed_replacement = opt.inject_skip_step3};

    auto check_mag = [&](const MixedGraph& m, const json& origin) {
        ++out.cases;
        const bool ancestral = is_ancestral(m);
        const bool maximal = ancestral && is_maximal(m);
        bool brute_ok = true;
        if (ancestral && m.node_count() <= 7)
            brute_ok = reference::is_maximal_by_definition(m) == maximal;
        if (!ancestral || !maximal || !brute_ok) {
            ++out.violations;
            out.add_certificate(json{{"graph", to_json(m)},
                                     {"origin", origin},
                                     {"ancestral", ancestral},
                                     {"maximal", maximal},
                                     {"brute_force_agrees", brute_ok}});
        }
    };

    for (int t = 0; t < opt.mag_instances; ++t) {
        // marginal graph of a random rooted DAG
        const int nb = 3 + static_cast<int>(rng.below(5));
        Dag base = [&] {
            const auto order = rng.permutation(nb);
            std::vector<Edge> edges;
            for (int i = 0; i < nb; ++i)
                for (int j = i + 1; j < nb; ++j)
                    if (rng.uniform01() < 0.3) edges.emplace_back(order[i], order[j]);
            return Dag(nb, std::move(edges));
        }();
        std::vector<Edge> edges = base.edges();
        for (NodeId v = 0; v < nb; ++v)
            if (rng.uniform01() < 0.5) edges.emplace_back(nb, v);
        Dag rooted(nb + 1, std::move(edges));
        check_mag(marginalize_root(rooted, nb, mopt), json{{"kind", "marginal"}});

        // union graph of a random poset-compatible mixture
        const int k = 2 + static_cast<int>(rng.below(2));
        const int n = 3 + static_cast<int>(rng.below(4));
        MixtureSpec spec = random_mixture_structure(k, n, rng);
        check_mag(union_graph(component_mags(spec, mopt)),
                  json{{"kind", "union"}, {"spec", verify_detail::spec_certificate(spec)}});
    }
    out.passed = out.violations == 0;
    out.seconds = clock.seconds();
    return out;
}

// Generic faithfulness: d-connected singleton queries must show dependence
// (deviation above 1e-6) in at least 99% of sampled instances.
inline SuiteResult verify_generic_faithfulness(const VerifyOptions& opt) {
    verify_detail::Stopwatch clock;
    SuiteResult out{.name = "generic-faithfulness-rate"};
    Rng rng(Rng::mix(opt.seed ^ 0xa4));
    for (int t = 0; t < opt.faithfulness_mixtures; ++t) {
        const int n = 3 + static_cast<int>(rng.below(2));  // 3..4 keeps signals visible
        DiscreteMixture dm =
            random_discrete_mixture(2, n, 2, rng, {.require_poset_compatible = false});
        auto [dmu, y] = mixture_dag(dm.spec);
        (void)y;
        const JointTable joint = exact_joint(dm);
        verify_detail::for_each_singleton_query(n, -1, [&](NodeId a, NodeId b, const NodeSet& c) {
            SeparationQuery lifted{dm.spec.lift_set({a}), dm.spec.lift_set({b}),
                                   dm.spec.lift_set(c)};
            if (d_separated(dmu, lifted)) return;
            ++out.cases;
            if (exact_discrete_ci(joint, {a}, {b}, c, 1e-6)) ++out.violations;
        });
    }
    out.passed = out.cases > 0 && out.violations * 100 <= out.cases;  // >= 99% dependent
    out.seconds = clock.seconds();
    return out;
}

// Bidirected edges of the union graph identify varying nodes only.
inline SuiteResult verify_varying_containment(const VerifyOptions& opt) {
    verify_detail::Stopwatch clock;
    SuiteResult out{.name = "varying-node-containment"};
    Rng rng(Rng::mix(opt.seed ^ 0xa5));
    for (int t = 0; t < opt.mag_instances; ++t) {
        const int k = 2 + static_cast<int>(rng.below(2));
        const int n = 3 + static_cast<int>(rng.below(4));
        MixtureSpec spec = random_mixture_structure(k, n, rng);
        MixedGraph mu = union_graph(component_mags(spec));
        ++out.cases;
        NodeSet varying = varying_nodes(mu);
        NodeSet truth;
        for (NodeId v = 0; v < n; ++v)
            if (!set_contains(spec.v_inv, v)) truth.push_back(v);
        if (!set_difference(varying, truth).empty()) {
            ++out.violations;
            out.add_certificate(json{{"spec", verify_detail::spec_certificate(spec)},
                                     {"union", to_json(mu)},
                                     {"varying", varying},
                                     {"truth", truth}});
        }
    }
    out.passed = out.violations == 0;
    out.seconds = clock.seconds();
    return out;
}

// Every m-connection in the mixture MAG is witnessed by a connecting path
// that uses at most one bidirected edge.
inline SuiteResult verify_single_bidirected_paths(const VerifyOptions& opt) {
    verify_detail::Stopwatch clock;
    SuiteResult out{.name = "single-bidirected-edge-paths"};
    Rng rng(Rng::mix(opt.seed ^ 0xa6));
    for (int t = 0; t < opt.single_bidirected_mixtures; ++t) {
        const int k = 2;
        const int n = 2 + static_cast<int>(rng.below(2));  // [V] up to 6
        MixtureSpec spec = random_mixture_structure(k, n, rng, {.require_poset_compatible = false});
        auto [dmu, y] = mixture_dag(spec);
        (void)y;
        MixedGraph mm = mixture_mag(dmu, y);
        // queries between copies of distinct base nodes, given lifted base sets
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = 0; b < n; ++b) {
                if (a == b) continue;
                NodeSet rest;
                for (NodeId w = 0; w < n; ++w)
                    if (w != a && w != b) rest.push_back(w);
                for_each_subset_by_size(rest, 2, [&](const NodeSet& c) {
                    for (int i = 0; i < k; ++i)
                        for (int kk = 0; kk < k; ++kk) {
                            SeparationQuery q{{spec.lift(a, i)},
                                              {spec.lift(b, kk)},
                                              spec.lift_set(c)};
                            if (m_separated(mm, q)) continue;
                            ++out.cases;
                            if (!reference::connected_by_path_enumeration(mm, q, 1)) {
                                ++out.violations;
                                out.add_certificate(
                                    json{{"mixture_mag", to_json(mm)},
                                         {"query", verify_detail::query_json(q)}});
                            }
                        }
                    return false;
                });
            }
    }
    out.passed = out.violations == 0;
    out.seconds = clock.seconds();
    return out;
}

// FCI driven by the exact mixture CI oracle must reproduce the enumeration
// PAG of the union graph; derived metrics must be exact. Varying-node
// recovery against the union graph's bidirected set is asserted whenever the
// equivalence class pins all bidirected edges (it always pins none
// spuriously).
inline SuiteResult verify_oracle_end_to_end(const VerifyOptions& opt) {
    verify_detail::Stopwatch clock;
    SuiteResult out{.name = "oracle-fci-end-to-end"};
    Rng rng(Rng::mix(opt.seed ^ 0xa7));
    long identifiable_instances = 0;
    for (int t = 0; t < opt.oracle_end_to_end_mixtures; ++t) {
        const int n = 3 + static_cast<int>(rng.below(3));  // |V| in 3..5
        DiscreteMixture dm;
        JointTable joint;
        Dag dmu;
        bool found = false;
        for (int attempt = 0; attempt < 50 && !found; ++attempt) {
            dm = random_discrete_mixture(2, n, 2, rng);
            auto [d, y] = mixture_dag(dm.spec);
            (void)y;
            dmu = d;
            joint = exact_joint(dm);
            found = verify_detail::numerically_faithful(dm.spec, dmu, joint, 1e-7);
        }
        if (!found) continue;  // faithfulness screen exhausted; skip draw
        MixedGraph mu = union_graph(component_mags(dm.spec));
        const Pag expected = brute_force_pag(mu);
        const Pag estimated = fci(DiscreteJointOracle(joint, 1e-9), n);
        ++out.cases;
        const double shd = normalized_shd(estimated, expected);
        const NodeSet est_varying = varying_nodes_from_pag(estimated);
        const NodeSet mag_varying = varying_nodes(mu);
        const NodeSet pag_varying = varying_nodes_from_pag(expected);
        const auto rates = varying_rates(est_varying, mag_varying, n);
        const bool identifiable = pag_varying == mag_varying;
        if (identifiable) ++identifiable_instances;
        bool ok = estimated == expected && shd == 0.0 && rates.fpr == 0.0;
        if (identifiable) ok = ok && rates.tpr == 1.0;
        if (!ok) {
            ++out.violations;
            out.add_certificate(json{{"spec", verify_detail::spec_certificate(dm.spec)},
                                     {"expected", to_json(expected)},
                                     {"estimated", to_json(estimated)},
                                     {"shd", shd},
                                     {"tpr", rates.tpr},
                                     {"fpr", rates.fpr}});
        }
    }
    out.passed = out.violations == 0 && out.cases >= opt.oracle_end_to_end_mixtures * 9 / 10 &&
                 identifiable_instances > 0;
    out.seconds = clock.seconds();
    return out;
}

// FCI under a perfect graphical oracle recovers the enumeration PAG of
// random MAGs.
inline SuiteResult verify_fci_oracle_consistency(const VerifyOptions& opt) {
    verify_detail::Stopwatch clock;
    SuiteResult out{.name = "fci-oracle-consistency"};
    Rng rng(Rng::mix(opt.seed ^ 0xa8));
    while (out.cases < opt.fci_oracle_mags) {
        // alternate marginal MAGs and union graphs as MAG sources
        MixedGraph mag = [&]() -> MixedGraph {
            if (out.cases % 2 == 0) {
                const int nb = 4 + static_cast<int>(rng.below(3));
                std::vector<Edge> edges;
                const auto order = rng.permutation(nb);
                for (int i = 0; i < nb; ++i)
                    for (int j = i + 1; j < nb; ++j)
                        if (rng.uniform01() < 0.3) edges.emplace_back(order[i], order[j]);
                for (NodeId v = 0; v < nb; ++v)
                    if (rng.uniform01() < 0.5) edges.emplace_back(nb, v);
                return marginalize_root(Dag(nb + 1, std::move(edges)), nb);
            }
            const int k = 2 + static_cast<int>(rng.below(2));
            const int n = 4 + static_cast<int>(rng.below(3));
            return union_graph(component_mags(random_mixture_structure(k, n, rng)));
        }();
        ++out.cases;
        const Pag expected = brute_force_pag(mag);
        const Pag got = fci(GraphicalOracle(mag), mag.node_count());
        if (!(got == expected)) {
            ++out.violations;
            out.add_certificate(
                json{{"mag", to_json(mag)}, {"expected", to_json(expected)}, {"fci", to_json(got)}});
        }
    }
    out.passed = out.violations == 0;
    out.seconds = clock.seconds();
    return out;
}

// Fixed examples: the running 4-node mixture, the 5-node non-ancestral
// union, the crafted bivariate density cancellation, and the alternative
// per-component-root representation whose separation claim the exact joint
// contradicts.
inline SuiteResult verify_fixtures() {
    verify_detail::Stopwatch clock;
    SuiteResult out{.name = "fixtures"};
    auto expect = [&](bool cond, const std::string& what) {
        ++out.cases;
        if (!cond) {
            ++out.violations;
            out.add_certificate(json{{"fixture", what}});
        }
    };

    {
        Dag d1(4, {{0, 1}});
        Dag d2(4, {{3, 2}});
        MixtureSpec spec = make_mixture_spec({d1, d2}, {0, 3});
        auto mags = component_mags(spec);
        expect(mags[0] == MixedGraph(4, {{0, 1}}, {{1, 2}}), "component MAG 1");
        expect(mags[1] == MixedGraph(4, {{3, 2}}, {{1, 2}}), "component MAG 2");
        expect(poset_compatible(mags).compatible, "running example poset-compatible");
        MixedGraph mu = union_graph(mags);
        expect(mu == MixedGraph(4, {{0, 1}, {3, 2}}, {{1, 2}}), "union graph");
        expect(varying_nodes(mu) == NodeSet{1, 2}, "varying nodes of the union");
        expect(is_ancestral(mu) && is_maximal(mu), "union graph is a MAG");
    }
    {
        Dag d1(5, {{0, 1}, {1, 2}, {2, 3}});
        Dag d2(5, {{3, 4}});
        MixtureSpec spec = make_mixture_spec({d1, d2}, {0, 2, 3});
        auto mags = component_mags(spec);
        auto check = poset_compatible(mags);
        expect(!check.compatible, "five-node example is poset-incompatible");
        expect(check.comparable_bidirected.has_value() &&
                   *check.comparable_bidirected == Edge{1, 4},
               "witness is the comparable bidirected pair");
        MixedGraph mu = union_graph(mags);
        expect(!is_ancestral(mu), "five-node union graph is not ancestral");
    }
    {
        const auto gaps = example31_density_gap();
        expect(gaps.crafted_gap < 1e-10, "crafted density gap vanishes");
        expect(gaps.perturbed_gap > 1e-6, "perturbed density gap is visible");
        expect(example31_gap(1.0, 2.001) < 1e-14, "degenerate mixing leaves no gap");
    }
    {
        // per-component-root representation of the running example
        Dag d1(4, {{0, 1}});
        Dag d2(4, {{3, 2}});
        MixtureSpec spec = make_mixture_spec({d1, d2}, {0, 3});
        Dag mother = mother_graph(spec);
        expect(mother.node_count() == 10, "mother graph has K|V|+K nodes");
        expect(mother.edges() ==
                   std::vector<Edge>{{0, 1}, {7, 6}, {8, 1}, {8, 2}, {9, 5}, {9, 6}},
               "mother graph edge set");
        expect(!m_d_connected(mother, make_query({0}, {3}, {1, 2}), 2),
               "mother-graph criterion declares separation");
        // exact joint of a generic discrete analog disagrees
        DiscreteMixture dm;
        dm.spec = spec;
        dm.cardinalities = {2, 2, 2, 2};
        const Cpt root_a{0.35, 0.65};
        const Cpt root_b{0.55, 0.45};
        dm.cpts.resize(2);
        dm.cpts[0] = {root_a, {0.2, 0.8, 0.7, 0.3}, {0.6, 0.4}, root_b};
        dm.cpts[1] = {root_a, {0.45, 0.55}, {0.15, 0.85, 0.75, 0.25}, root_b};
        const JointTable joint = exact_joint(dm);
        expect(!exact_discrete_ci(joint, {0}, {3}, {1, 2}, 1e-9),
               "exact mixture joint shows the dependence");
    }
    out.passed = out.violations == 0;
    out.seconds = clock.seconds();
    return out;
}

inline std::vector<SuiteResult> run_all_verification(const VerifyOptions& opt) {
    std::vector<SuiteResult> out;
    out.push_back(verify_fixtures());
    out.push_back(verify_mag_property(opt));
    out.push_back(verify_union_separation_equivalence(opt));
    out.push_back(verify_mixture_markov(opt));
    out.push_back(verify_generic_faithfulness(opt));
    out.push_back(verify_varying_containment(opt));
    out.push_back(verify_single_bidirected_paths(opt));
    out.push_back(verify_oracle_end_to_end(opt));
    out.push_back(verify_fci_oracle_consistency(opt));
    return out;
}

}  // namespace mixdag

#endif  // MIXDAG_VERIFY_HPP
