#ifndef MIXDAG_MARGINAL_HPP
#define MIXDAG_MARGINAL_HPP

#include <set>
#include <stdexcept>
#include <vector>

#include "mixdag/graph.hpp"

namespace mixdag {

struct MarginalizeOptions {
    // Fault-injection hook for the verification suites: keep every
    // bidirected edge even when one endpoint is an ancestor of the other.
    bool skip_directed_replacement = false;
};

// Marginal ancestral graph of `d` with respect to a single node `y` of
// in-degree 0. Pairs of children of y become bidirected; a directed edge
// t->v is added whenever t->u exists with u <-> v and u an ancestor of v;
// finally each bidirected pair with an ancestor relation is replaced by the
// corresponding directed edge. Remaining node indices are compacted (nodes
// above y shift down by one).
inline MixedGraph marginalize_root(const Dag& d, NodeId y, MarginalizeOptions opt = {}) {
    detail::check_node(d.node_count(), y, "marginalize_root");
    if (d.in_degree(y) != 0)
        throw std::invalid_argument("marginalize_root: node y must have in-degree 0");

    const int n = d.node_count();
    const auto anc = ancestor_matrix(d);  // anc[v][u]: u ancestor of v in d
    const auto& ch = d.children(y);

    std::set<Edge> bidir;
    for (std::size_t i = 0; i < ch.size(); ++i)
        for (std::size_t j = i + 1; j < ch.size(); ++j)
            bidir.insert({std::min(ch[i], ch[j]), std::max(ch[i], ch[j])});

    std::set<Edge> dir;
    for (const auto& [u, v] : d.edges())
        if (u != y && v != y) dir.insert({u, v});

    // New directed edges: iterate over the bidirected set produced above
    // (fixed; edges added here are not fed back in).
    std::set<Edge> added;
    for (const auto& [u, v] : bidir) {
        // u <-> v with u in an(v): every t -> u contributes t -> v.
        if (anc[v][u])
            for (NodeId t : d.parents(u))
                if (t != y) added.insert({t, v});
        if (anc[u][v])
            for (NodeId t : d.parents(v))
                if (t != y) added.insert({t, u});
    }
    dir.insert(added.begin(), added.end());

    if (!opt.skip_directed_replacement) {
        for (auto it = bidir.begin(); it != bidir.end();) {
            const auto [u, v] = *it;
            if (anc[v][u]) {
                dir.insert({u, v});
                it = bidir.erase(it);
            } else if (anc[u][v]) {
                dir.insert({v, u});
                it = bidir.erase(it);
            } else {
                ++it;
            }
        }
    } else {
        // Injected fault: keep every bidirected edge except where the pair
        // already carries a directed edge, so the graph still constructs
        // and longer-range ancestor defects stay observable.
        for (auto it = bidir.begin(); it != bidir.end();) {
            const auto [u, v] = *it;
            if (dir.count({u, v}) || dir.count({v, u})) it = bidir.erase(it);
            else ++it;
        }
    }

    std::vector<NodeId> to_new(n, -1);
    std::vector<std::string> labels;
    labels.reserve(n - 1);
    int next = 0;
    for (NodeId v = 0; v < n; ++v) {
        if (v == y) continue;
        to_new[v] = next++;
        labels.push_back(d.label(v));
    }
    std::vector<Edge> dir_out, bidir_out;
    for (const auto& [u, v] : dir) dir_out.emplace_back(to_new[u], to_new[v]);
    for (const auto& [u, v] : bidir) bidir_out.emplace_back(to_new[u], to_new[v]);
    return MixedGraph(n - 1, std::move(dir_out), std::move(bidir_out), std::move(labels));
}

// Marginal MAG of a full mixture DAG with respect to its root; the result
// lives on the component copies [V].
inline MixedGraph mixture_mag(const Dag& d_mu, NodeId y, MarginalizeOptions opt = {}) {
    return marginalize_root(d_mu, y, opt);
}

}  // namespace mixdag

#endif  // MIXDAG_MARGINAL_HPP
