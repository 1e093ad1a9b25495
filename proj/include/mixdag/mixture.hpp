#ifndef MIXDAG_MIXTURE_HPP
#define MIXDAG_MIXTURE_HPP

#include <cmath>
#include <cstdlib>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixdag/graph.hpp"
#include "mixdag/marginal.hpp"
#include "mixdag/separation.hpp"

namespace mixdag {

// K component DAGs over a common node set, the invariant-node set, and the
// mixing weights of the index variable.
struct MixtureSpec {
    std::vector<Dag> components;
    NodeSet v_inv;
    std::vector<double> mixing_weights;

    int component_count() const { return static_cast<int>(components.size()); }
    int base_node_count() const { return components.empty() ? 0 : components[0].node_count(); }

    void validate() const {
        if (components.empty()) throw std::invalid_argument("MixtureSpec: need at least one component");
        const int n = components[0].node_count();
        for (const auto& d : components)
            if (d.node_count() != n)
                throw std::invalid_argument("MixtureSpec: components must share the node count");
        for (NodeId v : v_inv) detail::check_node(n, v, "MixtureSpec::v_inv");
        if (mixing_weights.size() != components.size())
            throw std::invalid_argument("MixtureSpec: one mixing weight per component");
        double sum = 0;
        for (double w : mixing_weights) {
            if (w < 0) throw std::invalid_argument("MixtureSpec: negative mixing weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("MixtureSpec: mixing weights must sum to 1");
    }

    // Copy v of component j has index j*|V| + v; the root y is the last index.
    NodeId lift(NodeId v, int j) const { return j * base_node_count() + v; }
    NodeSet lift_set(const NodeSet& s) const {
        NodeSet out;
        for (int j = 0; j < component_count(); ++j)
            for (NodeId v : s) out.push_back(lift(v, j));
        return make_node_set(std::move(out));
    }
};

// Uniform-weight spec over the given components, with v_inv as stated.
inline MixtureSpec make_mixture_spec(std::vector<Dag> components, NodeSet v_inv) {
    MixtureSpec s;
    s.components = std::move(components);
    s.v_inv = make_node_set(std::move(v_inv));
    s.mixing_weights.assign(s.components.size(), 1.0 / s.components.size());
    s.validate();
    return s;
}

// DAG on K*|V|+1 nodes: the K components side by side plus a root y with an
// edge into every copy of every non-invariant node. Returns the DAG and y.
inline std::pair<Dag, NodeId> mixture_dag(const MixtureSpec& spec) {
    spec.validate();
    const int k = spec.component_count();
    const int n = spec.base_node_count();
    const NodeId y = k * n;
    std::vector<Edge> edges;
    std::vector<std::string> labels(k * n + 1);
    for (int j = 0; j < k; ++j) {
        for (const auto& [u, v] : spec.components[j].edges())
            edges.emplace_back(spec.lift(u, j), spec.lift(v, j));
        for (NodeId v = 0; v < n; ++v) {
            labels[spec.lift(v, j)] =
                spec.components[j].label(v) + "^(" + std::to_string(j + 1) + ")";
            if (!set_contains(spec.v_inv, v)) edges.emplace_back(y, spec.lift(v, j));
        }
    }
    labels[y] = "y";
    return {Dag(k * n + 1, std::move(edges), std::move(labels)), y};
}

// Component MAGs: marginalize each induced sub-DAG over V^(j) u {y} with
// respect to y, indexed back over the base nodes V.
inline std::vector<MixedGraph> component_mags(const MixtureSpec& spec,
                                              MarginalizeOptions opt = {}) {
    auto [dmu, y] = mixture_dag(spec);
    const int k = spec.component_count();
    const int n = spec.base_node_count();
    std::vector<MixedGraph> mags;
    mags.reserve(k);
    for (int j = 0; j < k; ++j) {
        NodeSet nodes;
        for (NodeId v = 0; v < n; ++v) nodes.push_back(spec.lift(v, j));
        nodes.push_back(y);
        auto sub = induced_subgraph(dmu, nodes);
        // y is the last index of the induced sub-DAG; the remaining indices
        // coincide with V, so the marginal graph needs no relabeling.
        mags.push_back(marginalize_root(sub.graph, n, opt));
    }
    return mags;
}

struct PosetCheck {
    bool compatible = false;
    // On success: the minimal strict partial order (transitively closed).
    std::vector<Edge> order;
    // On failure: either a directed cycle among the combined ancestor
    // relations, or a bidirected pair that the order forces to be comparable.
    std::vector<NodeId> cycle;
    std::optional<Edge> comparable_bidirected;
};

// The component MAGs are compatible with a common poset iff the transitive
// closure R of all their ancestor relations is acyclic and no bidirected
// pair is comparable under R. R itself is then the minimal witness order.
inline PosetCheck poset_compatible(const std::vector<MixedGraph>& mags) {
    if (mags.empty()) throw std::invalid_argument("poset_compatible: no graphs");
    const int n = mags[0].node_count();
    for (const auto& m : mags)
        if (m.node_count() != n)
            throw std::invalid_argument("poset_compatible: node-count mismatch");

    std::vector<std::vector<char>> lt(n, std::vector<char>(n, 0));
    for (const auto& m : mags) {
        const auto anc = ancestor_matrix(m);
        for (NodeId v = 0; v < n; ++v)
            for (NodeId u = 0; u < n; ++u)
                if (u != v && anc[v][u]) lt[u][v] = 1;  // u strictly below v
    }
    // Floyd-Warshall transitive closure.
    for (NodeId w = 0; w < n; ++w)
        for (NodeId u = 0; u < n; ++u)
            if (lt[u][w])
                for (NodeId v = 0; v < n; ++v)
                    if (lt[w][v]) lt[u][v] = 1;

    PosetCheck out;
    for (NodeId v = 0; v < n; ++v) {
        if (lt[v][v]) {
            // Recover one cycle through v for the witness.
            out.cycle.push_back(v);
            NodeId cur = v;
            std::vector<char> used(n, 0);
            used[v] = 1;
            bool closed = false;
            while (!closed) {
                closed = true;
                for (NodeId w = 0; w < n && closed; ++w) {
                    if (w != cur && lt[cur][w] && lt[w][v] && !used[w]) {
                        out.cycle.push_back(w);
                        used[w] = 1;
                        cur = w;
                        closed = false;
                    }
                }
            }
            return out;
        }
    }
    for (const auto& m : mags) {
        for (const auto& [u, v] : m.bidirected_edges()) {
            if (lt[u][v] || lt[v][u]) {
                out.comparable_bidirected = Edge{u, v};
                return out;
            }
        }
    }
    out.compatible = true;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = 0; v < n; ++v)
            if (lt[u][v]) out.order.emplace_back(u, v);
    return out;
}

class EdgeConflictError : public std::runtime_error {
public:
    explicit EdgeConflictError(const std::string& what) : std::runtime_error(what) {}
};

// Edge-wise union of the component MAGs. A pair appearing both directed and
// bidirected (or directed both ways) across components is reported as a
// conflict; this cannot happen when the MAGs are poset-compatible.
inline MixedGraph union_graph(const std::vector<MixedGraph>& mags) {
    if (mags.empty()) throw std::invalid_argument("union_graph: no graphs");
    const int n = mags[0].node_count();
    for (const auto& m : mags)
        if (m.node_count() != n) throw std::invalid_argument("union_graph: node-count mismatch");
    std::set<Edge> dir, bidir;
    for (const auto& m : mags) {
        for (const auto& e : m.directed_edges()) dir.insert(e);
        for (const auto& e : m.bidirected_edges()) bidir.insert(e);
    }
    for (const auto& [u, v] : dir) {
        if (dir.count({v, u}) && u < v)
            throw EdgeConflictError("union_graph: opposite directed edges on pair (" +
                                    std::to_string(u) + "," + std::to_string(v) + ")");
        if (bidir.count({std::min(u, v), std::max(u, v)}))
            throw EdgeConflictError("union_graph: directed/bidirected conflict on pair (" +
                                    std::to_string(u) + "," + std::to_string(v) +
                                    "); component MAGs are not poset-compatible");
    }
    return MixedGraph(n, std::vector<Edge>(dir.begin(), dir.end()),
                      std::vector<Edge>(bidir.begin(), bidir.end()), mags[0].labels());
}

// Nodes incident to at least one bidirected edge.
inline NodeSet varying_nodes(const MixedGraph& g) {
    NodeSet out;
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (!g.spouses(v).empty()) out.push_back(v);
    return out;
}

// Nodes incident to a definite bidirected PAG edge (arrow at both ends);
// circle marks are undecided and do not count.
inline NodeSet varying_nodes_from_pag(const Pag& p) {
    NodeSet out;
    for (const auto& [e, marks] : p.marks())
        if (marks.first == Mark::Arrow && marks.second == Mark::Arrow) {
            out.push_back(e.first);
            out.push_back(e.second);
        }
    return make_node_set(std::move(out));
}

// Per-node count of definite bidirected PAG edges, sorted by count
// descending with ties broken by node index.
inline std::vector<std::pair<NodeId, int>> bidirected_degree_ranking(const Pag& p) {
    std::vector<std::pair<NodeId, int>> counts(p.node_count());
    for (NodeId v = 0; v < p.node_count(); ++v) counts[v] = {v, 0};
    for (const auto& [e, marks] : p.marks())
        if (marks.first == Mark::Arrow && marks.second == Mark::Arrow) {
            counts[e.first].second++;
            counts[e.second].second++;
        }
    std::stable_sort(counts.begin(), counts.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return counts;
}

// Alternative representation from prior work: one root per component
// instead of a shared root. Nodes are [V] followed by y^(1),...,y^(K).
inline Dag mother_graph(const MixtureSpec& spec) {
    spec.validate();
    const int k = spec.component_count();
    const int n = spec.base_node_count();
    std::vector<Edge> edges;
    std::vector<std::string> labels(k * n + k);
    for (int j = 0; j < k; ++j) {
        const NodeId yj = k * n + j;
        labels[yj] = "y^(" + std::to_string(j + 1) + ")";
        for (const auto& [u, v] : spec.components[j].edges())
            edges.emplace_back(spec.lift(u, j), spec.lift(v, j));
        for (NodeId v = 0; v < n; ++v) {
            labels[spec.lift(v, j)] =
                spec.components[j].label(v) + "^(" + std::to_string(j + 1) + ")";
            if (!set_contains(spec.v_inv, v)) edges.emplace_back(yj, spec.lift(v, j));
        }
    }
    return Dag(k * n + k, std::move(edges), std::move(labels));
}

// m-d-connection in a mother graph for base-node query sets (lifted to all
// component copies). A path moves along edges of the mother graph but may
// also switch between the copies c^(j), c^(k) of a node when both copies
// receive an edge from their component root and the path enters/leaves
// through non-root parents; such a switch is a collider on the node c.
// Colliders must lie in [C] themselves (no descendant activation);
// non-colliders must avoid [C].
inline bool m_d_connected(const Dag& mother, const SeparationQuery& q, int k) {
    if (k <= 0) throw std::invalid_argument("m_d_connected: k must be positive");
    if (mother.node_count() % k != 0)
        throw std::invalid_argument("m_d_connected: node count incompatible with k components");
    const int n = mother.node_count() / k - 1;  // base |V|
    if (n <= 0) throw std::invalid_argument("m_d_connected: no base nodes");
    validate_query(n, q);
    const int n_obs = k * n;

    auto base_of = [&](NodeId x) { return x < n_obs ? x % n : -1; };  // -1 for roots
    auto root_of_component = [&](int j) { return static_cast<NodeId>(n_obs + j); };
    auto component_of = [&](NodeId x) { return x < n_obs ? x / n : x - n_obs; };

    std::vector<char> in_c(mother.node_count(), 0), in_b(mother.node_count(), 0);
    for (NodeId v : q.set_c)
        for (int j = 0; j < k; ++j) in_c[j * n + v] = 1;
    for (NodeId v : q.set_b)
        for (int j = 0; j < k; ++j) in_b[j * n + v] = 1;

    // Undirected step candidates within the mother graph.
    std::vector<std::vector<NodeId>> nbrs(mother.node_count());
    for (const auto& [u, v] : mother.edges()) {
        nbrs[u].push_back(v);
        nbrs[v].push_back(u);
    }

    auto has_root_parent = [&](NodeId x) {
        if (x >= n_obs) return false;
        return mother.has_edge(root_of_component(component_of(x)), x);
    };
    auto has_nonroot_parent_other_than = [&](NodeId x, NodeId excl) {
        for (NodeId p : mother.parents(x))
            if (p < n_obs && p != excl) return true;
        return false;
    };

    // Depth-first search over simple node sequences; `switched` marks that
    // the last move was a copy switch, which constrains the next step to a
    // non-root parent of the current copy.
    std::vector<char> used(mother.node_count(), 0);
    std::function<bool(NodeId, NodeId, bool)> dfs = [&](NodeId prev, NodeId cur,
                                                        bool arrived_by_switch) -> bool {
        if (in_b[cur] && !arrived_by_switch) return true;
        // regular edge moves
        for (NodeId next : nbrs[cur]) {
            if (used[next]) continue;
            bool ok;
            if (arrived_by_switch) {
                // must leave through a non-root parent: next -> cur in E
                ok = next < n_obs && mother.has_edge(next, cur);
                if (ok) {
                    // cur is an m-collider of the switch triple; membership in
                    // [C] was already enforced at switch time
                }
            } else {
                const bool collider = mother.has_edge(prev, cur) && mother.has_edge(next, cur);
                ok = collider ? static_cast<bool>(in_c[cur])
                              : !in_c[cur];
            }
            if (!ok) continue;
            used[next] = 1;
            if (dfs(cur, next, false)) return true;
            used[next] = 0;
        }
        // copy-switch moves: prev -> cur must be a non-root parent edge,
        // both copies need root parents, and the base node must be in C
        if (!arrived_by_switch && prev >= 0 && prev < n_obs && cur < n_obs &&
            mother.has_edge(prev, cur) && has_root_parent(cur)) {
            const NodeId b = base_of(cur);
            if (set_contains(q.set_c, b)) {
                for (int j = 0; j < k; ++j) {
                    const NodeId twin = j * n + b;
                    if (twin == cur || used[twin]) continue;
                    if (!has_root_parent(twin)) continue;
                    if (!has_nonroot_parent_other_than(twin, -1)) continue;
                    used[twin] = 1;
                    if (dfs(cur, twin, true)) return true;
                    used[twin] = 0;
                }
            }
        }
        return false;
    };

    for (NodeId a : q.set_a) {
        for (int j = 0; j < k; ++j) {
            const NodeId start = j * n + a;
            std::fill(used.begin(), used.end(), 0);
            used[start] = 1;
            for (NodeId first : nbrs[start]) {
                if (in_b[first]) return true;
                used[first] = 1;
                if (dfs(start, first, false)) return true;
                used[first] = 0;
            }
        }
    }
    return false;
}

}  // namespace mixdag

#endif  // MIXDAG_MIXTURE_HPP
