#ifndef MIXDAG_SEPARATION_HPP
#define MIXDAG_SEPARATION_HPP

#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "mixdag/graph.hpp"

namespace mixdag {

struct SeparationQuery {
    NodeSet set_a, set_b, set_c;
};

inline SeparationQuery make_query(std::vector<NodeId> a, std::vector<NodeId> b,
                                  std::vector<NodeId> c = {}) {
    return {make_node_set(std::move(a)), make_node_set(std::move(b)), make_node_set(std::move(c))};
}

inline void validate_query(int node_count, const SeparationQuery& q) {
    if (q.set_a.empty() || q.set_b.empty())
        throw std::invalid_argument("separation query: A and B must be nonempty");
    for (const NodeSet* s : {&q.set_a, &q.set_b, &q.set_c})
        for (NodeId v : *s) detail::check_node(node_count, v, "separation query");
    if (!set_intersection(q.set_a, q.set_b).empty() ||
        !set_intersection(q.set_a, q.set_c).empty() ||
        !set_intersection(q.set_b, q.set_c).empty())
        throw std::invalid_argument("separation query: A, B, C must be pairwise disjoint");
}

namespace detail {

// One traversal step: neighbor plus the endpoint marks of the connecting edge.
struct HalfEdge {
    NodeId to;
    Mark mark_here;  // mark at the current node's end
    Mark mark_there; // mark at the neighbor's end
};

inline std::vector<std::vector<HalfEdge>> half_edges(const Dag& g) {
    std::vector<std::vector<HalfEdge>> adj(g.node_count());
    for (const auto& [u, v] : g.edges()) {
        adj[u].push_back({v, Mark::Tail, Mark::Arrow});
        adj[v].push_back({u, Mark::Arrow, Mark::Tail});
    }
    return adj;
}

inline std::vector<std::vector<HalfEdge>> half_edges(const MixedGraph& g) {
    std::vector<std::vector<HalfEdge>> adj(g.node_count());
    for (const auto& [u, v] : g.directed_edges()) {
        adj[u].push_back({v, Mark::Tail, Mark::Arrow});
        adj[v].push_back({u, Mark::Arrow, Mark::Tail});
    }
    for (const auto& [u, v] : g.bidirected_edges()) {
        adj[u].push_back({v, Mark::Arrow, Mark::Arrow});
        adj[v].push_back({u, Mark::Arrow, Mark::Arrow});
    }
    return adj;
}

// Nodes with a directed path into C (including C itself); these activate
// colliders.
template <class G>
std::vector<char> collider_activators(const G& g, const NodeSet& c) {
    std::vector<char> act(g.node_count(), 0);
    std::vector<NodeId> stack;
    for (NodeId v : c) {
        act[v] = 1;
        stack.push_back(v);
    }
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId p : g.parents(v)) {
            if (!act[p]) {
                act[p] = 1;
                stack.push_back(p);
            }
        }
    }
    return act;
}

// Reachability over (node, entering-mark) states. A walk is blocked at an
// interior node m exactly when m is a collider (arrowheads on both incident
// edges) with no descendant in C, or a non-collider in C. Soundness for
// separation of A from B given C follows from the walk/path equivalence for
// m-connection.
template <class G>
bool connected_given(const G& g, const SeparationQuery& q) {
    validate_query(g.node_count(), q);
    const auto adj = half_edges(g);
    const auto act = collider_activators(g, q.set_c);
    std::vector<char> in_b(g.node_count(), 0), in_c(g.node_count(), 0);
    for (NodeId v : q.set_b) in_b[v] = 1;
    for (NodeId v : q.set_c) in_c[v] = 1;

    // state: node * 2 + (entered through an arrowhead ? 1 : 0)
    std::vector<char> seen(2 * g.node_count(), 0);
    std::queue<std::pair<NodeId, bool>> frontier;
    for (NodeId a : q.set_a) {
        for (const auto& he : adj[a]) {
            if (in_b[he.to]) return true;
            bool via_arrow = he.mark_there == Mark::Arrow;
            int s = he.to * 2 + (via_arrow ? 1 : 0);
            if (!seen[s]) {
                seen[s] = 1;
                frontier.push({he.to, via_arrow});
            }
        }
    }
    while (!frontier.empty()) {
        auto [v, entered_arrow] = frontier.front();
        frontier.pop();
        for (const auto& he : adj[v]) {
            const bool collider = entered_arrow && he.mark_here == Mark::Arrow;
            const bool passable = collider ? static_cast<bool>(act[v]) : !in_c[v];
            if (!passable) continue;
            if (in_b[he.to]) return true;
            bool via_arrow = he.mark_there == Mark::Arrow;
            int s = he.to * 2 + (via_arrow ? 1 : 0);
            if (!seen[s]) {
                seen[s] = 1;
                frontier.push({he.to, via_arrow});
            }
        }
    }
    return false;
}

}  // namespace detail

inline bool d_separated(const Dag& g, const SeparationQuery& q) {
    return !detail::connected_given(g, q);
}

inline bool m_separated(const MixedGraph& g, const SeparationQuery& q) {
    return !detail::connected_given(g, q);
}

// No directed cycle and no bidirected edge between a node and its ancestor.
inline bool is_ancestral(const MixedGraph& g) {
    const auto anc = ancestor_matrix(g);
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (NodeId u : g.parents(v))
            if (anc[u][v]) return false;  // v in an(u) and u -> v: directed cycle
    for (const auto& [u, v] : g.bidirected_edges())
        if (anc[v][u] || anc[u][v]) return false;
    return true;
}

// Inducing path: endpoints non-adjacent, every edge bidirected, every
// interior node an ancestor of an endpoint. Requires an ancestral input.
inline std::optional<std::vector<NodeId>> find_inducing_path(const MixedGraph& g) {
    if (!is_ancestral(g))
        throw std::invalid_argument("find_inducing_path: graph is not ancestral");
    const int n = g.node_count();
    const auto anc = ancestor_matrix(g);
    for (NodeId s = 0; s < n; ++s) {
        for (NodeId t = s + 1; t < n; ++t) {
            if (g.adjacent(s, t)) continue;
            // interior nodes must be ancestors of {s, t}
            std::vector<char> allowed(n, 0);
            for (NodeId v = 0; v < n; ++v) allowed[v] = anc[s][v] || anc[t][v];
            // shortest bidirected path s <-> ... <-> t through allowed interiors
            std::vector<NodeId> prev(n, -1);
            std::vector<char> seen(n, 0);
            std::queue<NodeId> q;
            seen[s] = 1;
            q.push(s);
            while (!q.empty() && !seen[t]) {
                NodeId v = q.front();
                q.pop();
                for (NodeId w : g.spouses(v)) {
                    if (seen[w]) continue;
                    if (w != t && !allowed[w]) continue;
                    seen[w] = 1;
                    prev[w] = v;
                    q.push(w);
                }
            }
            if (seen[t]) {
                std::vector<NodeId> path;
                for (NodeId v = t; v != -1; v = prev[v]) path.push_back(v);
                std::reverse(path.begin(), path.end());
                return path;
            }
        }
    }
    return std::nullopt;
}

// Lemma-style criterion: maximal iff no inducing path exists.
inline bool is_maximal(const MixedGraph& g) { return !find_inducing_path(g).has_value(); }

}  // namespace mixdag

#endif  // MIXDAG_SEPARATION_HPP
