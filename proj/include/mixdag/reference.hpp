#ifndef MIXDAG_REFERENCE_HPP
#define MIXDAG_REFERENCE_HPP

// Brute-force reference implementations. These deliberately avoid the
// reachability engine in separation.hpp so they can serve as independent
// oracles for it; they are exponential and only meant for small graphs.

#include <functional>
#include <vector>

#include "mixdag/combinatorics.hpp"
#include "mixdag/graph.hpp"
#include "mixdag/separation.hpp"

namespace mixdag::reference {

namespace detail {

struct EnumEdge {
    NodeId to;
    Mark mark_here, mark_there;
    bool bidirected;
};

inline std::vector<std::vector<EnumEdge>> enum_edges(const MixedGraph& g) {
    std::vector<std::vector<EnumEdge>> adj(g.node_count());
    for (const auto& [u, v] : g.directed_edges()) {
        adj[u].push_back({v, Mark::Tail, Mark::Arrow, false});
        adj[v].push_back({u, Mark::Arrow, Mark::Tail, false});
    }
    for (const auto& [u, v] : g.bidirected_edges()) {
        adj[u].push_back({v, Mark::Arrow, Mark::Arrow, true});
        adj[v].push_back({u, Mark::Arrow, Mark::Arrow, true});
    }
    return adj;
}

}  // namespace detail

// Exhaustive simple-path search for an m-connecting path, with an optional
// cap on the number of bidirected edges the path may use (-1 = no cap).
inline bool connected_by_path_enumeration(const MixedGraph& g, const SeparationQuery& q,
                                          int max_bidirected = -1) {
    validate_query(g.node_count(), q);
    const int n = g.node_count();
    const auto adj = detail::enum_edges(g);
    std::vector<char> in_b(n, 0), in_c(n, 0);
    for (NodeId v : q.set_b) in_b[v] = 1;
    for (NodeId v : q.set_c) in_c[v] = 1;
    std::vector<char> has_desc_in_c(n, 0);
    {
        std::vector<NodeId> stack(q.set_c.begin(), q.set_c.end());
        for (NodeId v : q.set_c) has_desc_in_c[v] = 1;
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            for (NodeId p : g.parents(v))
                if (!has_desc_in_c[p]) {
                    has_desc_in_c[p] = 1;
                    stack.push_back(p);
                }
        }
    }

    std::vector<char> on_path(n, 0);
    // prev_mark: mark at the current node of the edge we arrived through
    std::function<bool(NodeId, Mark, int)> dfs = [&](NodeId v, Mark prev_mark,
                                                     int bidir_used) -> bool {
        for (const auto& e : adj[v]) {
            if (on_path[e.to]) continue;
            if (e.bidirected && max_bidirected >= 0 && bidir_used + 1 > max_bidirected) continue;
            // v is interior between the previous edge and e
            const bool collider = prev_mark == Mark::Arrow && e.mark_here == Mark::Arrow;
            const bool active = collider ? static_cast<bool>(has_desc_in_c[v]) : !in_c[v];
            if (!active) continue;
            if (in_b[e.to]) return true;
            on_path[e.to] = 1;
            if (dfs(e.to, e.mark_there, bidir_used + (e.bidirected ? 1 : 0))) return true;
            on_path[e.to] = 0;
        }
        return false;
    };

    for (NodeId a : q.set_a) {
        for (const auto& e : adj[a]) {
            if (e.bidirected && max_bidirected >= 0 && max_bidirected < 1) continue;
            if (in_b[e.to]) return true;
            std::fill(on_path.begin(), on_path.end(), 0);
            on_path[a] = 1;
            on_path[e.to] = 1;
            if (dfs(e.to, e.mark_there, e.bidirected ? 1 : 0)) return true;
        }
    }
    return false;
}

inline bool connected_by_path_enumeration(const Dag& g, const SeparationQuery& q) {
    MixedGraph as_mixed(g.node_count(), g.edges(), {}, g.labels());
    return connected_by_path_enumeration(as_mixed, q);
}

// Classic moralization criterion for DAGs: restrict to ancestors of
// A u B u C, marry co-parents, drop directions, and look for a path from A
// to B avoiding C.
inline bool d_separated_moral(const Dag& g, const SeparationQuery& q) {
    validate_query(g.node_count(), q);
    const int n = g.node_count();
    std::vector<char> keep(n, 0);
    NodeSet abc = set_union(set_union(q.set_a, q.set_b), q.set_c);
    for (NodeId v : abc)
        for (NodeId u : ancestors(g, v)) keep[u] = 1;
    std::vector<std::vector<char>> und(n, std::vector<char>(n, 0));
    for (const auto& [u, v] : g.edges())
        if (keep[u] && keep[v]) und[u][v] = und[v][u] = 1;
    for (NodeId v = 0; v < n; ++v) {
        if (!keep[v]) continue;
        const auto& ps = g.parents(v);
        for (std::size_t i = 0; i < ps.size(); ++i)
            for (std::size_t j = i + 1; j < ps.size(); ++j)
                if (keep[ps[i]] && keep[ps[j]]) und[ps[i]][ps[j]] = und[ps[j]][ps[i]] = 1;
    }
    std::vector<char> in_c(n, 0), seen(n, 0);
    for (NodeId v : q.set_c) in_c[v] = 1;
    std::vector<NodeId> stack;
    for (NodeId a : q.set_a) {
        seen[a] = 1;
        stack.push_back(a);
    }
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId w = 0; w < n; ++w) {
            if (!und[v][w] || seen[w]) continue;
            if (set_contains(q.set_b, w)) return false;
            seen[w] = 1;
            if (!in_c[w]) stack.push_back(w);
        }
    }
    return true;
}

// Definitional separability check: does some subset of the remaining nodes
// m-separate u from v? Uses path enumeration, not the BFS engine.
inline bool separable_by_some_subset(const MixedGraph& g, NodeId u, NodeId v) {
    NodeSet rest;
    for (NodeId w = 0; w < g.node_count(); ++w)
        if (w != u && w != v) rest.push_back(w);
    return for_each_subset_by_size(rest, -1, [&](const NodeSet& c) {
        SeparationQuery q{{u}, {v}, c};
        return !connected_by_path_enumeration(g, q);
    });
}

inline bool is_maximal_by_definition(const MixedGraph& g) {
    for (NodeId u = 0; u < g.node_count(); ++u)
        for (NodeId v = u + 1; v < g.node_count(); ++v)
            if (!g.adjacent(u, v) && !separable_by_some_subset(g, u, v)) return false;
    return true;
}

}  // namespace mixdag::reference

#endif  // MIXDAG_REFERENCE_HPP
