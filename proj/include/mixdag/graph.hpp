#ifndef MIXDAG_GRAPH_HPP
#define MIXDAG_GRAPH_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mixdag {

using NodeId = int;
// Sorted, duplicate-free node set.
using NodeSet = std::vector<NodeId>;
using Edge = std::pair<NodeId, NodeId>;

enum class Mark { Circle, Tail, Arrow };

inline const char* mark_name(Mark m) {
    switch (m) {
        case Mark::Circle: return "circle";
        case Mark::Tail: return "tail";
        case Mark::Arrow: return "arrow";
    }
    return "?";
}

inline Mark mark_from_name(const std::string& s) {
    if (s == "circle") return Mark::Circle;
    if (s == "tail") return Mark::Tail;
    if (s == "arrow") return Mark::Arrow;
    throw std::invalid_argument("unknown endpoint mark: " + s);
}

namespace detail {

inline void check_node(int n, NodeId v, const char* what) {
    if (v < 0 || v >= n) {
        throw std::invalid_argument(std::string(what) + ": node " + std::to_string(v) +
                                    " out of range [0," + std::to_string(n) + ")");
    }
}

inline std::vector<std::string> default_labels(int n) {
    std::vector<std::string> out(n);
    for (int i = 0; i < n; ++i) out[i] = "X" + std::to_string(i + 1);
    return out;
}

inline void sort_unique(std::vector<Edge>& edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

}  // namespace detail

inline NodeSet make_node_set(std::vector<NodeId> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline bool set_contains(const NodeSet& s, NodeId v) {
    return std::binary_search(s.begin(), s.end(), v);
}

inline NodeSet set_union(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline NodeSet set_intersection(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline NodeSet set_difference(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Labeled directed acyclic graph over dense 0-based node indices.
// Immutable after construction; acyclicity is checked on construction.
class Dag {
public:
    Dag() : n_(0) {}

    explicit Dag(int node_count, std::vector<Edge> directed_edges = {},
                 std::vector<std::string> labels = {})
        : n_(node_count), edges_(std::move(directed_edges)) {
        if (n_ < 0) throw std::invalid_argument("Dag: negative node count");
        labels_ = labels.empty() ? detail::default_labels(n_) : std::move(labels);
        if (static_cast<int>(labels_.size()) != n_)
            throw std::invalid_argument("Dag: label count does not match node count");
        detail::sort_unique(edges_);
        children_.assign(n_, {});
        parents_.assign(n_, {});
        for (const auto& [u, v] : edges_) {
            detail::check_node(n_, u, "Dag edge");
            detail::check_node(n_, v, "Dag edge");
            if (u == v) throw std::invalid_argument("Dag: self-loop at node " + std::to_string(u));
            children_[u].push_back(v);
            parents_[v].push_back(u);
        }
        check_acyclic();
    }

    int node_count() const { return n_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(NodeId v) const { return labels_.at(v); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<NodeId>& children(NodeId v) const {
        detail::check_node(n_, v, "Dag::children");
        return children_[v];
    }
    const std::vector<NodeId>& parents(NodeId v) const {
        detail::check_node(n_, v, "Dag::parents");
        return parents_[v];
    }
    bool has_edge(NodeId u, NodeId v) const {
        return std::binary_search(edges_.begin(), edges_.end(), Edge{u, v});
    }
    int in_degree(NodeId v) const { return static_cast<int>(parents(v).size()); }

    // Equality is structural (node count and edge set); labels are not compared.
    bool operator==(const Dag& o) const { return n_ == o.n_ && edges_ == o.edges_; }

private:
    void check_acyclic() const {
        std::vector<int> indeg(n_, 0);
        for (const auto& e : edges_) indeg[e.second]++;
        std::queue<NodeId> q;
        for (NodeId v = 0; v < n_; ++v)
            if (indeg[v] == 0) q.push(v);
        int seen = 0;
        while (!q.empty()) {
            NodeId v = q.front();
            q.pop();
            ++seen;
            for (NodeId c : children_[v])
                if (--indeg[c] == 0) q.push(c);
        }
        if (seen != n_) throw std::invalid_argument("Dag: edge set contains a directed cycle");
    }

    int n_;
    std::vector<std::string> labels_;
    std::vector<Edge> edges_;
    std::vector<std::vector<NodeId>> children_, parents_;
};

// Mixed graph with directed and bidirected edges. At most one edge per
// unordered node pair. Ancestrality/maximality are queried, never assumed.
class MixedGraph {
public:
    MixedGraph() : n_(0) {}

    explicit MixedGraph(int node_count, std::vector<Edge> directed = {},
                        std::vector<Edge> bidirected = {}, std::vector<std::string> labels = {})
        : n_(node_count), directed_(std::move(directed)) {
        if (n_ < 0) throw std::invalid_argument("MixedGraph: negative node count");
        labels_ = labels.empty() ? detail::default_labels(n_) : std::move(labels);
        if (static_cast<int>(labels_.size()) != n_)
            throw std::invalid_argument("MixedGraph: label count does not match node count");
        bidirected_.reserve(bidirected.size());
        for (auto [u, v] : bidirected) {
            if (u > v) std::swap(u, v);
            bidirected_.emplace_back(u, v);
        }
        detail::sort_unique(directed_);
        detail::sort_unique(bidirected_);
        children_.assign(n_, {});
        parents_.assign(n_, {});
        spouses_.assign(n_, {});
        for (const auto& [u, v] : directed_) {
            detail::check_node(n_, u, "MixedGraph edge");
            detail::check_node(n_, v, "MixedGraph edge");
            if (u == v) throw std::invalid_argument("MixedGraph: self-loop");
            children_[u].push_back(v);
            parents_[v].push_back(u);
        }
        for (const auto& [u, v] : bidirected_) {
            detail::check_node(n_, u, "MixedGraph edge");
            detail::check_node(n_, v, "MixedGraph edge");
            if (u == v) throw std::invalid_argument("MixedGraph: self-loop");
            spouses_[u].push_back(v);
            spouses_[v].push_back(u);
        }
        for (NodeId v = 0; v < n_; ++v) {
            std::sort(spouses_[v].begin(), spouses_[v].end());
        }
        check_single_edge_per_pair();
    }

    int node_count() const { return n_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(NodeId v) const { return labels_.at(v); }
    const std::vector<Edge>& directed_edges() const { return directed_; }
    const std::vector<Edge>& bidirected_edges() const { return bidirected_; }
    const std::vector<NodeId>& children(NodeId v) const {
        detail::check_node(n_, v, "MixedGraph::children");
        return children_[v];
    }
    const std::vector<NodeId>& parents(NodeId v) const {
        detail::check_node(n_, v, "MixedGraph::parents");
        return parents_[v];
    }
    const std::vector<NodeId>& spouses(NodeId v) const {
        detail::check_node(n_, v, "MixedGraph::spouses");
        return spouses_[v];
    }
    bool has_directed(NodeId u, NodeId v) const {
        return std::binary_search(directed_.begin(), directed_.end(), Edge{u, v});
    }
    bool has_bidirected(NodeId u, NodeId v) const {
        if (u > v) std::swap(u, v);
        return std::binary_search(bidirected_.begin(), bidirected_.end(), Edge{u, v});
    }
    bool adjacent(NodeId u, NodeId v) const {
        return has_directed(u, v) || has_directed(v, u) || has_bidirected(u, v);
    }

    bool operator==(const MixedGraph& o) const {
        return n_ == o.n_ && directed_ == o.directed_ && bidirected_ == o.bidirected_;
    }

private:
    void check_single_edge_per_pair() const {
        for (const auto& [u, v] : directed_) {
            if (has_directed(v, u) && u < v)
                throw std::invalid_argument("MixedGraph: both u->v and v->u on pair (" +
                                            std::to_string(u) + "," + std::to_string(v) + ")");
            if (has_bidirected(u, v))
                throw std::invalid_argument("MixedGraph: pair (" + std::to_string(u) + "," +
                                            std::to_string(v) +
                                            ") carries both a directed and a bidirected edge");
        }
    }

    int n_;
    std::vector<std::string> labels_;
    std::vector<Edge> directed_, bidirected_;
    std::vector<std::vector<NodeId>> children_, parents_, spouses_;
};

// Partial ancestral graph: adjacencies with an endpoint mark at each end.
class Pag {
public:
    // marks maps each unordered adjacency (u < v) to (mark at u, mark at v).
    using MarkMap = std::map<Edge, std::pair<Mark, Mark>>;

    Pag() : n_(0) {}

    explicit Pag(int node_count, MarkMap marks = {}, std::vector<std::string> labels = {})
        : n_(node_count), marks_(std::move(marks)) {
        if (n_ < 0) throw std::invalid_argument("Pag: negative node count");
        labels_ = labels.empty() ? detail::default_labels(n_) : std::move(labels);
        if (static_cast<int>(labels_.size()) != n_)
            throw std::invalid_argument("Pag: label count does not match node count");
        for (const auto& [e, m] : marks_) {
            detail::check_node(n_, e.first, "Pag edge");
            detail::check_node(n_, e.second, "Pag edge");
            if (e.first >= e.second)
                throw std::invalid_argument("Pag: edge keys must satisfy u < v");
            (void)m;
        }
    }

    int node_count() const { return n_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const MarkMap& marks() const { return marks_; }
    bool adjacent(NodeId u, NodeId v) const {
        if (u > v) std::swap(u, v);
        return marks_.count({u, v}) > 0;
    }
    // Mark at node `at` on the edge between `at` and `other`.
    Mark mark_at(NodeId at, NodeId other) const {
        NodeId u = at, v = other;
        bool flipped = false;
        if (u > v) {
            std::swap(u, v);
            flipped = true;
        }
        auto it = marks_.find({u, v});
        if (it == marks_.end())
            throw std::invalid_argument("Pag::mark_at: nodes are not adjacent");
        return flipped ? it->second.second : it->second.first;
    }

    bool operator==(const Pag& o) const { return n_ == o.n_ && marks_ == o.marks_; }

private:
    int n_;
    std::vector<std::string> labels_;
    MarkMap marks_;
};

// Ancestors of v via directed edges, including v itself
// (Richardson-Spirtes convention). Works on Dag and MixedGraph.
template <class G>
NodeSet ancestors(const G& g, NodeId v) {
    detail::check_node(g.node_count(), v, "ancestors");
    std::vector<char> seen(g.node_count(), 0);
    std::vector<NodeId> stack{v};
    seen[v] = 1;
    while (!stack.empty()) {
        NodeId x = stack.back();
        stack.pop_back();
        for (NodeId p : g.parents(x)) {
            if (!seen[p]) {
                seen[p] = 1;
                stack.push_back(p);
            }
        }
    }
    NodeSet out;
    for (NodeId i = 0; i < g.node_count(); ++i)
        if (seen[i]) out.push_back(i);
    return out;
}

// Descendants of v via directed edges, including v itself.
template <class G>
NodeSet descendants(const G& g, NodeId v) {
    detail::check_node(g.node_count(), v, "descendants");
    std::vector<char> seen(g.node_count(), 0);
    std::vector<NodeId> stack{v};
    seen[v] = 1;
    while (!stack.empty()) {
        NodeId x = stack.back();
        stack.pop_back();
        for (NodeId c : g.children(x)) {
            if (!seen[c]) {
                seen[c] = 1;
                stack.push_back(c);
            }
        }
    }
    NodeSet out;
    for (NodeId i = 0; i < g.node_count(); ++i)
        if (seen[i]) out.push_back(i);
    return out;
}

// Full ancestor indicator matrix: anc[v][u] != 0 iff u is an ancestor of v.
template <class G>
std::vector<std::vector<char>> ancestor_matrix(const G& g) {
    const int n = g.node_count();
    std::vector<std::vector<char>> anc(n, std::vector<char>(n, 0));
    for (NodeId v = 0; v < n; ++v)
        for (NodeId u : ancestors(g, v)) anc[v][u] = 1;
    return anc;
}

// Topological order with deterministic tie-break by node index.
inline std::vector<NodeId> topological_order(const Dag& g) {
    const int n = g.node_count();
    std::vector<int> indeg(n, 0);
    for (const auto& e : g.edges()) indeg[e.second]++;
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (NodeId v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.push(v);
    std::vector<NodeId> order;
    order.reserve(n);
    while (!ready.empty()) {
        NodeId v = ready.top();
        ready.pop();
        order.push_back(v);
        for (NodeId c : g.children(v))
            if (--indeg[c] == 0) ready.push(c);
    }
    return order;
}

template <class G>
struct InducedSubgraph {
    G graph;
    // original[i] is the node in the parent graph that index i maps back to.
    std::vector<NodeId> original;
};

inline InducedSubgraph<Dag> induced_subgraph(const Dag& g, const NodeSet& nodes) {
    std::vector<NodeId> to_new(g.node_count(), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        detail::check_node(g.node_count(), nodes[i], "induced_subgraph");
        to_new[nodes[i]] = static_cast<NodeId>(i);
    }
    std::vector<Edge> edges;
    for (const auto& [u, v] : g.edges())
        if (to_new[u] >= 0 && to_new[v] >= 0) edges.emplace_back(to_new[u], to_new[v]);
    std::vector<std::string> labels;
    labels.reserve(nodes.size());
    for (NodeId v : nodes) labels.push_back(g.label(v));
    return {Dag(static_cast<int>(nodes.size()), std::move(edges), std::move(labels)),
            std::vector<NodeId>(nodes.begin(), nodes.end())};
}

inline InducedSubgraph<MixedGraph> induced_subgraph(const MixedGraph& g, const NodeSet& nodes) {
    std::vector<NodeId> to_new(g.node_count(), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        detail::check_node(g.node_count(), nodes[i], "induced_subgraph");
        to_new[nodes[i]] = static_cast<NodeId>(i);
    }
    std::vector<Edge> dir, bidir;
    for (const auto& [u, v] : g.directed_edges())
        if (to_new[u] >= 0 && to_new[v] >= 0) dir.emplace_back(to_new[u], to_new[v]);
    for (const auto& [u, v] : g.bidirected_edges())
        if (to_new[u] >= 0 && to_new[v] >= 0) bidir.emplace_back(to_new[u], to_new[v]);
    std::vector<std::string> labels;
    labels.reserve(nodes.size());
    for (NodeId v : nodes) labels.push_back(g.label(v));
    return {MixedGraph(static_cast<int>(nodes.size()), std::move(dir), std::move(bidir),
                       std::move(labels)),
            std::vector<NodeId>(nodes.begin(), nodes.end())};
}

}  // namespace mixdag

#endif  // MIXDAG_GRAPH_HPP
