#ifndef MIXDAG_FCI_HPP
#define MIXDAG_FCI_HPP

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixdag/ci.hpp"
#include "mixdag/combinatorics.hpp"
#include "mixdag/graph.hpp"
#include "mixdag/rng.hpp"
#include "mixdag/separation.hpp"

namespace mixdag {

// Separating sets found during skeleton search, keyed by unordered pair.
// Every stored set actually rendered its pair independent under the oracle.
struct SepsetTable {
    std::map<Edge, NodeSet> table;

    static Edge key(NodeId a, NodeId b) { return {std::min(a, b), std::max(a, b)}; }
    bool has(NodeId a, NodeId b) const { return table.count(key(a, b)) > 0; }
    const NodeSet* find(NodeId a, NodeId b) const {
        auto it = table.find(key(a, b));
        return it == table.end() ? nullptr : &it->second;
    }
    void set(NodeId a, NodeId b, NodeSet c) { table[key(a, b)] = std::move(c); }
};

struct FciOptions {
    // Cap on conditioning-set size in the adjacency phase (-1: unlimited).
    int max_cond_size = -1;
    // Cap on subset size in the Possible-D-SEP phase; -1 resolves to
    // unlimited for graphs of at most 10 nodes and 4 above that.
    int pds_subset_cap = -1;
};

namespace fci_detail {

// Mutable partially oriented graph; mark(i, j) is the symbol at i's end of
// the edge between i and j.
class WorkGraph {
public:
    explicit WorkGraph(int n) : n_(n), adj_(n, std::vector<char>(n, 0)),
                                mark_(n, std::vector<Mark>(n, Mark::Circle)) {
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = 0; b < n; ++b) adj_[a][b] = a != b;
    }

    int node_count() const { return n_; }
    bool adjacent(NodeId a, NodeId b) const { return adj_[a][b]; }
    Mark mark(NodeId at, NodeId other) const { return mark_[at][other]; }
    void set_mark(NodeId at, NodeId other, Mark m) { mark_[at][other] = m; }
    void remove_edge(NodeId a, NodeId b) { adj_[a][b] = adj_[b][a] = 0; }
    void reset_marks() {
        for (auto& row : mark_) std::fill(row.begin(), row.end(), Mark::Circle);
    }
    NodeSet neighbors(NodeId v) const {
        NodeSet out;
        for (NodeId w = 0; w < n_; ++w)
            if (adj_[v][w]) out.push_back(w);
        return out;
    }
    int degree(NodeId v) const {
        int d = 0;
        for (NodeId w = 0; w < n_; ++w) d += adj_[v][w];
        return d;
    }

    Pag to_pag(std::vector<std::string> labels) const {
        Pag::MarkMap marks;
        for (NodeId a = 0; a < n_; ++a)
            for (NodeId b = a + 1; b < n_; ++b)
                if (adj_[a][b]) marks[{a, b}] = {mark_[a][b], mark_[b][a]};
        return Pag(n_, std::move(marks), std::move(labels));
    }

private:
    int n_;
    std::vector<std::vector<char>> adj_;
    std::vector<std::vector<Mark>> mark_;
};

inline std::string query_string(NodeId a, NodeId b, const NodeSet& c) {
    std::string s = "(" + std::to_string(a) + "," + std::to_string(b) + " | {";
    for (std::size_t i = 0; i < c.size(); ++i)
        s += (i ? "," : "") + std::to_string(c[i]);
    return s + "})";
}

inline bool ask(const CiOracle& oracle, NodeId a, NodeId b, const NodeSet& c) {
    try {
        return oracle.independent(a, b, c);
    } catch (const std::exception& e) {
        throw std::runtime_error("CI oracle failed on query " + query_string(a, b, c) + ": " +
                                 e.what());
    }
}

// PC-style adjacency search over growing conditioning-set sizes; removals
// take effect immediately and the visit order is fixed, so sepsets are
// reproducible.
inline void adjacency_phase(WorkGraph& g, const CiOracle& oracle, SepsetTable& sepsets,
                            int max_cond) {
    const int n = g.node_count();
    const int bound = max_cond < 0 ? n - 2 : std::min(max_cond, n - 2);
    for (int l = 0; l <= bound; ++l) {
        bool any_big_enough = false;
        for (NodeId a = 0; a < n; ++a) {
            for (NodeId b = a + 1; b < n; ++b) {
                if (!g.adjacent(a, b)) continue;
                bool removed = false;
                for (NodeId side : {a, b}) {
                    const NodeId other = side == a ? b : a;
                    NodeSet cand = g.neighbors(side);
                    cand.erase(std::remove(cand.begin(), cand.end(), other), cand.end());
                    if (static_cast<int>(cand.size()) < l) continue;
                    any_big_enough = true;
                    removed = for_each_subset_colex(cand, l, [&](const NodeSet& c) {
                        if (!ask(oracle, a, b, c)) return false;
                        g.remove_edge(a, b);
                        sepsets.set(a, b, c);
                        return true;
                    });
                    if (removed) break;
                }
                (void)removed;
            }
        }
        if (!any_big_enough) break;
    }
}

inline void orient_v_structures(WorkGraph& g, const SepsetTable& sepsets) {
    const int n = g.node_count();
    for (NodeId c = 0; c < n; ++c) {
        const NodeSet nb = g.neighbors(c);
        for (std::size_t i = 0; i < nb.size(); ++i) {
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                const NodeId a = nb[i], b = nb[j];
                if (g.adjacent(a, b)) continue;
                const NodeSet* sep = sepsets.find(a, b);
                if (sep && !set_contains(*sep, c)) {
                    g.set_mark(c, a, Mark::Arrow);
                    g.set_mark(c, b, Mark::Arrow);
                }
            }
        }
    }
}

// Possible-D-SEP set of a: nodes reachable by a path on which every
// interior vertex is either a collider of the path or the middle of a
// triangle. Computed on the partially oriented graph.
inline NodeSet possible_d_sep(const WorkGraph& g, NodeId a) {
    const int n = g.node_count();
    std::vector<std::vector<char>> seen(n, std::vector<char>(n, 0));  // (prev, cur)
    std::vector<std::pair<NodeId, NodeId>> stack;
    std::vector<char> reached(n, 0);
    for (NodeId x = 0; x < n; ++x) {
        if (g.adjacent(a, x)) {
            seen[a][x] = 1;
            reached[x] = 1;
            stack.emplace_back(a, x);
        }
    }
    while (!stack.empty()) {
        auto [p, c] = stack.back();
        stack.pop_back();
        for (NodeId x = 0; x < n; ++x) {
            if (x == p || x == c || !g.adjacent(c, x)) continue;
            const bool collider = g.mark(c, p) == Mark::Arrow && g.mark(c, x) == Mark::Arrow;
            const bool triangle = g.adjacent(p, x);
            if (!collider && !triangle) continue;
            if (seen[c][x]) continue;
            seen[c][x] = 1;
            reached[x] = 1;
            stack.emplace_back(c, x);
        }
    }
    reached[a] = 0;
    NodeSet out;
    for (NodeId x = 0; x < n; ++x)
        if (reached[x]) out.push_back(x);
    return out;
}

inline void possible_d_sep_phase(WorkGraph& g, const CiOracle& oracle, SepsetTable& sepsets,
                                 int subset_cap) {
    const int n = g.node_count();
    const int cap = subset_cap >= 0 ? subset_cap : (n <= 10 ? -1 : 4);
    for (NodeId a = 0; a < n; ++a) {
        for (NodeId b = a + 1; b < n; ++b) {
            if (!g.adjacent(a, b)) continue;
            bool removed = false;
            for (NodeId side : {a, b}) {
                NodeSet cand = possible_d_sep(g, side);
                cand.erase(std::remove_if(cand.begin(), cand.end(),
                                          [&](NodeId x) { return x == a || x == b; }),
                           cand.end());
                removed = for_each_subset_by_size(cand, cap, [&](const NodeSet& c) {
                    if (!ask(oracle, a, b, c)) return false;
                    g.remove_edge(a, b);
                    sepsets.set(a, b, c);
                    return true;
                });
                if (removed) break;
            }
            (void)removed;
        }
    }
}

// --- Complete orientation rules (selection-bias rules R5-R7 are not needed
// --- because the graphs in scope carry no undirected edges).

inline bool rule1(WorkGraph& g) {
    bool changed = false;
    const int n = g.node_count();
    for (NodeId b = 0; b < n; ++b)
        for (NodeId a = 0; a < n; ++a) {
            if (a == b || !g.adjacent(a, b) || g.mark(b, a) != Mark::Arrow) continue;
            for (NodeId c = 0; c < n; ++c) {
                if (c == a || c == b || !g.adjacent(b, c) || g.adjacent(a, c)) continue;
                if (g.mark(b, c) == Mark::Circle) {
                    g.set_mark(b, c, Mark::Tail);
                    g.set_mark(c, b, Mark::Arrow);
                    changed = true;
                }
            }
        }
    return changed;
}

inline bool rule2(WorkGraph& g) {
    bool changed = false;
    const int n = g.node_count();
    for (NodeId a = 0; a < n; ++a)
        for (NodeId c = 0; c < n; ++c) {
            if (a == c || !g.adjacent(a, c) || g.mark(c, a) != Mark::Circle) continue;
            for (NodeId b = 0; b < n; ++b) {
                if (b == a || b == c || !g.adjacent(a, b) || !g.adjacent(b, c)) continue;
                const bool chain1 = g.mark(a, b) == Mark::Tail && g.mark(b, a) == Mark::Arrow &&
                                    g.mark(c, b) == Mark::Arrow;
                const bool chain2 = g.mark(b, a) == Mark::Arrow && g.mark(b, c) == Mark::Tail &&
                                    g.mark(c, b) == Mark::Arrow;
                if (chain1 || chain2) {
                    g.set_mark(c, a, Mark::Arrow);
                    changed = true;
                    break;
                }
            }
        }
    return changed;
}

inline bool rule3(WorkGraph& g) {
    bool changed = false;
    const int n = g.node_count();
    for (NodeId b = 0; b < n; ++b)
        for (NodeId d = 0; d < n; ++d) {
            if (b == d || !g.adjacent(d, b) || g.mark(b, d) != Mark::Circle) continue;
            bool fired = false;
            for (NodeId a = 0; a < n && !fired; ++a) {
                if (a == b || a == d) continue;
                if (!g.adjacent(a, b) || g.mark(b, a) != Mark::Arrow) continue;
                if (!g.adjacent(a, d) || g.mark(d, a) != Mark::Circle) continue;
                for (NodeId c = 0; c < n && !fired; ++c) {
                    if (c == a || c == b || c == d || g.adjacent(a, c)) continue;
                    if (!g.adjacent(c, b) || g.mark(b, c) != Mark::Arrow) continue;
                    if (!g.adjacent(c, d) || g.mark(d, c) != Mark::Circle) continue;
                    g.set_mark(b, d, Mark::Arrow);
                    changed = true;
                    fired = true;
                }
            }
        }
    return changed;
}

// Depth-first search for a discriminating path for the triple
// (alpha, beta, gamma); returns the far endpoint theta if one exists.
inline std::optional<NodeId> find_discriminating_theta(const WorkGraph& g, NodeId alpha,
                                                       NodeId beta, NodeId gamma) {
    const int n = g.node_count();
    std::vector<char> on_path(n, 0);
    on_path[alpha] = on_path[beta] = on_path[gamma] = 1;
    // state: earliest path vertex u (collider, parent of gamma) whose
    // left-side arrowhead is still unverified
    std::function<std::optional<NodeId>(NodeId)> extend =
        [&](NodeId u) -> std::optional<NodeId> {
        for (NodeId t = 0; t < n; ++t) {
            if (t == gamma || on_path[t] || !g.adjacent(t, u)) continue;
            if (g.mark(u, t) != Mark::Arrow) continue;  // u must be a collider
            if (!g.adjacent(t, gamma)) return t;        // theta found
            // t must itself be a collider and a parent of gamma to extend
            const bool t_parent_of_gamma = g.mark(t, gamma) == Mark::Tail &&
                                           g.mark(gamma, t) == Mark::Arrow;
            if (!t_parent_of_gamma) continue;
            if (g.mark(t, u) != Mark::Arrow) continue;
            on_path[t] = 1;
            if (auto theta = extend(t)) return theta;
            on_path[t] = 0;
        }
        return std::nullopt;
    };
    return extend(alpha);
}

inline bool rule4(WorkGraph& g, const SepsetTable& sepsets) {
    bool changed = false;
    const int n = g.node_count();
    for (NodeId beta = 0; beta < n; ++beta) {
        for (NodeId gamma = 0; gamma < n; ++gamma) {
            if (beta == gamma || !g.adjacent(beta, gamma)) continue;
            if (g.mark(beta, gamma) != Mark::Circle) continue;
            for (NodeId alpha = 0; alpha < n; ++alpha) {
                if (alpha == beta || alpha == gamma) continue;
                if (!g.adjacent(alpha, beta) || !g.adjacent(alpha, gamma)) continue;
                // alpha: collider on the path toward beta, parent of gamma
                if (g.mark(alpha, beta) != Mark::Arrow) continue;
                if (!(g.mark(alpha, gamma) == Mark::Tail && g.mark(gamma, alpha) == Mark::Arrow))
                    continue;
                auto theta = find_discriminating_theta(g, alpha, beta, gamma);
                if (!theta) continue;
                const NodeSet* sep = sepsets.find(*theta, gamma);
                if (sep && set_contains(*sep, beta)) {
                    g.set_mark(beta, gamma, Mark::Tail);
                    g.set_mark(gamma, beta, Mark::Arrow);
                } else {
                    g.set_mark(alpha, beta, Mark::Arrow);
                    g.set_mark(beta, alpha, Mark::Arrow);
                    g.set_mark(beta, gamma, Mark::Arrow);
                    g.set_mark(gamma, beta, Mark::Arrow);
                }
                changed = true;
                break;
            }
        }
    }
    return changed;
}

inline bool rule8(WorkGraph& g) {
    bool changed = false;
    const int n = g.node_count();
    for (NodeId a = 0; a < n; ++a)
        for (NodeId c = 0; c < n; ++c) {
            if (a == c || !g.adjacent(a, c)) continue;
            if (!(g.mark(a, c) == Mark::Circle && g.mark(c, a) == Mark::Arrow)) continue;
            for (NodeId b = 0; b < n; ++b) {
                if (b == a || b == c || !g.adjacent(a, b) || !g.adjacent(b, c)) continue;
                const bool ab_directed =
                    g.mark(a, b) == Mark::Tail && g.mark(b, a) == Mark::Arrow;
                const bool ab_tail_circle =
                    g.mark(a, b) == Mark::Tail && g.mark(b, a) == Mark::Circle;
                const bool bc_directed =
                    g.mark(b, c) == Mark::Tail && g.mark(c, b) == Mark::Arrow;
                if ((ab_directed || ab_tail_circle) && bc_directed) {
                    g.set_mark(a, c, Mark::Tail);
                    changed = true;
                    break;
                }
            }
        }
    return changed;
}

// Potentially directed edge from u toward v: no arrowhead at u, no tail at v.
inline bool pd_edge(const WorkGraph& g, NodeId u, NodeId v) {
    return g.adjacent(u, v) && g.mark(u, v) != Mark::Arrow && g.mark(v, u) != Mark::Tail;
}

// Uncovered potentially directed path from `a` to `target` whose first edge
// goes to `first`. Consecutive triple endpoints must be non-adjacent.
inline bool uncovered_pd_path_via(const WorkGraph& g, NodeId a, NodeId first, NodeId target) {
    if (!pd_edge(g, a, first)) return false;
    if (first == target) return true;
    const int n = g.node_count();
    std::vector<char> on_path(n, 0);
    on_path[a] = on_path[first] = 1;
    std::function<bool(NodeId, NodeId)> dfs = [&](NodeId prev, NodeId cur) -> bool {
        for (NodeId nxt = 0; nxt < n; ++nxt) {
            if (on_path[nxt] || !pd_edge(g, cur, nxt)) continue;
            if (g.adjacent(prev, nxt)) continue;  // covered triple
            if (nxt == target) return true;
            on_path[nxt] = 1;
            if (dfs(cur, nxt)) return true;
            on_path[nxt] = 0;
        }
        return false;
    };
    return dfs(a, first);
}

inline bool rule9(WorkGraph& g) {
    bool changed = false;
    const int n = g.node_count();
    for (NodeId a = 0; a < n; ++a)
        for (NodeId c = 0; c < n; ++c) {
            if (a == c || !g.adjacent(a, c)) continue;
            if (!(g.mark(a, c) == Mark::Circle && g.mark(c, a) == Mark::Arrow)) continue;
            for (NodeId b = 0; b < n; ++b) {
                if (b == a || b == c || g.adjacent(b, c)) continue;
                if (uncovered_pd_path_via(g, a, b, c)) {
                    g.set_mark(a, c, Mark::Tail);
                    changed = true;
                    break;
                }
            }
        }
    return changed;
}

inline bool rule10(WorkGraph& g) {
    bool changed = false;
    const int n = g.node_count();
    for (NodeId a = 0; a < n; ++a)
        for (NodeId c = 0; c < n; ++c) {
            if (a == c || !g.adjacent(a, c)) continue;
            if (!(g.mark(a, c) == Mark::Circle && g.mark(c, a) == Mark::Arrow)) continue;
            bool fired = false;
            for (NodeId b = 0; b < n && !fired; ++b) {
                if (b == a || b == c || !g.adjacent(b, c)) continue;
                if (!(g.mark(b, c) == Mark::Tail && g.mark(c, b) == Mark::Arrow)) continue;
                for (NodeId d = 0; d < n && !fired; ++d) {
                    if (d == a || d == b || d == c || !g.adjacent(d, c)) continue;
                    if (!(g.mark(d, c) == Mark::Tail && g.mark(c, d) == Mark::Arrow)) continue;
                    for (NodeId mu = 0; mu < n && !fired; ++mu) {
                        if (mu == a || !pd_edge(g, a, mu)) continue;
                        if (!uncovered_pd_path_via(g, a, mu, b)) continue;
                        for (NodeId om = 0; om < n && !fired; ++om) {
                            if (om == a || om == mu || g.adjacent(mu, om)) continue;
                            if (!pd_edge(g, a, om)) continue;
                            if (!uncovered_pd_path_via(g, a, om, d)) continue;
                            g.set_mark(a, c, Mark::Tail);
                            changed = true;
                            fired = true;
                        }
                    }
                }
            }
        }
    return changed;
}

inline void orientation_rules(WorkGraph& g, const SepsetTable& sepsets) {
    bool changed = true;
    while (changed) {
        changed = false;
        changed |= rule1(g);
        changed |= rule2(g);
        changed |= rule3(g);
        changed |= rule4(g, sepsets);
        changed |= rule8(g);
        changed |= rule9(g);
        changed |= rule10(g);
    }
}

}  // namespace fci_detail

struct FciRun {
    Pag pag;
    SepsetTable sepsets;
};

// FCI over a conditional-independence oracle: adjacency search, v-structure
// orientation, Possible-D-SEP pruning with re-orientation, then the complete
// arrowhead/tail rules.
inline FciRun fci_run(const CiOracle& oracle, int n_nodes, FciOptions opt = {},
                      std::vector<std::string> labels = {}) {
    if (n_nodes < 1) throw std::invalid_argument("fci: need at least one node");
    if (labels.empty()) labels = detail::default_labels(n_nodes);
    fci_detail::WorkGraph g(n_nodes);
    SepsetTable sepsets;
    fci_detail::adjacency_phase(g, oracle, sepsets, opt.max_cond_size);
    fci_detail::orient_v_structures(g, sepsets);
    fci_detail::possible_d_sep_phase(g, oracle, sepsets, opt.pds_subset_cap);
    g.reset_marks();
    fci_detail::orient_v_structures(g, sepsets);
    fci_detail::orientation_rules(g, sepsets);
    return {g.to_pag(std::move(labels)), std::move(sepsets)};
}

inline Pag fci(const CiOracle& oracle, int n_nodes, FciOptions opt = {},
               std::vector<std::string> labels = {}) {
    return fci_run(oracle, n_nodes, opt, std::move(labels)).pag;
}

// Test oracle: the PAG of a MAG by explicit enumeration of its Markov
// equivalence class. Every orientation of the skeleton that is ancestral,
// maximal, and separation-equivalent to the input contributes; endpoint
// marks that are unanimous across the class are emitted, circles otherwise.
inline Pag brute_force_pag(const MixedGraph& mag) {
    const int n = mag.node_count();
    if (n > 7) throw std::invalid_argument("brute_force_pag: graphs above 7 nodes unsupported");
    std::vector<Edge> skeleton;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (mag.adjacent(u, v)) skeleton.emplace_back(u, v);
    const int e = static_cast<int>(skeleton.size());
    double combos = std::pow(3.0, e);
    if (combos > 2e6) throw std::invalid_argument("brute_force_pag: skeleton too dense");

    // Reference separation relations, singleton pairs against all subsets.
    std::vector<NodeSet> rest_of(n * n);
    auto pair_list = [&]() {
        std::vector<Edge> ps;
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = a + 1; b < n; ++b) {
                if (mag.adjacent(a, b)) continue;
                ps.emplace_back(a, b);
                NodeSet rest;
                for (NodeId w = 0; w < n; ++w)
                    if (w != a && w != b) rest.push_back(w);
                rest_of[a * n + b] = rest;
            }
        return ps;
    }();

    auto separation_profile = [&](const MixedGraph& g) {
        std::vector<char> profile;
        for (const auto& [a, b] : pair_list) {
            for_each_subset_by_size(rest_of[a * n + b], -1, [&](const NodeSet& c) {
                profile.push_back(m_separated(g, SeparationQuery{{a}, {b}, c}) ? 1 : 0);
                return false;
            });
        }
        return profile;
    };
    const std::vector<char> want = separation_profile(mag);
    auto matches_profile = [&](const MixedGraph& g) {
        std::size_t pos = 0;
        for (const auto& [a, b] : pair_list) {
            const bool mismatch =
                for_each_subset_by_size(rest_of[a * n + b], -1, [&](const NodeSet& c) {
                    const char sep = m_separated(g, SeparationQuery{{a}, {b}, c}) ? 1 : 0;
                    return sep != want[pos++];
                });
            if (mismatch) return false;
        }
        return true;
    };

    // Accumulated endpoint marks; -1 = not seen, otherwise Mark values with
    // a sentinel for "mixed".
    constexpr int kUnseen = -1, kMixed = 3;
    std::vector<std::pair<int, int>> marks(e, {kUnseen, kUnseen});
    auto fold = [&](int& slot, Mark m) {
        const int val = static_cast<int>(m);
        if (slot == kUnseen) slot = val;
        else if (slot != val) slot = kMixed;
    };

    long members = 0;
    std::vector<int> assign(e, 0);
    for (;;) {
        std::vector<Edge> dir, bidir;
        for (int i = 0; i < e; ++i) {
            const auto [u, v] = skeleton[i];
            if (assign[i] == 0) dir.emplace_back(u, v);
            else if (assign[i] == 1) dir.emplace_back(v, u);
            else bidir.emplace_back(u, v);
        }
        MixedGraph cand(n, std::move(dir), std::move(bidir), mag.labels());
        if (is_ancestral(cand) && is_maximal(cand) && matches_profile(cand)) {
            ++members;
            for (int i = 0; i < e; ++i) {
                const auto [u, v] = skeleton[i];
                Mark at_u, at_v;
                if (assign[i] == 0) {
                    at_u = Mark::Tail;
                    at_v = Mark::Arrow;
                } else if (assign[i] == 1) {
                    at_u = Mark::Arrow;
                    at_v = Mark::Tail;
                } else {
                    at_u = Mark::Arrow;
                    at_v = Mark::Arrow;
                }
                fold(marks[i].first, at_u);
                fold(marks[i].second, at_v);
            }
        }
        int pos = 0;
        while (pos < e && assign[pos] == 2) assign[pos++] = 0;
        if (pos == e) break;
        assign[pos]++;
    }
    if (members == 0)
        throw std::logic_error("brute_force_pag: input graph is not in its own class");

    Pag::MarkMap out;
    for (int i = 0; i < e; ++i) {
        auto to_mark = [&](int slot) {
            return slot == kMixed ? Mark::Circle : static_cast<Mark>(slot);
        };
        out[skeleton[i]] = {to_mark(marks[i].first), to_mark(marks[i].second)};
    }
    return Pag(n, std::move(out), mag.labels());
}

// FCI with stability selection: run FCI on row subsamples, keep adjacencies
// whose frequency reaches the threshold, and decide endpoint marks by
// majority among the runs containing the adjacency (circle on ties).
inline Pag fci_stability_selection(const Eigen::MatrixXd& data, double alpha, int n_subsamples,
                                   double keep_fraction, double threshold, Rng& rng,
                                   FciOptions opt = {}, std::vector<std::string> labels = {}) {
    if (n_subsamples < 2)
        throw std::invalid_argument("fci_stability_selection: need at least 2 subsamples");
    if (!(keep_fraction > 0.0 && keep_fraction < 1.0))
        throw std::invalid_argument("fci_stability_selection: keep_fraction must be in (0,1)");
    const int n = static_cast<int>(data.rows());
    const int p = static_cast<int>(data.cols());
    const int m = static_cast<int>(std::floor(keep_fraction * n));
    if (m < 5) throw std::invalid_argument("fci_stability_selection: subsample too small");
    if (labels.empty()) labels = detail::default_labels(p);

    std::vector<Pag> pags;
    pags.reserve(n_subsamples);
    for (int s = 0; s < n_subsamples; ++s) {
        Rng sub_rng = rng.derive(s);
        std::vector<int> rows = sub_rng.permutation(n);
        rows.resize(m);
        std::sort(rows.begin(), rows.end());
        Eigen::MatrixXd sub(m, p);
        for (int i = 0; i < m; ++i) sub.row(i) = data.row(rows[i]);
        pags.push_back(fci(FisherZOracle(sub, alpha), p, opt, labels));
    }

    Pag::MarkMap marks;
    for (NodeId u = 0; u < p; ++u) {
        for (NodeId v = u + 1; v < p; ++v) {
            int count = 0;
            std::map<Mark, int> at_u, at_v;
            for (const auto& pag : pags) {
                if (!pag.adjacent(u, v)) continue;
                ++count;
                at_u[pag.mark_at(u, v)]++;
                at_v[pag.mark_at(v, u)]++;
            }
            if (count == 0) continue;
            const double freq = static_cast<double>(count) / n_subsamples;
            if (freq < threshold) continue;
            auto majority = [](const std::map<Mark, int>& votes) {
                Mark best = Mark::Circle;
                int best_count = 0;
                bool tie = false;
                for (const auto& [m, c] : votes) {
                    if (c > best_count) {
                        best = m;
                        best_count = c;
                        tie = false;
                    } else if (c == best_count) {
                        tie = true;
                    }
                }
                return tie ? Mark::Circle : best;
            };
            marks[{u, v}] = {majority(at_u), majority(at_v)};
        }
    }
    return Pag(p, std::move(marks), labels);
}

}  // namespace mixdag

#endif  // MIXDAG_FCI_HPP
