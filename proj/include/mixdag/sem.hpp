#ifndef MIXDAG_SEM_HPP
#define MIXDAG_SEM_HPP

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mixdag/graph.hpp"
#include "mixdag/mixture.hpp"
#include "mixdag/rng.hpp"

namespace mixdag {

// ---------------------------------------------------------------------------
// Linear-Gaussian mixture SEM
// ---------------------------------------------------------------------------

// K linear structural equation models sharing edge weights on shared edges
// and per-node Gaussian noise. weights[j](u,v) is the coefficient of X_u in
// the equation of X_v and is nonzero exactly on the edges of component j.
struct GaussianMixtureSem {
    MixtureSpec spec;
    std::vector<Eigen::MatrixXd> weights;
    Eigen::VectorXd noise_means;
    Eigen::VectorXd noise_sds;
    // Weight drawn for each ordered pair that appears as an edge anywhere;
    // shared across components by construction.
    std::map<Edge, double> pair_weights;

    void validate() const {
        spec.validate();
        const int k = spec.component_count();
        const int n = spec.base_node_count();
        if (static_cast<int>(weights.size()) != k)
            throw std::invalid_argument("GaussianMixtureSem: one weight matrix per component");
        if (noise_means.size() != n || noise_sds.size() != n)
            throw std::invalid_argument("GaussianMixtureSem: noise vectors must have |V| entries");
        for (int j = 0; j < k; ++j) {
            if (weights[j].rows() != n || weights[j].cols() != n)
                throw std::invalid_argument("GaussianMixtureSem: weight matrix shape mismatch");
            for (NodeId u = 0; u < n; ++u)
                for (NodeId v = 0; v < n; ++v) {
                    const bool has = spec.components[j].has_edge(u, v);
                    const bool nz = weights[j](u, v) != 0.0;
                    if (has != nz)
                        throw std::invalid_argument(
                            "GaussianMixtureSem: weight support must equal the edge set");
                }
        }
    }
};

struct RandomSemOptions {
    // Reject draws whose component MAGs are not poset-compatible.
    bool require_poset_compatible = true;
    // Reject draws where any varying node has children in some component.
    bool varying_nodes_are_sinks = false;
    int max_attempts = 1000;
    double expected_union_degree = 1.5;  // per-component degree is this / K
};

namespace detail {

inline double sample_edge_weight(Rng& rng) {
    const double mag = rng.uniform(0.25, 2.0);
    return rng.coin() ? mag : -mag;
}

// K random DAGs over a shared random topological ordering, each edge present
// independently with probability d/(|V|-1); v_inv is the set of nodes whose
// parent sets agree across all components.
inline MixtureSpec random_mixture_structure_once(int k, int n_nodes, double degree, Rng& rng) {
    const auto order = rng.permutation(n_nodes);
    const double p = n_nodes > 1 ? degree / (n_nodes - 1) : 0.0;
    std::vector<Dag> comps;
    comps.reserve(k);
    for (int j = 0; j < k; ++j) {
        std::vector<Edge> edges;
        for (int i1 = 0; i1 < n_nodes; ++i1)
            for (int i2 = i1 + 1; i2 < n_nodes; ++i2)
                if (rng.uniform01() < p) edges.emplace_back(order[i1], order[i2]);
        comps.emplace_back(n_nodes, std::move(edges));
    }
    NodeSet v_inv;
    for (NodeId v = 0; v < n_nodes; ++v) {
        bool same = true;
        for (int j = 1; j < k && same; ++j)
            same = comps[j].parents(v) == comps[0].parents(v);
        if (same) v_inv.push_back(v);
    }
    return make_mixture_spec(std::move(comps), std::move(v_inv));
}

}  // namespace detail

inline MixtureSpec random_mixture_structure(int k, int n_nodes, Rng& rng,
                                            RandomSemOptions opt = {}) {
    if (k < 1 || n_nodes < 1)
        throw std::invalid_argument("random_mixture_structure: k and n_nodes must be positive");
    const double degree = opt.expected_union_degree / k;
    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        MixtureSpec spec = detail::random_mixture_structure_once(k, n_nodes, degree, rng);
        if (opt.varying_nodes_are_sinks) {
            bool ok = true;
            for (NodeId v = 0; v < n_nodes && ok; ++v) {
                if (set_contains(spec.v_inv, v)) continue;
                for (const auto& c : spec.components)
                    if (!c.children(v).empty()) {
                        ok = false;
                        break;
                    }
            }
            if (!ok) continue;
        }
        if (opt.require_poset_compatible && !poset_compatible(component_mags(spec)).compatible)
            continue;
        return spec;
    }
    throw std::runtime_error("random_mixture_structure: no admissible draw within attempt budget");
}

inline GaussianMixtureSem random_mixture_sem(int k, int n_nodes, Rng& rng,
                                             RandomSemOptions opt = {}) {
    GaussianMixtureSem sem;
    sem.spec = random_mixture_structure(k, n_nodes, rng, opt);
    sem.weights.assign(k, Eigen::MatrixXd::Zero(n_nodes, n_nodes));
    for (int j = 0; j < k; ++j) {
        for (const auto& e : sem.spec.components[j].edges()) {
            auto it = sem.pair_weights.find(e);
            if (it == sem.pair_weights.end())
                it = sem.pair_weights.emplace(e, detail::sample_edge_weight(rng)).first;
            sem.weights[j](e.first, e.second) = it->second;
        }
    }
    sem.noise_means = Eigen::VectorXd::Zero(n_nodes);
    for (NodeId v = 0; v < n_nodes; ++v) sem.noise_means(v) = rng.uniform(-2.0, 2.0);
    sem.noise_sds = Eigen::VectorXd::Ones(n_nodes);
    return sem;
}

// Closed-form moments of component j: with M = (I - W^T)^-1, the mean is
// M * noise_means and the covariance M * diag(sds^2) * M^T.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> component_moments(const GaussianMixtureSem& sem,
                                                                     int j) {
    if (j < 0 || j >= sem.spec.component_count())
        throw std::invalid_argument("component_moments: component index out of range");
    const int n = sem.spec.base_node_count();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - sem.weights[j].transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    // (I - W^T) is unitriangular under a topological order, so always invertible.
    if (!lu.isInvertible())
        throw std::logic_error("component_moments: singular I - W^T on an acyclic model");
    Eigen::MatrixXd m = lu.inverse();
    Eigen::VectorXd mean = m * sem.noise_means;
    Eigen::MatrixXd cov = m * sem.noise_sds.array().square().matrix().asDiagonal() * m.transpose();
    return {std::move(mean), std::move(cov)};
}

// Largest-remainder apportionment of n into counts proportional to p.
inline std::vector<int> apportion_counts(int n, const std::vector<double>& p) {
    double sum = 0;
    for (double x : p) {
        if (x < 0) throw std::invalid_argument("apportion_counts: negative proportion");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("apportion_counts: proportions must sum to 1");
    const int k = static_cast<int>(p.size());
    std::vector<int> counts(k);
    std::vector<std::pair<double, int>> rema(k);
    int assigned = 0;
    for (int j = 0; j < k; ++j) {
        const double exact = n * p[j];
        counts[j] = static_cast<int>(std::floor(exact));
        assigned += counts[j];
        rema[j] = {exact - counts[j], j};
    }
    std::stable_sort(rema.begin(), rema.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int i = 0; i < n - assigned; ++i) counts[rema[i % k].second]++;
    return counts;
}

struct SampleResult {
    Eigen::MatrixXd data;     // n x |V|
    std::vector<int> labels;  // generating component per row
};

// Draw round(n*p_j) rows from each component (largest-remainder rounding to
// a total of exactly n) and shuffle the rows.
inline SampleResult sample(const GaussianMixtureSem& sem, int n, const std::vector<double>& p,
                           Rng& rng) {
    if (static_cast<int>(p.size()) != sem.spec.component_count())
        throw std::invalid_argument("sample: one proportion per component");
    const auto counts = apportion_counts(n, p);
    const int nv = sem.spec.base_node_count();
    Eigen::MatrixXd x(n, nv);
    std::vector<int> labels(n);
    int row = 0;
    for (int j = 0; j < sem.spec.component_count(); ++j) {
        const auto order = topological_order(sem.spec.components[j]);
        for (int i = 0; i < counts[j]; ++i, ++row) {
            for (NodeId v : order) {
                double val = sem.noise_means(v) + sem.noise_sds(v) * rng.normal();
                for (NodeId u : sem.spec.components[j].parents(v))
                    val += sem.weights[j](u, v) * x(row, u);
                x(row, v) = val;
            }
            labels[row] = j;
        }
    }
    // shuffle rows together with their labels
    std::vector<int> perm = rng.permutation(n);
    Eigen::MatrixXd xs(n, nv);
    std::vector<int> ls(n);
    for (int i = 0; i < n; ++i) {
        xs.row(i) = x.row(perm[i]);
        ls[i] = labels[perm[i]];
    }
    return {std::move(xs), std::move(ls)};
}

inline std::vector<double> dirichlet_proportions(int k, double alpha, Rng& rng) {
    if (alpha <= 0) throw std::invalid_argument("dirichlet_proportions: alpha must be positive");
    std::vector<double> g(k);
    double sum = 0;
    for (int j = 0; j < k; ++j) {
        g[j] = rng.gamma(alpha);
        sum += g[j];
    }
    for (double& x : g) x /= sum;
    return g;
}

// Linear SEM whose graph is a MAG: directed edges keep the mixture weights
// (pairs never seen in a component get a fresh draw); every bidirected edge
// is realized through its own latent standard-normal parent entering both
// endpoints with weight 1. Latent columns are dropped from samples.
struct MagSem {
    MixedGraph mag;
    std::map<Edge, double> edge_weights;
    Eigen::VectorXd noise_means, noise_sds;
};

inline MagSem make_mag_sem(const MixedGraph& mag, const GaussianMixtureSem& sem, Rng& rng) {
    if (mag.node_count() != sem.spec.base_node_count())
        throw std::invalid_argument("make_mag_sem: node-count mismatch");
    MagSem out{mag, sem.pair_weights, sem.noise_means, sem.noise_sds};
    for (const auto& e : mag.directed_edges())
        if (!out.edge_weights.count(e)) out.edge_weights.emplace(e, detail::sample_edge_weight(rng));
    return out;
}

// Closed-form moments over the observed nodes of the latent-augmented SEM.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> mag_sem_moments(const MagSem& ms) {
    const int nv = ms.mag.node_count();
    const int nl = static_cast<int>(ms.mag.bidirected_edges().size());
    const int m = nv + nl;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
    for (const auto& [u, v] : ms.mag.directed_edges()) w(u, v) = ms.edge_weights.at({u, v});
    for (int l = 0; l < nl; ++l) {
        const auto& [u, v] = ms.mag.bidirected_edges()[l];
        w(nv + l, u) = 1.0;
        w(nv + l, v) = 1.0;
    }
    Eigen::VectorXd means = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sds = Eigen::VectorXd::Ones(m);
    means.head(nv) = ms.noise_means;
    sds.head(nv) = ms.noise_sds;
    Eigen::MatrixXd inv =
        (Eigen::MatrixXd::Identity(m, m) - w.transpose()).fullPivLu().inverse();
    Eigen::VectorXd mean = inv * means;
    Eigen::MatrixXd cov = inv * sds.array().square().matrix().asDiagonal() * inv.transpose();
    return {mean.head(nv), cov.topLeftCorner(nv, nv)};
}

inline Eigen::MatrixXd sample_mag_sem(const MagSem& ms, int n, Rng& rng) {
    const int nv = ms.mag.node_count();
    const Dag directed_part(nv, ms.mag.directed_edges());
    const auto order = topological_order(directed_part);
    const auto& bidir = ms.mag.bidirected_edges();
    Eigen::MatrixXd x(n, nv);
    std::vector<double> latents(bidir.size());
    for (int i = 0; i < n; ++i) {
        for (std::size_t l = 0; l < bidir.size(); ++l) latents[l] = rng.normal();
        for (NodeId v : order) {
            double val = ms.noise_means(v) + ms.noise_sds(v) * rng.normal();
            for (NodeId u : ms.mag.parents(v)) val += ms.edge_weights.at({u, v}) * x(i, u);
            for (std::size_t l = 0; l < bidir.size(); ++l)
                if (bidir[l].first == v || bidir[l].second == v) val += latents[l];
            x(i, v) = val;
        }
    }
    return x;
}

// ---------------------------------------------------------------------------
// Exactly enumerable discrete mixtures
// ---------------------------------------------------------------------------

// Conditional probability table of one node in one component: rows indexed
// by the mixed-radix parent configuration (parents ascending, first parent
// slowest), entries by node value.
using Cpt = std::vector<double>;

struct DiscreteMixture {
    MixtureSpec spec;
    std::vector<int> cardinalities;
    std::vector<std::vector<Cpt>> cpts;  // cpts[j][v]

    void validate() const {
        spec.validate();
        const int k = spec.component_count();
        const int n = spec.base_node_count();
        if (static_cast<int>(cardinalities.size()) != n)
            throw std::invalid_argument("DiscreteMixture: one cardinality per node");
        for (int c : cardinalities)
            if (c < 2) throw std::invalid_argument("DiscreteMixture: cardinalities must be >= 2");
        if (static_cast<int>(cpts.size()) != k)
            throw std::invalid_argument("DiscreteMixture: one CPT set per component");
        for (int j = 0; j < k; ++j) {
            if (static_cast<int>(cpts[j].size()) != n)
                throw std::invalid_argument("DiscreteMixture: one CPT per node");
            for (NodeId v = 0; v < n; ++v) {
                long rows = 1;
                for (NodeId u : spec.components[j].parents(v)) rows *= cardinalities[u];
                if (static_cast<long>(cpts[j][v].size()) != rows * cardinalities[v])
                    throw std::invalid_argument("DiscreteMixture: CPT size mismatch at node " +
                                                std::to_string(v));
                for (long r = 0; r < rows; ++r) {
                    double s = 0;
                    for (int val = 0; val < cardinalities[v]; ++val)
                        s += cpts[j][v][r * cardinalities[v] + val];
                    if (std::abs(s - 1.0) > 1e-12)
                        throw std::invalid_argument("DiscreteMixture: CPT row does not sum to 1");
                }
            }
        }
        for (NodeId v : spec.v_inv) {
            for (int j = 1; j < k; ++j) {
                if (spec.components[j].parents(v) != spec.components[0].parents(v) ||
                    cpts[j][v] != cpts[0][v])
                    throw std::invalid_argument(
                        "DiscreteMixture: invariant node must keep parents and CPT across "
                        "components");
            }
        }
    }
};

// Joint probability table over all nodes; node 0 is the slowest index.
struct JointTable {
    std::vector<int> cards;
    std::vector<double> p;

    long state_count() const { return static_cast<long>(p.size()); }
    long index_of(const std::vector<int>& state) const {
        long idx = 0;
        for (std::size_t v = 0; v < cards.size(); ++v) idx = idx * cards[v] + state[v];
        return idx;
    }
    void state_at(long idx, std::vector<int>& state) const {
        state.resize(cards.size());
        for (int v = static_cast<int>(cards.size()) - 1; v >= 0; --v) {
            state[v] = static_cast<int>(idx % cards[v]);
            idx /= cards[v];
        }
    }
};

inline JointTable exact_joint(const DiscreteMixture& dm) {
    dm.validate();
    const int n = dm.spec.base_node_count();
    long states = 1;
    for (int c : dm.cardinalities) {
        states *= c;
        if (states > 1000000)
            throw std::invalid_argument("exact_joint: state space exceeds 10^6");
    }
    JointTable out;
    out.cards = dm.cardinalities;
    out.p.assign(states, 0.0);
    std::vector<int> state(n);
    for (long idx = 0; idx < states; ++idx) {
        out.state_at(idx, state);
        double total = 0;
        for (int j = 0; j < dm.spec.component_count(); ++j) {
            double prod = dm.spec.mixing_weights[j];
            for (NodeId v = 0; v < n && prod > 0; ++v) {
                long row = 0;
                for (NodeId u : dm.spec.components[j].parents(v))
                    row = row * dm.cardinalities[u] + state[u];
                prod *= dm.cpts[j][v][row * dm.cardinalities[v] + state[v]];
            }
            total += prod;
        }
        out.p[idx] = total;
    }
    return out;
}

// Random mixture of discrete Bayesian networks with CPT rows drawn from the
// uniform simplex; invariant nodes share one draw across components.
inline DiscreteMixture random_discrete_mixture(int k, int n_nodes, int cardinality, Rng& rng,
                                               RandomSemOptions opt = {}) {
    DiscreteMixture dm;
    dm.spec = random_mixture_structure(k, n_nodes, rng, opt);
    dm.cardinalities.assign(n_nodes, cardinality);
    dm.cpts.assign(k, std::vector<Cpt>(n_nodes));
    auto random_cpt = [&](long rows, int card) {
        Cpt t(rows * card);
        for (long r = 0; r < rows; ++r) {
            double s = 0;
            for (int val = 0; val < card; ++val) {
                t[r * card + val] = rng.gamma(1.0);
                s += t[r * card + val];
            }
            for (int val = 0; val < card; ++val) t[r * card + val] /= s;
        }
        return t;
    };
    for (NodeId v = 0; v < n_nodes; ++v) {
        long rows0 = 1;
        for (NodeId u : dm.spec.components[0].parents(v)) rows0 *= cardinality;
        if (set_contains(dm.spec.v_inv, v)) {
            Cpt shared = random_cpt(rows0, cardinality);
            for (int j = 0; j < k; ++j) dm.cpts[j][v] = shared;
        } else {
            for (int j = 0; j < k; ++j) {
                long rows = 1;
                for (NodeId u : dm.spec.components[j].parents(v)) rows *= cardinality;
                dm.cpts[j][v] = random_cpt(rows, cardinality);
            }
        }
    }
    return dm;
}

// ---------------------------------------------------------------------------
// Closed-form bivariate check for the crafted faithfulness violation
// ---------------------------------------------------------------------------

inline double gaussian_pdf(double x, double mean, double var) {
    return std::exp(-(x - mean) * (x - mean) / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
}

// Sup-norm gap between the mixture density of (X2, X3) and the product of
// its marginals on the grid [-6,6]^2 with step 0.1. Component 1 has
// X2 ~ N(0,2), X3 ~ N(0,1); component 2 has X2 ~ N(0, var2_second),
// X3 ~ N(0,2).
inline double example31_gap(double pj1, double var2_second) {
    const double pj2 = 1.0 - pj1;
    double gap = 0.0;
    for (int i = 0; i <= 120; ++i) {
        const double x2 = -6.0 + 0.1 * i;
        const double a = gaussian_pdf(x2, 0, 2.0);
        const double b = gaussian_pdf(x2, 0, var2_second);
        const double m2 = pj1 * a + pj2 * b;
        for (int j = 0; j <= 120; ++j) {
            const double x3 = -6.0 + 0.1 * j;
            const double c = gaussian_pdf(x3, 0, 1.0);
            const double d = gaussian_pdf(x3, 0, 2.0);
            const double joint = pj1 * a * c + pj2 * b * d;
            const double m3 = pj1 * c + pj2 * d;
            gap = std::max(gap, std::abs(joint - m2 * m3));
        }
    }
    return gap;
}

struct Example31Gaps {
    double crafted_gap;
    double perturbed_gap;
};

inline Example31Gaps example31_density_gap() {
    return {example31_gap(0.5, 2.0), example31_gap(0.5, 2.001)};
}

}  // namespace mixdag

#endif  // MIXDAG_SEM_HPP
