#ifndef MIXDAG_CI_HPP
#define MIXDAG_CI_HPP

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mixdag/graph.hpp"
#include "mixdag/mixture.hpp"
#include "mixdag/sem.hpp"
#include "mixdag/separation.hpp"

namespace mixdag {

// Inverse standard-normal CDF (Wichura's PPND16). Accurate to ~1e-15.
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("inverse_normal_cdf: p must be in (0,1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) *
                        r +
                    4.5921953931549871457e4) *
                       r +
                   1.3731693765509461125e4) *
                      r +
                  1.9715909503065514427e3) *
                     r +
                 1.3314166789178437745e2) *
                    r +
                3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) *
                        r +
                    2.1213794301586595867e4) *
                       r +
                   5.3941960214247511077e3) *
                      r +
                  6.8718700749205790830e2) *
                     r +
                 4.2313330701600911252e1) *
                    r +
                1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) *
                       r +
                   1.27045825245236838258e0) *
                      r +
                  3.64784832476320460504e0) *
                     r +
                 5.76949722146069140550e0) *
                    r +
                4.63033784615654529590e0) *
                   r +
               1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) *
                       r +
                   1.48103976427480074590e-1) *
                      r +
                  6.89767334985100004550e-1) *
                     r +
                 1.67638483018380384940e0) *
                    r +
                2.05319162663775882187e0) *
                   r +
               1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) *
                       r +
                   2.65321895265761230930e-2) *
                      r +
                  2.96560571828504891230e-1) *
                     r +
                 1.78482653991729133580e0) *
                    r +
                5.46378491116411436990e0) *
                   r +
               6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) *
                       r +
                   7.86869131145613259100e-4) *
                      r +
                  1.48753612908506148525e-2) *
                     r +
                 1.36929880922735805310e-1) *
                    r +
                5.99832206555887937690e-1) *
                   r +
               1.0);
    }
    return q < 0.0 ? -val : val;
}

// Abstract conditional-independence oracle; symmetric in (a, b) and
// deterministic for fixed inputs. Implementations are immutable after
// construction and may be queried concurrently.
class CiOracle {
public:
    virtual ~CiOracle() = default;
    virtual bool independent(NodeId a, NodeId b, const NodeSet& cond) const = 0;
    virtual int variable_count() const = 0;
    virtual std::string kind() const = 0;
};

// ---------------------------------------------------------------------------
// Empirical Fisher-Z
// ---------------------------------------------------------------------------

// Sample correlations plus a cache of test statistics; shared by the
// per-alpha oracles so an alpha sweep reuses every partial correlation.
class FisherZStats {
public:
    explicit FisherZStats(const Eigen::MatrixXd& data) : n_(static_cast<int>(data.rows())) {
        const int p = static_cast<int>(data.cols());
        if (n_ < 2) throw std::invalid_argument("FisherZStats: need at least two rows");
        Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
        Eigen::VectorXd sd = (centered.array().square().colwise().sum() / (n_ - 1)).sqrt();
        for (int i = 0; i < p; ++i)
            if (!(sd(i) > 0))
                throw std::invalid_argument("FisherZStats: column " + std::to_string(i) +
                                            " is constant");
        corr_ = (centered.transpose() * centered) / (n_ - 1);
        corr_ = sd.cwiseInverse().asDiagonal() * corr_ * sd.cwiseInverse().asDiagonal();
    }

    int sample_count() const { return n_; }
    int variable_count() const { return static_cast<int>(corr_.cols()); }
    long warning_count() const { return warnings_.load(); }

    // sqrt(n - |cond| - 3) * |atanh(r)|; +inf when |r| hits 1 or the
    // correlation submatrix is numerically singular (flagged as a warning).
    double statistic(NodeId a, NodeId b, const NodeSet& cond) const {
        if (a == b) throw std::invalid_argument("FisherZStats: a and b must differ");
        for (NodeId c : cond)
            if (c == a || c == b)
                throw std::invalid_argument("FisherZStats: conditioning set overlaps {a,b}");
        if (n_ <= static_cast<int>(cond.size()) + 3)
            throw std::invalid_argument("FisherZStats: insufficient samples for |cond|=" +
                                        std::to_string(cond.size()));
        const auto key = cache_key(a, b, cond);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        const double r = partial_correlation(a, b, cond);
        double stat;
        if (std::abs(r) >= 1.0 - 1e-15) {
            stat = std::numeric_limits<double>::infinity();
        } else {
            stat = std::sqrt(static_cast<double>(n_ - cond.size() - 3)) * std::abs(std::atanh(r));
        }
        std::lock_guard<std::mutex> lock(mutex_);
        cache_.emplace(key, stat);
        return stat;
    }

    double partial_correlation(NodeId a, NodeId b, const NodeSet& cond) const {
        std::vector<int> idx{a, b};
        idx.insert(idx.end(), cond.begin(), cond.end());
        const int m = static_cast<int>(idx.size());
        Eigen::MatrixXd sub(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) sub(i, j) = corr_(idx[i], idx[j]);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
        if (!lu.isInvertible() || lu.rcond() < 1e-12) {
            warnings_.fetch_add(1);
            return 1.0;  // reported as dependent
        }
        Eigen::MatrixXd omega = lu.inverse();
        return -omega(0, 1) / std::sqrt(omega(0, 0) * omega(1, 1));
    }

private:
    static std::vector<int> cache_key(NodeId a, NodeId b, const NodeSet& cond) {
        std::vector<int> key{std::min(a, b), std::max(a, b)};
        key.insert(key.end(), cond.begin(), cond.end());
        return key;
    }

    int n_;
    Eigen::MatrixXd corr_;
    mutable std::mutex mutex_;
    mutable std::map<std::vector<int>, double> cache_;
    mutable std::atomic<long> warnings_{0};
};

class FisherZOracle : public CiOracle {
public:
    FisherZOracle(std::shared_ptr<const FisherZStats> stats, double alpha)
        : stats_(std::move(stats)), alpha_(alpha) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("FisherZOracle: alpha must be in (0,1)");
        threshold_ = inverse_normal_cdf(1.0 - alpha / 2.0);
    }
    FisherZOracle(const Eigen::MatrixXd& data, double alpha)
        : FisherZOracle(std::make_shared<FisherZStats>(data), alpha) {}

    bool independent(NodeId a, NodeId b, const NodeSet& cond) const override {
        return stats_->statistic(a, b, cond) <= threshold_;
    }
    int variable_count() const override { return stats_->variable_count(); }
    std::string kind() const override { return "fisher-z(alpha=" + std::to_string(alpha_) + ")"; }
    double alpha() const { return alpha_; }
    const FisherZStats& stats() const { return *stats_; }

private:
    std::shared_ptr<const FisherZStats> stats_;
    double alpha_;
    double threshold_;
};

// true = declared independent at level alpha.
inline bool fisher_z(const Eigen::MatrixXd& data, NodeId a, NodeId b, const NodeSet& cond,
                     double alpha) {
    return FisherZOracle(data, alpha).independent(a, b, cond);
}

// ---------------------------------------------------------------------------
// Exact discrete CI over an enumerated joint
// ---------------------------------------------------------------------------

// Exact check on a joint table: for every conditioning configuration with
// positive mass, the conditional joint of (A, B) must factor within tol.
inline bool exact_discrete_ci(const JointTable& joint, const NodeSet& a_set, const NodeSet& b_set,
                              const NodeSet& c_set, double tol = 1e-9) {
    if (tol <= 0) throw std::invalid_argument("exact_discrete_ci: tol must be positive");
    if (a_set.empty() || b_set.empty())
        throw std::invalid_argument("exact_discrete_ci: A and B must be nonempty");
    if (!set_intersection(a_set, b_set).empty() || !set_intersection(a_set, c_set).empty() ||
        !set_intersection(b_set, c_set).empty())
        throw std::invalid_argument("exact_discrete_ci: sets must be pairwise disjoint");
    const int n = static_cast<int>(joint.cards.size());
    for (const NodeSet* s : {&a_set, &b_set, &c_set})
        for (NodeId v : *s) detail::check_node(n, v, "exact_discrete_ci");

    long ca = 1, cb = 1, cc = 1;
    for (NodeId v : a_set) ca *= joint.cards[v];
    for (NodeId v : b_set) cb *= joint.cards[v];
    for (NodeId v : c_set) cc *= joint.cards[v];

    std::vector<double> p_abc(ca * cb * cc, 0.0), p_ac(ca * cc, 0.0), p_bc(cb * cc, 0.0),
        p_c(cc, 0.0);
    std::vector<int> state(n);
    for (long idx = 0; idx < joint.state_count(); ++idx) {
        const double mass = joint.p[idx];
        if (mass == 0.0) continue;
        joint.state_at(idx, state);
        long ia = 0, ib = 0, ic = 0;
        for (NodeId v : a_set) ia = ia * joint.cards[v] + state[v];
        for (NodeId v : b_set) ib = ib * joint.cards[v] + state[v];
        for (NodeId v : c_set) ic = ic * joint.cards[v] + state[v];
        p_abc[(ia * cb + ib) * cc + ic] += mass;
        p_ac[ia * cc + ic] += mass;
        p_bc[ib * cc + ic] += mass;
        p_c[ic] += mass;
    }
    for (long ic = 0; ic < cc; ++ic) {
        if (p_c[ic] <= 0.0) continue;
        for (long ia = 0; ia < ca; ++ia)
            for (long ib = 0; ib < cb; ++ib) {
                const double joint_cond = p_abc[(ia * cb + ib) * cc + ic] / p_c[ic];
                const double prod =
                    (p_ac[ia * cc + ic] / p_c[ic]) * (p_bc[ib * cc + ic] / p_c[ic]);
                if (std::abs(joint_cond - prod) > tol) return false;
            }
    }
    return true;
}

class DiscreteJointOracle : public CiOracle {
public:
    explicit DiscreteJointOracle(JointTable joint, double tol = 1e-9)
        : joint_(std::move(joint)), tol_(tol) {}

    bool independent(NodeId a, NodeId b, const NodeSet& cond) const override {
        return exact_discrete_ci(joint_, {a}, {b}, cond, tol_);
    }
    int variable_count() const override { return static_cast<int>(joint_.cards.size()); }
    std::string kind() const override { return "exact-discrete"; }
    const JointTable& joint() const { return joint_; }

private:
    JointTable joint_;
    double tol_;
};

// ---------------------------------------------------------------------------
// Population Gaussian CI
// ---------------------------------------------------------------------------

inline bool population_gaussian_ci(const Eigen::MatrixXd& cov, NodeId a, NodeId b,
                                   const NodeSet& cond, double tol = 1e-9) {
    if (cov.rows() != cov.cols()) throw std::invalid_argument("population_gaussian_ci: square");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("population_gaussian_ci: covariance not positive definite");
    std::vector<int> idx{a, b};
    idx.insert(idx.end(), cond.begin(), cond.end());
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd sub(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) sub(i, j) = cov(idx[i], idx[j]);
    Eigen::MatrixXd omega = sub.inverse();
    const double r = -omega(0, 1) / std::sqrt(omega(0, 0) * omega(1, 1));
    return std::abs(r) <= tol;
}

class PopulationGaussianOracle : public CiOracle {
public:
    explicit PopulationGaussianOracle(Eigen::MatrixXd cov, double tol = 1e-9)
        : cov_(std::move(cov)), tol_(tol) {
        Eigen::LLT<Eigen::MatrixXd> llt(cov_);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("PopulationGaussianOracle: covariance not PD");
    }
    bool independent(NodeId a, NodeId b, const NodeSet& cond) const override {
        return population_gaussian_ci(cov_, a, b, cond, tol_);
    }
    int variable_count() const override { return static_cast<int>(cov_.cols()); }
    std::string kind() const override { return "population-gaussian"; }

private:
    Eigen::MatrixXd cov_;
    double tol_;
};

// ---------------------------------------------------------------------------
// Graphical oracles
// ---------------------------------------------------------------------------

// Answers queries by d-/m-separation in a fixed graph. With a lift, queries
// on base nodes are translated to all component copies on a mixture DAG.
class GraphicalOracle : public CiOracle {
public:
    struct Lift {
        int k;
        int base_nodes;
    };

    explicit GraphicalOracle(Dag g) : graph_(std::move(g)) {}
    explicit GraphicalOracle(MixedGraph g) : graph_(std::move(g)) {}
    GraphicalOracle(Dag mixture_dag, Lift lift) : graph_(std::move(mixture_dag)), lift_(lift) {
        if (lift.k < 1 || lift.base_nodes < 1)
            throw std::invalid_argument("GraphicalOracle: bad lift");
        if (std::get<Dag>(graph_).node_count() != lift.k * lift.base_nodes + 1)
            throw std::invalid_argument("GraphicalOracle: lift shape mismatch");
    }

    bool independent(NodeId a, NodeId b, const NodeSet& cond) const override {
        SeparationQuery q;
        if (lift_) {
            for (int j = 0; j < lift_->k; ++j) {
                q.set_a.push_back(j * lift_->base_nodes + a);
                q.set_b.push_back(j * lift_->base_nodes + b);
                for (NodeId c : cond) q.set_c.push_back(j * lift_->base_nodes + c);
            }
            q.set_a = make_node_set(std::move(q.set_a));
            q.set_b = make_node_set(std::move(q.set_b));
            q.set_c = make_node_set(std::move(q.set_c));
        } else {
            q = SeparationQuery{{a}, {b}, cond};
        }
        if (std::holds_alternative<Dag>(graph_)) return d_separated(std::get<Dag>(graph_), q);
        return m_separated(std::get<MixedGraph>(graph_), q);
    }
    int variable_count() const override {
        if (lift_) return lift_->base_nodes;
        return std::holds_alternative<Dag>(graph_) ? std::get<Dag>(graph_).node_count()
                                                   : std::get<MixedGraph>(graph_).node_count();
    }
    std::string kind() const override { return lift_ ? "graphical(lifted)" : "graphical"; }

private:
    std::variant<Dag, MixedGraph> graph_;
    std::optional<Lift> lift_;
};

inline GraphicalOracle graphical_oracle(const Dag& g) { return GraphicalOracle(g); }
inline GraphicalOracle graphical_oracle(const MixedGraph& g) { return GraphicalOracle(g); }
inline GraphicalOracle graphical_oracle_lifted(const Dag& mixture_dag, int k, int base_nodes) {
    return GraphicalOracle(mixture_dag, GraphicalOracle::Lift{k, base_nodes});
}

}  // namespace mixdag

#endif  // MIXDAG_CI_HPP
