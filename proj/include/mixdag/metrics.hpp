#ifndef MIXDAG_METRICS_HPP
#define MIXDAG_METRICS_HPP

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixdag/graph.hpp"
#include "mixdag/rng.hpp"

namespace mixdag {

// Normalized structural Hamming distance between PAGs: each shared
// adjacency contributes one potential error per endpoint, counted when one
// mark is an arrow and the other a tail (circles match anything); each
// adjacency present in exactly one PAG contributes one error. The
// denominator is the maximum achievable error count for this pair of
// skeletons, so the value lies in [0,1].
inline double normalized_shd(const Pag& p1, const Pag& p2) {
    if (p1.node_count() != p2.node_count())
        throw std::invalid_argument("normalized_shd: node-count mismatch");
    const int n = p1.node_count();
    long errors = 0, shared = 0, exclusive = 0;
    auto conflict = [](Mark a, Mark b) {
        return (a == Mark::Arrow && b == Mark::Tail) || (a == Mark::Tail && b == Mark::Arrow);
    };
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            const bool in1 = p1.adjacent(u, v);
            const bool in2 = p2.adjacent(u, v);
            if (in1 && in2) {
                ++shared;
                if (conflict(p1.mark_at(u, v), p2.mark_at(u, v))) ++errors;
                if (conflict(p1.mark_at(v, u), p2.mark_at(v, u))) ++errors;
            } else if (in1 != in2) {
                ++exclusive;
                ++errors;
            }
        }
    }
    const long denom = 2 * shared + exclusive;
    return denom == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(denom);
}

struct VaryingRates {
    double tpr;
    double fpr;
};

// True/false positive rates of an estimated varying-node set. An empty
// truth yields tpr = 1 (the miss rate is vacuous; spurious detections still
// show up in fpr). An empty complement yields fpr = 0.
inline VaryingRates varying_rates(const NodeSet& estimated, const NodeSet& truth, int n_all) {
    for (NodeId v : estimated) detail::check_node(n_all, v, "varying_rates");
    for (NodeId v : truth) detail::check_node(n_all, v, "varying_rates");
    VaryingRates out{1.0, 0.0};
    if (!truth.empty()) {
        out.tpr = static_cast<double>(set_intersection(estimated, truth).size()) /
                  static_cast<double>(truth.size());
    }
    const long complement = n_all - static_cast<long>(truth.size());
    if (complement > 0) {
        out.fpr = static_cast<double>(set_difference(estimated, truth).size()) /
                  static_cast<double>(complement);
    }
    return out;
}

namespace metrics_detail {

inline double sq_dist(const Eigen::MatrixXd& x, int row, const Eigen::RowVectorXd& c) {
    return (x.row(row) - c).squaredNorm();
}

inline Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& x, int k, Rng& rng) {
    const int n = static_cast<int>(x.rows());
    Eigen::MatrixXd centroids(k, x.cols());
    centroids.row(0) = x.row(static_cast<int>(rng.below(n)));
    Eigen::VectorXd d2(n);
    for (int i = 0; i < n; ++i) d2(i) = sq_dist(x, i, centroids.row(0));
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        int pick;
        if (total <= 0) {
            pick = static_cast<int>(rng.below(n));
        } else {
            double r = rng.uniform01() * total;
            pick = n - 1;
            for (int i = 0; i < n; ++i) {
                r -= d2(i);
                if (r <= 0) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.row(c) = x.row(pick);
        for (int i = 0; i < n; ++i) d2(i) = std::min(d2(i), sq_dist(x, i, centroids.row(c)));
    }
    return centroids;
}

}  // namespace metrics_detail

// Lloyd's algorithm with k-means++ seeding; the best of `restarts` runs by
// inertia wins. Deterministic for a fixed rng seed.
inline std::vector<int> kmeans(const Eigen::MatrixXd& x, int k, Rng& rng, int restarts = 10,
                               int max_iter = 300, double tol = 1e-6) {
    const int n = static_cast<int>(x.rows());
    if (k < 1) throw std::invalid_argument("kmeans: k must be positive");
    if (k > n) throw std::invalid_argument("kmeans: k exceeds the number of points");
    std::vector<int> best_labels(n, 0);
    double best_inertia = std::numeric_limits<double>::infinity();
    for (int rs = 0; rs < restarts; ++rs) {
        Rng rr = rng.derive(rs);
        Eigen::MatrixXd centroids = metrics_detail::kmeanspp_seed(x, k, rr);
        std::vector<int> labels(n, 0);
        double prev_inertia = std::numeric_limits<double>::infinity();
        for (int iter = 0; iter < max_iter; ++iter) {
            double inertia = 0;
            for (int i = 0; i < n; ++i) {
                int best = 0;
                double bd = metrics_detail::sq_dist(x, i, centroids.row(0));
                for (int c = 1; c < k; ++c) {
                    const double d = metrics_detail::sq_dist(x, i, centroids.row(c));
                    if (d < bd) {
                        bd = d;
                        best = c;
                    }
                }
                labels[i] = best;
                inertia += bd;
            }
            assert(inertia <= prev_inertia * (1 + 1e-9) + 1e-12);
            prev_inertia = inertia;
            Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, x.cols());
            std::vector<int> counts(k, 0);
            for (int i = 0; i < n; ++i) {
                next.row(labels[i]) += x.row(i);
                counts[labels[i]]++;
            }
            for (int c = 0; c < k; ++c) {
                if (counts[c] > 0) {
                    next.row(c) /= counts[c];
                } else {
                    // re-seed an empty cluster at the point farthest from its
                    // centroid (lowest index on ties)
                    int far = 0;
                    double fd = -1;
                    for (int i = 0; i < n; ++i) {
                        const double d = metrics_detail::sq_dist(x, i, centroids.row(labels[i]));
                        if (d > fd) {
                            fd = d;
                            far = i;
                        }
                    }
                    next.row(c) = x.row(far);
                }
            }
            const double shift = (next - centroids).rowwise().norm().maxCoeff();
            centroids = std::move(next);
            if (shift < tol) break;
        }
        // final assignment and inertia for the converged centroids
        double inertia = 0;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = metrics_detail::sq_dist(x, i, centroids.row(0));
            for (int c = 1; c < k; ++c) {
                const double d = metrics_detail::sq_dist(x, i, centroids.row(c));
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            labels[i] = best;
            inertia += bd;
        }
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_labels = labels;
        }
    }
    return best_labels;
}

// Rosenberg-Hirschberg V-measure: harmonic mean of homogeneity and
// completeness, computed with natural-log entropies over empirical counts.
inline double v_measure(const std::vector<int>& labels, const std::vector<int>& truth) {
    if (labels.size() != truth.size())
        throw std::invalid_argument("v_measure: length mismatch");
    const int n = static_cast<int>(labels.size());
    if (n == 0) throw std::invalid_argument("v_measure: empty input");
    std::map<std::pair<int, int>, int> joint;
    std::map<int, int> by_label, by_truth;
    for (int i = 0; i < n; ++i) {
        joint[{labels[i], truth[i]}]++;
        by_label[labels[i]]++;
        by_truth[truth[i]]++;
    }
    auto entropy = [&](const std::map<int, int>& counts) {
        double h = 0;
        for (const auto& [key, c] : counts) {
            (void)key;
            const double p = static_cast<double>(c) / n;
            if (p > 0) h -= p * std::log(p);
        }
        return h;
    };
    const double h_truth = entropy(by_truth);
    const double h_label = entropy(by_label);
    double h_truth_given_label = 0, h_label_given_truth = 0;
    for (const auto& [key, c] : joint) {
        const double p = static_cast<double>(c) / n;
        const double p_label = static_cast<double>(by_label[key.first]) / n;
        const double p_truth = static_cast<double>(by_truth[key.second]) / n;
        h_truth_given_label -= p * std::log(p / p_label);
        h_label_given_truth -= p * std::log(p / p_truth);
    }
    const double homogeneity = h_truth == 0 ? 1.0 : 1.0 - h_truth_given_label / h_truth;
    const double completeness = h_label == 0 ? 1.0 : 1.0 - h_label_given_truth / h_label;
    if (homogeneity + completeness == 0) return 0.0;
    return 2.0 * homogeneity * completeness / (homogeneity + completeness);
}

// One experiment trial's summary row.
struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    double alpha = 0;
    double normalized_shd = 0;
    double tpr = 0;
    double fpr = 0;
    double v_measure_all = 0;
    double v_measure_varying = 0;
    double runtime_ms = 0;
};

}  // namespace mixdag

#endif  // MIXDAG_METRICS_HPP
