#ifndef MIXDAG_EXPERIMENTS_HPP
#define MIXDAG_EXPERIMENTS_HPP

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mixdag/ci.hpp"
#include "mixdag/fci.hpp"
#include "mixdag/io.hpp"
#include "mixdag/metrics.hpp"
#include "mixdag/mixture.hpp"
#include "mixdag/sem.hpp"
#include "mixdag/verify.hpp"

namespace mixdag {

enum class ExperimentKind { Shd, Varying, Cluster, Verify, RealData };
enum class ProportionsKind { Uniform, Dirichlet };
enum class OracleMode { Fisher, Exact };
enum class ClusterSetting { NoDescendants, Descendants };

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Shd;
    int k = 4;
    int n_nodes = 10;
    int n_samples = 5000;
    ProportionsKind proportions = ProportionsKind::Uniform;
    double dirichlet_alpha = 2.0;
    std::vector<double> alphas = {0.001, 0.01, 0.05, 0.1};
    int n_trials = 30;
    std::uint64_t master_seed = 1;
    ClusterSetting cluster_setting = ClusterSetting::NoDescendants;
    std::vector<int> ktilde;  // cluster sweep; defaults to 1..2k
    std::string out_dir;
    OracleMode oracle = OracleMode::Fisher;
    int jobs = 1;
    bool write_svg = false;
    bool inject_skip_step3 = false;  // verify-only fault injection
    // stability-selection settings (defaults are not from the source data
    // protocols; they are recorded in the output metadata)
    int stability_subsamples = 50;
    double stability_keep_fraction = 0.5;
    double stability_threshold = 0.6;

    void validate() const {
        if (k < 1) throw std::invalid_argument("config: k must be positive");
        if (n_nodes < 2) throw std::invalid_argument("config: need at least two nodes");
        if (n_samples < 10) throw std::invalid_argument("config: need at least ten samples");
        if (n_trials < 1) throw std::invalid_argument("config: need at least one trial");
        if (jobs < 1) throw std::invalid_argument("config: jobs must be positive");
        if (alphas.empty()) throw std::invalid_argument("config: need at least one alpha");
        for (double a : alphas)
            if (!(a > 0.0 && a < 1.0))
                throw std::invalid_argument("config: alphas must lie in (0,1)");
        if (dirichlet_alpha <= 0)
            throw std::invalid_argument("config: dirichlet parameter must be positive");
        if (oracle == OracleMode::Exact && n_nodes > 12)
            throw std::invalid_argument("config: exact-oracle mode supports at most 12 nodes");
        for (int kt : ktilde)
            if (kt < 1) throw std::invalid_argument("config: ktilde values must be positive");
    }

    std::vector<int> ktilde_or_default() const {
        if (!ktilde.empty()) return ktilde;
        std::vector<int> out;
        for (int i = 1; i <= 2 * k; ++i) out.push_back(i);
        return out;
    }

    std::string fingerprint() const {
        std::ostringstream s;
        s << "kind=" << static_cast<int>(kind) << " k=" << k << " nodes=" << n_nodes
          << " samples=" << n_samples << " proportions=" << static_cast<int>(proportions)
          << " dirichlet=" << dirichlet_alpha << " alphas=";
        for (double a : alphas) s << a << ",";
        s << " trials=" << n_trials << " seed=" << master_seed
          << " cluster=" << static_cast<int>(cluster_setting) << " oracle="
          << static_cast<int>(oracle) << " stability=" << stability_subsamples << "/"
          << stability_keep_fraction << "/" << stability_threshold;
        return s.str();
    }

    std::vector<std::string> metadata_lines(const char* extra = nullptr) const {
        char hash[32];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(fnv1a(fingerprint())));
        std::vector<std::string> out{
            std::string("config_hash=") + hash + " seed=" + std::to_string(master_seed),
            fingerprint()};
        if (extra) out.emplace_back(extra);
        return out;
    }
};

namespace exp_detail {

inline double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// Static work pool over trial indices; results land in caller-owned slots,
// so the aggregate is independent of the job count.
template <class Fn>
void parallel_trials(int n_trials, int jobs, Fn&& fn) {
    if (jobs <= 1 || n_trials <= 1) {
        for (int t = 0; t < n_trials; ++t) fn(t);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(jobs, n_trials);
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    const int t = next.fetch_add(1);
                    if (t >= n_trials) break;
                    fn(t);
                }
            } catch (...) {
                errors[w] = std::current_exception();
                next.store(n_trials);
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::vector<double> trial_proportions(const ExperimentConfig& cfg, Rng& rng) {
    if (cfg.proportions == ProportionsKind::Dirichlet)
        return dirichlet_proportions(cfg.k, cfg.dirichlet_alpha, rng);
    return std::vector<double>(cfg.k, 1.0 / cfg.k);
}

struct MeanStderr {
    double mean = 0, stderr_ = 0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr out;
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= xs.size();
    if (xs.size() < 2) return out;
    double ss = 0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / (xs.size() - 1) / xs.size());
    return out;
}

inline void ensure_out_dir(const std::string& dir) {
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

inline void write_trials_csv(const std::string& path, const std::vector<TrialResult>& rows,
                             const ExperimentConfig& cfg, const char* extra = nullptr) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& line : cfg.metadata_lines(extra)) out << "# " << line << "\n";
    out << "trial,seed,alpha,normalized_shd,tpr,fpr,v_measure_all,v_measure_varying,runtime_ms\n";
    for (const auto& r : rows) {
        out << r.trial << "," << r.seed << "," << format_double(r.alpha) << ","
            << format_double(r.normalized_shd) << "," << format_double(r.tpr) << ","
            << format_double(r.fpr) << "," << format_double(r.v_measure_all) << ","
            << format_double(r.v_measure_varying) << "," << format_double(r.runtime_ms) << "\n";
    }
}

// Minimal standalone SVG polyline plot for the summary curves.
inline void write_line_plot_svg(const std::string& path, const std::string& title,
                                const std::vector<double>& xs,
                                const std::vector<std::pair<std::string, std::vector<double>>>&
                                    series) {
    if (xs.empty() || series.empty()) return;
    const double w = 640, h = 420, ml = 60, mr = 20, mt = 40, mb = 50;
    double ymin = 0, ymax = 1e-12;
    for (const auto& [name, ys] : series) {
        (void)name;
        for (double y : ys) {
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    double xmin = xs.front(), xmax = xs.back();
    if (xmax == xmin) xmax = xmin + 1;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    out << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& [name, ys] = series[s];
        out << "<polyline fill='none' stroke='" << colors[s % 4] << "' stroke-width='2' points='";
        for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i)
            out << px(xs[i]) << "," << py(ys[i]) << " ";
        out << "'/>\n";
        out << "<text x='" << w - mr - 150 << "' y='" << mt + 18 * s << "' fill='"
            << colors[s % 4] << "' font-size='12'>" << name << "</text>\n";
    }
    for (std::size_t i = 0; i < xs.size(); ++i)
        out << "<text x='" << px(xs[i]) << "' y='" << h - mb + 16
            << "' text-anchor='middle' font-size='10'>" << format_double(xs[i]) << "</text>\n";
    out << "<text x='" << ml - 8 << "' y='" << py(ymax) << "' text-anchor='end' font-size='10'>"
        << format_double(ymax) << "</text>\n";
    out << "<text x='" << ml - 8 << "' y='" << py(ymin) << "' text-anchor='end' font-size='10'>"
        << format_double(ymin) << "</text>\n";
    out << "</svg>\n";
}

// Latent-parent discrete realization of a MAG with generic CPTs, joint
// marginalized over the latents; used by the exact-oracle experiment mode.
inline JointTable exact_mag_joint(const MixedGraph& mag, int cardinality, Rng& rng) {
    const int nv = mag.node_count();
    const int nl = static_cast<int>(mag.bidirected_edges().size());
    const int m = nv + nl;
    std::vector<Edge> edges = mag.directed_edges();
    for (int l = 0; l < nl; ++l) {
        edges.emplace_back(nv + l, mag.bidirected_edges()[l].first);
        edges.emplace_back(nv + l, mag.bidirected_edges()[l].second);
    }
    Dag extended(m, std::move(edges));
    std::vector<Cpt> cpts(m);
    for (NodeId v = 0; v < m; ++v) {
        long rows = 1;
        for (std::size_t i = 0; i < extended.parents(v).size(); ++i) rows *= cardinality;
        Cpt t(rows * cardinality);
        for (long r = 0; r < rows; ++r) {
            double sum = 0;
            for (int val = 0; val < cardinality; ++val) {
                t[r * cardinality + val] = rng.gamma(1.0);
                sum += t[r * cardinality + val];
            }
            for (int val = 0; val < cardinality; ++val) t[r * cardinality + val] /= sum;
        }
        cpts[v] = std::move(t);
    }
    long states = 1;
    for (int i = 0; i < m; ++i) {
        states *= cardinality;
        if (states > 1000000)
            throw std::invalid_argument("exact_mag_joint: state space exceeds 10^6");
    }
    JointTable out;
    out.cards.assign(nv, cardinality);
    out.p.assign(static_cast<long>(std::pow(cardinality, nv)), 0.0);
    std::vector<int> state(m);
    JointTable full;
    full.cards.assign(m, cardinality);
    for (long idx = 0; idx < states; ++idx) {
        full.state_at(idx, state);
        double prod = 1;
        for (NodeId v = 0; v < m && prod > 0; ++v) {
            long row = 0;
            for (NodeId u : extended.parents(v)) row = row * cardinality + state[u];
            prod *= cpts[v][row * cardinality + state[v]];
        }
        long obs_idx = 0;
        for (NodeId v = 0; v < nv; ++v) obs_idx = obs_idx * cardinality + state[v];
        out.p[obs_idx] += prod;
    }
    return out;
}

// Faithfulness screen for a joint against a MAG's m-separations.
inline bool joint_faithful_to_mag(const MixedGraph& mag, const JointTable& joint, double margin) {
    const int n = mag.node_count();
    bool ok = true;
    verify_detail::for_each_singleton_query(n, -1, [&](NodeId a, NodeId b, const NodeSet& c) {
        if (!ok) return;
        const bool sep = m_separated(mag, SeparationQuery{{a}, {b}, c});
        const bool ci = exact_discrete_ci(joint, {a}, {b}, c, sep ? 1e-9 : margin);
        if (sep != ci) ok = false;
    });
    return ok;
}

}  // namespace exp_detail

// ---------------------------------------------------------------------------
// Union-graph estimation experiment (normalized SHD against the PAG
// estimated from data generated directly on the union graph)
// ---------------------------------------------------------------------------

struct AlphaSummary {
    double alpha = 0;
    double mean = 0;
    double stderr_ = 0;
};

struct ShdOutcome {
    std::vector<TrialResult> rows;
    std::vector<AlphaSummary> shd_summary;
    std::vector<AlphaSummary> adjacency_tpr_summary;  // skeleton recall vs the union graph
};

inline ShdOutcome run_shd_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ShdOutcome out;
    const int per_trial = static_cast<int>(cfg.alphas.size());
    out.rows.assign(cfg.n_trials * per_trial, {});
    std::vector<double> adj_tpr(cfg.n_trials * per_trial, 0.0);

    exp_detail::parallel_trials(cfg.n_trials, cfg.jobs, [&](int t) {
        Rng rng = Rng(cfg.master_seed).derive(t);
        const double t0 = exp_detail::now_ms();
        if (cfg.oracle == OracleMode::Exact) {
            DiscreteMixture dm;
            JointTable joint;
            bool ok = false;
            for (int attempt = 0; attempt < 50 && !ok; ++attempt) {
                dm = random_discrete_mixture(cfg.k, cfg.n_nodes, 2, rng);
                auto [dmu, y] = mixture_dag(dm.spec);
                (void)y;
                joint = exact_joint(dm);
                ok = verify_detail::numerically_faithful(dm.spec, dmu, joint, 1e-7);
            }
            if (!ok) throw std::runtime_error("exact-oracle trial: faithfulness screen exhausted");
            MixedGraph mu = union_graph(component_mags(dm.spec));
            JointTable union_joint;
            ok = false;
            for (int attempt = 0; attempt < 50 && !ok; ++attempt) {
                union_joint = exp_detail::exact_mag_joint(mu, 2, rng);
                ok = exp_detail::joint_faithful_to_mag(mu, union_joint, 1e-7);
            }
            if (!ok) throw std::runtime_error("exact-oracle trial: union joint screen exhausted");
            const Pag estimated = fci(DiscreteJointOracle(joint), cfg.n_nodes);
            const Pag baseline = fci(DiscreteJointOracle(union_joint), cfg.n_nodes);
            const double shd = normalized_shd(estimated, baseline);
            long hit = 0, truth = 0;
            for (NodeId a = 0; a < cfg.n_nodes; ++a)
                for (NodeId b = a + 1; b < cfg.n_nodes; ++b)
                    if (mu.adjacent(a, b)) {
                        ++truth;
                        if (estimated.adjacent(a, b)) ++hit;
                    }
            const double tpr = truth == 0 ? 1.0 : static_cast<double>(hit) / truth;
            const double ms = exp_detail::now_ms() - t0;
            for (int ai = 0; ai < per_trial; ++ai) {
                TrialResult row;
                row.trial = t;
                row.seed = rng.seed();
                row.alpha = cfg.alphas[ai];
                row.normalized_shd = shd;
                row.runtime_ms = ms;
                out.rows[t * per_trial + ai] = row;
                adj_tpr[t * per_trial + ai] = tpr;
            }
            return;
        }

        GaussianMixtureSem sem = random_mixture_sem(cfg.k, cfg.n_nodes, rng);
        const auto p = exp_detail::trial_proportions(cfg, rng);
        sem.spec.mixing_weights = p;
        auto sampled = sample(sem, cfg.n_samples, p, rng);
        MixedGraph mu = union_graph(component_mags(sem.spec));
        MagSem union_sem = make_mag_sem(mu, sem, rng);
        Eigen::MatrixXd union_data = sample_mag_sem(union_sem, cfg.n_samples, rng);
        auto stats_mix = std::make_shared<FisherZStats>(sampled.data);
        auto stats_union = std::make_shared<FisherZStats>(union_data);
        for (int ai = 0; ai < per_trial; ++ai) {
            const double a0 = exp_detail::now_ms();
            const double alpha = cfg.alphas[ai];
            Pag estimated = fci(FisherZOracle(stats_mix, alpha), cfg.n_nodes);
            Pag baseline = fci(FisherZOracle(stats_union, alpha), cfg.n_nodes);
            TrialResult row;
            row.trial = t;
            row.seed = rng.seed();
            row.alpha = alpha;
            row.normalized_shd = normalized_shd(estimated, baseline);
            row.runtime_ms = exp_detail::now_ms() - a0;
            out.rows[t * per_trial + ai] = row;
            long hit = 0, truth = 0;
            for (NodeId a = 0; a < cfg.n_nodes; ++a)
                for (NodeId b = a + 1; b < cfg.n_nodes; ++b)
                    if (mu.adjacent(a, b)) {
                        ++truth;
                        if (estimated.adjacent(a, b)) ++hit;
                    }
            adj_tpr[t * per_trial + ai] = truth == 0 ? 1.0 : static_cast<double>(hit) / truth;
        }
    });

    for (int ai = 0; ai < per_trial; ++ai) {
        std::vector<double> shds, tprs;
        for (int t = 0; t < cfg.n_trials; ++t) {
            shds.push_back(out.rows[t * per_trial + ai].normalized_shd);
            tprs.push_back(adj_tpr[t * per_trial + ai]);
        }
        const auto s = exp_detail::mean_stderr(shds);
        const auto a = exp_detail::mean_stderr(tprs);
        out.shd_summary.push_back({cfg.alphas[ai], s.mean, s.stderr_});
        out.adjacency_tpr_summary.push_back({cfg.alphas[ai], a.mean, a.stderr_});
    }

    if (!cfg.out_dir.empty()) {
        exp_detail::ensure_out_dir(cfg.out_dir);
        const std::string base = cfg.out_dir + "/shd";
        exp_detail::write_trials_csv(base + "_trials.csv", out.rows, cfg,
                                     "union_sem=latent-parent unit-weight, latent columns dropped");
        std::ofstream sum(base + "_summary.csv");
        for (const auto& line : cfg.metadata_lines()) sum << "# " << line << "\n";
        sum << "alpha,mean_normalized_shd,stderr\n";
        for (const auto& row : out.shd_summary)
            sum << format_double(row.alpha) << "," << format_double(row.mean) << ","
                << format_double(row.stderr_) << "\n";
        if (cfg.write_svg) {
            std::vector<double> xs;
            std::vector<double> ys;
            for (const auto& r : out.shd_summary) {
                xs.push_back(r.alpha);
                ys.push_back(r.mean);
            }
            exp_detail::write_line_plot_svg(base + ".svg", "normalized SHD vs alpha", xs,
                                            {{"mean normalized SHD", ys}});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Varying-node detection experiment
// ---------------------------------------------------------------------------

struct VaryingOutcome {
    std::vector<TrialResult> rows;
    std::vector<AlphaSummary> tpr_summary;
    std::vector<AlphaSummary> fpr_summary;
};

inline VaryingOutcome run_varying_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    VaryingOutcome out;
    const int per_trial = static_cast<int>(cfg.alphas.size());
    out.rows.assign(cfg.n_trials * per_trial, {});

    exp_detail::parallel_trials(cfg.n_trials, cfg.jobs, [&](int t) {
        Rng rng = Rng(cfg.master_seed).derive(t);
        if (cfg.oracle == OracleMode::Exact) {
            const double t0 = exp_detail::now_ms();
            DiscreteMixture dm;
            JointTable joint;
            bool ok = false;
            for (int attempt = 0; attempt < 50 && !ok; ++attempt) {
                dm = random_discrete_mixture(cfg.k, cfg.n_nodes, 2, rng);
                auto [dmu, y] = mixture_dag(dm.spec);
                (void)y;
                joint = exact_joint(dm);
                ok = verify_detail::numerically_faithful(dm.spec, dmu, joint, 1e-7);
            }
            if (!ok) throw std::runtime_error("exact-oracle trial: faithfulness screen exhausted");
            MixedGraph mu = union_graph(component_mags(dm.spec));
            const Pag estimated = fci(DiscreteJointOracle(joint), cfg.n_nodes);
            const auto rates = varying_rates(varying_nodes_from_pag(estimated),
                                             varying_nodes(mu), cfg.n_nodes);
            const double ms = exp_detail::now_ms() - t0;
            for (int ai = 0; ai < per_trial; ++ai) {
                TrialResult row;
                row.trial = t;
                row.seed = rng.seed();
                row.alpha = cfg.alphas[ai];
                row.tpr = rates.tpr;
                row.fpr = rates.fpr;
                row.runtime_ms = ms;
                out.rows[t * per_trial + ai] = row;
            }
            return;
        }
        GaussianMixtureSem sem = random_mixture_sem(cfg.k, cfg.n_nodes, rng);
        const auto p = exp_detail::trial_proportions(cfg, rng);
        sem.spec.mixing_weights = p;
        auto sampled = sample(sem, cfg.n_samples, p, rng);
        NodeSet truth;
        for (NodeId v = 0; v < cfg.n_nodes; ++v)
            if (!set_contains(sem.spec.v_inv, v)) truth.push_back(v);
        auto stats = std::make_shared<FisherZStats>(sampled.data);
        for (int ai = 0; ai < per_trial; ++ai) {
            const double a0 = exp_detail::now_ms();
            Pag estimated = fci(FisherZOracle(stats, cfg.alphas[ai]), cfg.n_nodes);
            const auto rates =
                varying_rates(varying_nodes_from_pag(estimated), truth, cfg.n_nodes);
            TrialResult row;
            row.trial = t;
            row.seed = rng.seed();
            row.alpha = cfg.alphas[ai];
            row.tpr = rates.tpr;
            row.fpr = rates.fpr;
            row.runtime_ms = exp_detail::now_ms() - a0;
            out.rows[t * per_trial + ai] = row;
        }
    });

    for (int ai = 0; ai < per_trial; ++ai) {
        std::vector<double> tprs, fprs;
        for (int t = 0; t < cfg.n_trials; ++t) {
            tprs.push_back(out.rows[t * per_trial + ai].tpr);
            fprs.push_back(out.rows[t * per_trial + ai].fpr);
        }
        const auto tp = exp_detail::mean_stderr(tprs);
        const auto fp = exp_detail::mean_stderr(fprs);
        out.tpr_summary.push_back({cfg.alphas[ai], tp.mean, tp.stderr_});
        out.fpr_summary.push_back({cfg.alphas[ai], fp.mean, fp.stderr_});
    }

    if (!cfg.out_dir.empty()) {
        exp_detail::ensure_out_dir(cfg.out_dir);
        const std::string base = cfg.out_dir + "/varying";
        exp_detail::write_trials_csv(base + "_trials.csv", out.rows, cfg);
        std::ofstream sum(base + "_summary.csv");
        for (const auto& line : cfg.metadata_lines()) sum << "# " << line << "\n";
        sum << "alpha,tpr,fpr,tpr_stderr,fpr_stderr\n";
        for (std::size_t i = 0; i < out.tpr_summary.size(); ++i)
            sum << format_double(out.tpr_summary[i].alpha) << ","
                << format_double(out.tpr_summary[i].mean) << ","
                << format_double(out.fpr_summary[i].mean) << ","
                << format_double(out.tpr_summary[i].stderr_) << ","
                << format_double(out.fpr_summary[i].stderr_) << "\n";
        if (cfg.write_svg) {
            std::vector<double> xs;
            std::vector<double> tp, fp;
            for (std::size_t i = 0; i < out.tpr_summary.size(); ++i) {
                xs.push_back(out.tpr_summary[i].alpha);
                tp.push_back(out.tpr_summary[i].mean);
                fp.push_back(out.fpr_summary[i].mean);
            }
            exp_detail::write_line_plot_svg(base + ".svg", "varying-node detection", xs,
                                            {{"TPR", tp}, {"FPR", fp}});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Clustering experiment
// ---------------------------------------------------------------------------

struct ClusterSummaryRow {
    int ktilde = 0;
    double v_varying_mean = 0, v_varying_stderr = 0;
    double v_all_mean = 0, v_all_stderr = 0;
};

struct ClusterOutcome {
    std::vector<TrialResult> rows;  // one row per (trial, ktilde); alpha carries ktilde
    std::vector<ClusterSummaryRow> summary;
};

inline ClusterOutcome run_cluster_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.oracle == OracleMode::Exact)
        throw std::invalid_argument("cluster experiment: exact-oracle mode is not defined");
    const auto ktildes = cfg.ktilde_or_default();
    ClusterOutcome out;
    const int per_trial = static_cast<int>(ktildes.size());
    out.rows.assign(cfg.n_trials * per_trial, {});

    exp_detail::parallel_trials(cfg.n_trials, cfg.jobs, [&](int t) {
        Rng rng = Rng(cfg.master_seed).derive(t);
        RandomSemOptions opt;
        opt.varying_nodes_are_sinks = cfg.cluster_setting == ClusterSetting::NoDescendants;
        GaussianMixtureSem sem = random_mixture_sem(cfg.k, cfg.n_nodes, rng, opt);
        const auto p = exp_detail::trial_proportions(cfg, rng);
        sem.spec.mixing_weights = p;
        auto sampled = sample(sem, cfg.n_samples, p, rng);
        const double alpha = cfg.alphas.front();
        Pag estimated = fci(FisherZOracle(sampled.data, alpha), cfg.n_nodes);
        const NodeSet est_varying = varying_nodes_from_pag(estimated);
        Eigen::MatrixXd varying_cols(cfg.n_samples, est_varying.size());
        for (std::size_t i = 0; i < est_varying.size(); ++i)
            varying_cols.col(i) = sampled.data.col(est_varying[i]);
        for (int ki = 0; ki < per_trial; ++ki) {
            const double k0 = exp_detail::now_ms();
            const int ktilde = ktildes[ki];
            std::vector<int> labels_varying(cfg.n_samples, 0);
            if (!est_varying.empty()) {
                Rng kv = rng.derive(1000 + ki);
                labels_varying = kmeans(varying_cols, ktilde, kv);
            }
            Rng ka = rng.derive(2000 + ki);
            std::vector<int> labels_all = kmeans(sampled.data, ktilde, ka);
            TrialResult row;
            row.trial = t;
            row.seed = rng.seed();
            row.alpha = ktilde;  // the sweep variable of this experiment
            row.v_measure_varying = v_measure(labels_varying, sampled.labels);
            row.v_measure_all = v_measure(labels_all, sampled.labels);
            row.runtime_ms = exp_detail::now_ms() - k0;
            out.rows[t * per_trial + ki] = row;
        }
    });

    for (int ki = 0; ki < per_trial; ++ki) {
        std::vector<double> vv, va;
        for (int t = 0; t < cfg.n_trials; ++t) {
            vv.push_back(out.rows[t * per_trial + ki].v_measure_varying);
            va.push_back(out.rows[t * per_trial + ki].v_measure_all);
        }
        const auto sv = exp_detail::mean_stderr(vv);
        const auto sa = exp_detail::mean_stderr(va);
        out.summary.push_back(
            {ktildes[ki], sv.mean, sv.stderr_, sa.mean, sa.stderr_});
    }

    if (!cfg.out_dir.empty()) {
        exp_detail::ensure_out_dir(cfg.out_dir);
        const std::string base = cfg.out_dir + "/cluster";
        exp_detail::write_trials_csv(base + "_trials.csv", out.rows, cfg,
                                     "alpha column carries ktilde");
        std::ofstream sum(base + "_summary.csv");
        for (const auto& line : cfg.metadata_lines()) sum << "# " << line << "\n";
        sum << "ktilde,v_measure_varying_features,v_measure_all_features,varying_stderr,"
               "all_stderr\n";
        for (const auto& row : out.summary)
            sum << row.ktilde << "," << format_double(row.v_varying_mean) << ","
                << format_double(row.v_all_mean) << "," << format_double(row.v_varying_stderr)
                << "," << format_double(row.v_all_stderr) << "\n";
        if (cfg.write_svg) {
            std::vector<double> xs;
            std::vector<double> vv, va;
            for (const auto& r : out.summary) {
                xs.push_back(r.ktilde);
                vv.push_back(r.v_varying_mean);
                va.push_back(r.v_all_mean);
            }
            exp_detail::write_line_plot_svg(base + ".svg", "clustering quality", xs,
                                            {{"varying features", vv}, {"all features", va}});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Verification runner
// ---------------------------------------------------------------------------

struct VerifyOutcome {
    std::vector<SuiteResult> suites;
    bool ok() const {
        for (const auto& s : suites)
            if (!s.passed) return false;
        return true;
    }
};

inline VerifyOutcome run_verify(const ExperimentConfig& cfg) {
    cfg.validate();
    VerifyOptions opt;
    opt.seed = cfg.master_seed;
    opt.inject_skip_step3 = cfg.inject_skip_step3;
    const double scale = cfg.n_trials / 30.0;  // --trials scales the default budgets
    auto scaled = [&](int base) { return std::max(5, static_cast<int>(base * scale)); };
    opt.sep_equivalence_mixtures = scaled(200);
    opt.markov_mixtures = scaled(100);
    opt.mag_instances = scaled(500);
    opt.faithfulness_mixtures = scaled(60);
    opt.single_bidirected_mixtures = scaled(100);
    opt.oracle_end_to_end_mixtures = scaled(50);
    opt.fci_oracle_mags = scaled(100);
    VerifyOutcome out{run_all_verification(opt)};
    if (!cfg.out_dir.empty()) {
        exp_detail::ensure_out_dir(cfg.out_dir);
        json report = json::array();
        for (const auto& s : out.suites) {
            json cert = json::array();
            for (const auto& c : s.certificates) cert.push_back(json::parse(c));
            report.push_back(json{{"suite", s.name},
                                  {"cases", s.cases},
                                  {"violations", s.violations},
                                  {"passed", s.passed},
                                  {"seconds", s.seconds},
                                  {"counterexamples", cert}});
        }
        save_json_file(cfg.out_dir + "/verify_report.json", report);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Real-data workflow
// ---------------------------------------------------------------------------

struct RealDataOutcome {
    Pag pag;
    std::vector<std::pair<NodeId, int>> ranking;
    std::vector<std::string> column_labels;
    std::vector<std::string> dropped_columns;
};

inline RealDataOutcome run_real_data(const std::string& csv_path, const ExperimentConfig& cfg) {
    cfg.validate();
    CsvData csv = read_csv_file(csv_path);
    if (csv.data.cols() < 2)
        throw std::invalid_argument("real-data: need at least two variable columns");

    // drop constant columns, standardize the rest
    const int n = static_cast<int>(csv.data.rows());
    std::vector<int> keep;
    RealDataOutcome out;
    for (int c = 0; c < csv.data.cols(); ++c) {
        const double mean = csv.data.col(c).mean();
        const double sd =
            std::sqrt((csv.data.col(c).array() - mean).square().sum() / (n - 1));
        if (sd > 0) {
            keep.push_back(c);
        } else {
            out.dropped_columns.push_back(csv.column_labels[c]);
        }
    }
    if (static_cast<int>(keep.size()) < 2)
        throw std::invalid_argument("real-data: fewer than two non-constant columns");
    Eigen::MatrixXd x(n, keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const auto col = csv.data.col(keep[i]);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().sum() / (n - 1));
        x.col(i) = (col.array() - mean) / sd;
        out.column_labels.push_back(csv.column_labels[keep[i]]);
    }

    Rng rng(cfg.master_seed);
    out.pag = fci_stability_selection(x, cfg.alphas.front(), cfg.stability_subsamples,
                                      cfg.stability_keep_fraction, cfg.stability_threshold, rng,
                                      {}, out.column_labels);
    out.ranking = bidirected_degree_ranking(out.pag);

    if (!cfg.out_dir.empty()) {
        exp_detail::ensure_out_dir(cfg.out_dir);
        save_json_file(cfg.out_dir + "/pag.json", to_json(out.pag));
        std::ofstream rank(cfg.out_dir + "/bidirected_ranking.csv");
        for (const auto& line : cfg.metadata_lines()) rank << "# " << line << "\n";
        rank << "node,label,bidirected_degree\n";
        for (const auto& [v, count] : out.ranking)
            rank << v << "," << out.column_labels[v] << "," << count << "\n";
    }
    return out;
}

}  // namespace mixdag

#endif  // MIXDAG_EXPERIMENTS_HPP
