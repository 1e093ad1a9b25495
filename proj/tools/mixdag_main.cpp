// Command-line entry point: generation, discovery, verification, and the
// synthetic / real-data experiment harness.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mixdag/experiments.hpp"

using namespace mixdag;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerification = 3;

struct CliState {
    ExperimentConfig cfg;
    std::string config_path;
    std::string data_path;
    std::string proportions = "uniform";
    std::string oracle = "fisher";
    std::string cluster = "no-descendants";
    std::string inject;
};

void load_config_file(CliState& st) {
    if (st.config_path.empty()) return;
    const json j = load_json_file(st.config_path);
    auto& cfg = st.cfg;
    if (j.contains("k")) cfg.k = j["k"].get<int>();
    if (j.contains("nodes")) cfg.n_nodes = j["nodes"].get<int>();
    if (j.contains("samples")) cfg.n_samples = j["samples"].get<int>();
    if (j.contains("alphas")) cfg.alphas = j["alphas"].get<std::vector<double>>();
    if (j.contains("trials")) cfg.n_trials = j["trials"].get<int>();
    if (j.contains("seed")) cfg.master_seed = j["seed"].get<std::uint64_t>();
    if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("ktilde")) cfg.ktilde = j["ktilde"].get<std::vector<int>>();
    if (j.contains("proportions")) st.proportions = j["proportions"].get<std::string>();
    if (j.contains("oracle")) st.oracle = j["oracle"].get<std::string>();
    if (j.contains("cluster")) st.cluster = j["cluster"].get<std::string>();
    if (j.contains("svg")) cfg.write_svg = j["svg"].get<bool>();
    if (j.contains("stability_subsamples"))
        cfg.stability_subsamples = j["stability_subsamples"].get<int>();
    if (j.contains("stability_keep_fraction"))
        cfg.stability_keep_fraction = j["stability_keep_fraction"].get<double>();
    if (j.contains("stability_threshold"))
        cfg.stability_threshold = j["stability_threshold"].get<double>();
}

void resolve_enums(CliState& st) {
    auto& cfg = st.cfg;
    if (st.proportions == "uniform") {
        cfg.proportions = ProportionsKind::Uniform;
    } else if (st.proportions.rfind("dirichlet", 0) == 0) {
        cfg.proportions = ProportionsKind::Dirichlet;
        const auto colon = st.proportions.find(':');
        if (colon != std::string::npos)
            cfg.dirichlet_alpha = std::stod(st.proportions.substr(colon + 1));
    } else {
        throw std::invalid_argument("unknown proportions scheme: " + st.proportions);
    }
    if (st.oracle == "fisher") cfg.oracle = OracleMode::Fisher;
    else if (st.oracle == "exact") cfg.oracle = OracleMode::Exact;
    else throw std::invalid_argument("unknown oracle kind: " + st.oracle);
    if (st.cluster == "no-descendants") cfg.cluster_setting = ClusterSetting::NoDescendants;
    else if (st.cluster == "descendants") cfg.cluster_setting = ClusterSetting::Descendants;
    else throw std::invalid_argument("unknown clustering setting: " + st.cluster);
    if (!st.inject.empty()) {
        if (st.inject == "skip-step3") cfg.inject_skip_step3 = true;
        else throw std::invalid_argument("unknown fault injection: " + st.inject);
    }
}

void add_common_options(CLI::App* cmd, CliState& st) {
    cmd->add_option("--config", st.config_path, "JSON config file; flags override its fields");
    cmd->add_option("--k", st.cfg.k, "number of mixture components");
    cmd->add_option("--nodes", st.cfg.n_nodes, "number of observed variables");
    cmd->add_option("--samples", st.cfg.n_samples, "total sample size");
    cmd->add_option("--alphas", st.cfg.alphas, "significance levels")->delimiter(',');
    cmd->add_option("--trials", st.cfg.n_trials, "number of trials (verify: budget scale /30)");
    cmd->add_option("--seed", st.cfg.master_seed, "master seed");
    cmd->add_option("--proportions", st.proportions, "uniform | dirichlet:<alpha>");
    cmd->add_option("--out", st.cfg.out_dir, "output directory");
    cmd->add_option("--oracle", st.oracle, "exact | fisher");
    cmd->add_option("--jobs", st.cfg.jobs, "worker threads for independent trials");
    cmd->add_flag("--svg", st.cfg.write_svg, "also emit an SVG line plot");
}

int cmd_gen(CliState& st) {
    auto& cfg = st.cfg;
    if (cfg.out_dir.empty()) throw std::invalid_argument("gen: --out is required");
    exp_detail::ensure_out_dir(cfg.out_dir);
    Rng rng = Rng(cfg.master_seed).derive(0);
    GaussianMixtureSem sem = random_mixture_sem(cfg.k, cfg.n_nodes, rng);
    const auto p = exp_detail::trial_proportions(cfg, rng);
    sem.spec.mixing_weights = p;
    auto sampled = sample(sem, cfg.n_samples, p, rng);
    MixedGraph mu = union_graph(component_mags(sem.spec));

    save_json_file(cfg.out_dir + "/mixture_spec.json", to_json(sem.spec));
    save_json_file(cfg.out_dir + "/union_graph.json", to_json(mu));
    CsvData csv;
    csv.column_labels = sem.spec.components[0].labels();
    csv.data = std::move(sampled.data);
    csv.labels = std::move(sampled.labels);
    write_csv_file(cfg.out_dir + "/data.csv", csv, cfg.metadata_lines());
    std::cout << "generated " << cfg.n_samples << " samples from a " << cfg.k << "-component "
              << cfg.n_nodes << "-node mixture; union graph has "
              << mu.directed_edges().size() << " directed and " << mu.bidirected_edges().size()
              << " bidirected edges\n";
    return kExitOk;
}

int cmd_fci(CliState& st) {
    auto& cfg = st.cfg;
    if (cfg.oracle == OracleMode::Exact)
        throw std::invalid_argument("fci: the exact oracle needs an enumerable model; use "
                                    "'exp --oracle exact' instead");
    CsvData csv = read_csv_file(st.data_path);
    const int p = static_cast<int>(csv.data.cols());
    Pag pag = fci(FisherZOracle(csv.data, cfg.alphas.front()), p, {}, csv.column_labels);
    const json out = to_json(pag);
    if (!cfg.out_dir.empty()) {
        exp_detail::ensure_out_dir(cfg.out_dir);
        save_json_file(cfg.out_dir + "/pag.json", out);
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_verify(CliState& st) {
    VerifyOutcome outcome = run_verify(st.cfg);
    for (const auto& s : outcome.suites) {
        std::printf("%-36s %6ld cases %4ld violations %7.2fs  %s\n", s.name.c_str(), s.cases,
                    s.violations, s.seconds, s.passed ? "ok" : "FAILED");
        for (const auto& cert : s.certificates)
            std::printf("    counterexample: %s\n", cert.c_str());
    }
    return outcome.ok() ? kExitOk : kExitVerification;
}

int cmd_exp(CliState& st, const std::string& which) {
    auto& cfg = st.cfg;
    if (which == "shd") {
        cfg.kind = ExperimentKind::Shd;
        auto outcome = run_shd_experiment(cfg);
        std::printf("alpha    mean_shd   stderr\n");
        for (const auto& row : outcome.shd_summary)
            std::printf("%-8g %-10.4f %-10.4f\n", row.alpha, row.mean, row.stderr_);
    } else if (which == "varying") {
        cfg.kind = ExperimentKind::Varying;
        auto outcome = run_varying_experiment(cfg);
        std::printf("alpha    tpr        fpr\n");
        for (std::size_t i = 0; i < outcome.tpr_summary.size(); ++i)
            std::printf("%-8g %-10.4f %-10.4f\n", outcome.tpr_summary[i].alpha,
                        outcome.tpr_summary[i].mean, outcome.fpr_summary[i].mean);
    } else {
        cfg.kind = ExperimentKind::Cluster;
        auto outcome = run_cluster_experiment(cfg);
        std::printf("ktilde   v(varying) v(all)\n");
        for (const auto& row : outcome.summary)
            std::printf("%-8d %-10.4f %-10.4f\n", row.ktilde, row.v_varying_mean, row.v_all_mean);
    }
    return kExitOk;
}

int cmd_real(CliState& st) {
    st.cfg.kind = ExperimentKind::RealData;
    auto outcome = run_real_data(st.data_path, st.cfg);
    for (const auto& col : outcome.dropped_columns)
        std::cerr << "warning: dropped constant column " << col << "\n";
    std::printf("node ranking by incident bidirected edges:\n");
    for (const auto& [v, count] : outcome.ranking)
        std::printf("  %-20s %d\n", outcome.column_labels[v].c_str(), count);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal structure discovery from mixtures of DAGs"};
    app.require_subcommand(1);
    CliState st;

    auto* gen = app.add_subcommand("gen", "generate a mixture SEM and sample data");
    add_common_options(gen, st);

    auto* fci_cmd = app.add_subcommand("fci", "run FCI on a samples CSV");
    add_common_options(fci_cmd, st);
    fci_cmd->add_option("--data", st.data_path, "samples CSV")->required();

    auto* verify = app.add_subcommand("verify", "run the verification suites");
    add_common_options(verify, st);
    verify->add_option("--inject-bug", st.inject, "fault injection for self-test (skip-step3)");

    auto* exp = app.add_subcommand("exp", "synthetic experiments");
    exp->require_subcommand(1);
    auto* shd = exp->add_subcommand("shd", "union-graph estimation error sweep");
    auto* varying = exp->add_subcommand("varying", "varying-node detection sweep");
    auto* cluster = exp->add_subcommand("cluster", "clustering by estimated varying nodes");
    for (auto* cmd : {shd, varying, cluster}) add_common_options(cmd, st);
    cluster->add_option("--cluster-setting", st.cluster, "no-descendants | descendants");
    cluster->add_option("--ktilde", st.cfg.ktilde, "cluster counts to sweep")->delimiter(',');

    auto* real = app.add_subcommand("real", "FCI with stability selection on a CSV");
    add_common_options(real, st);
    real->add_option("--data", st.data_path, "samples CSV")->required();
    real->add_option("--stability-subsamples", st.cfg.stability_subsamples,
                     "number of row subsamples");
    real->add_option("--stability-keep", st.cfg.stability_keep_fraction,
                     "fraction of rows per subsample");
    real->add_option("--stability-threshold", st.cfg.stability_threshold,
                     "adjacency frequency cutoff");

    // load --config before CLI11 assigns flag values, so flags override it
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            st.config_path = argv[i + 1];
            break;
        }
    }
    try {
        load_config_file(st);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        resolve_enums(st);
        st.cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen(st);
        if (fci_cmd->parsed()) return cmd_fci(st);
        if (verify->parsed()) return cmd_verify(st);
        if (exp->parsed()) {
            if (shd->parsed()) return cmd_exp(st, "shd");
            if (varying->parsed()) return cmd_exp(st, "varying");
            return cmd_exp(st, "cluster");
        }
        if (real->parsed()) return cmd_real(st);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
