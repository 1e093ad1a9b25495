#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mixdag/experiments.hpp"
#include "test_helpers.hpp"

using namespace mixdag;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.k = 2;
    cfg.n_nodes = 6;
    cfg.n_samples = 400;
    cfg.alphas = {0.01, 0.05};
    cfg.n_trials = 3;
    cfg.master_seed = 11;
    return cfg;
}

}  // namespace

TEST_CASE("config validation", "[experiments]") {
    ExperimentConfig cfg = small_config();
    cfg.alphas = {1.5};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.oracle = OracleMode::Exact;
    cfg.n_nodes = 20;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("shd experiment produces one row per trial and alpha", "[experiments]") {
    ExperimentConfig cfg = small_config();
    auto outcome = run_shd_experiment(cfg);
    CHECK(outcome.rows.size() == 6);
    CHECK(outcome.shd_summary.size() == 2);
    for (const auto& row : outcome.rows) {
        CHECK(row.normalized_shd >= 0.0);
        CHECK(row.normalized_shd <= 1.0);
    }
}

TEST_CASE("exact-oracle shd is identically zero", "[experiments][slow]") {
    ExperimentConfig cfg = small_config();
    cfg.oracle = OracleMode::Exact;
    cfg.n_nodes = 4;
    cfg.n_trials = 8;
    auto outcome = run_shd_experiment(cfg);
    for (const auto& row : outcome.rows) CHECK(row.normalized_shd == 0.0);
}

TEST_CASE("exact-oracle varying detection is conservative and clean", "[experiments][slow]") {
    ExperimentConfig cfg = small_config();
    cfg.oracle = OracleMode::Exact;
    cfg.n_nodes = 4;
    cfg.n_trials = 8;
    auto outcome = run_varying_experiment(cfg);
    for (const auto& row : outcome.rows) {
        CHECK(row.fpr == 0.0);  // definite bidirected edges are never spurious
        CHECK(row.tpr >= 0.0);
    }
}

TEST_CASE("experiments are reproducible at any job count", "[experiments][slow]") {
    namespace fs = std::filesystem;
    const auto dir1 = fs::temp_directory_path() / "mixdag_exp_a";
    const auto dir2 = fs::temp_directory_path() / "mixdag_exp_b";
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    ExperimentConfig cfg = small_config();
    cfg.out_dir = dir1.string();
    cfg.jobs = 1;
    run_shd_experiment(cfg);
    cfg.out_dir = dir2.string();
    cfg.jobs = 4;
    run_shd_experiment(cfg);

    auto strip_runtime = [](const std::string& text) {
        // runtime_ms is wall-clock and may differ between runs; drop the column
        std::istringstream in(text);
        std::ostringstream out;
        std::string line;
        while (std::getline(in, line)) {
            const auto comma = line.rfind(',');
            out << (comma == std::string::npos ? line : line.substr(0, comma)) << "\n";
        }
        return out.str();
    };
    CHECK(strip_runtime(slurp((dir1 / "shd_trials.csv").string())) ==
          strip_runtime(slurp((dir2 / "shd_trials.csv").string())));
    CHECK(slurp((dir1 / "shd_summary.csv").string()) ==
          slurp((dir2 / "shd_summary.csv").string()));
}

TEST_CASE("varying experiment summary covers the alpha grid", "[experiments]") {
    ExperimentConfig cfg = small_config();
    cfg.alphas = {0.001, 0.01, 0.05, 0.1};
    cfg.n_trials = 2;
    auto outcome = run_varying_experiment(cfg);
    REQUIRE(outcome.tpr_summary.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(outcome.tpr_summary[i].alpha == cfg.alphas[i]);
}

TEST_CASE("cluster experiment with a single cluster scores zero", "[experiments][slow]") {
    ExperimentConfig cfg = small_config();
    cfg.k = 2;
    cfg.n_samples = 300;
    cfg.alphas = {0.05};
    cfg.ktilde = {1, 2};
    cfg.n_trials = 2;
    auto outcome = run_cluster_experiment(cfg);
    REQUIRE(outcome.summary.size() == 2);
    CHECK(outcome.summary[0].ktilde == 1);
    CHECK(outcome.summary[0].v_varying_mean == 0.0);
    CHECK(outcome.summary[0].v_all_mean == 0.0);

    cfg.oracle = OracleMode::Exact;
    CHECK_THROWS_AS(run_cluster_experiment(cfg), std::invalid_argument);
}

TEST_CASE("verify runner aggregates the suites", "[experiments][slow]") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Verify;
    cfg.n_trials = 2;  // scaled-down budgets
    cfg.master_seed = 4;
    auto outcome = run_verify(cfg);
    CHECK(outcome.suites.size() == 9);
    CHECK(outcome.ok());

    cfg.inject_skip_step3 = true;
    auto broken = run_verify(cfg);
    CHECK_FALSE(broken.ok());
}

TEST_CASE("real-data pipeline on a synthetic stand-in", "[experiments][slow]") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "mixdag_real";
    fs::remove_all(dir);
    fs::create_directories(dir);

    // two pooled groups over ten variables, mimicking a two-subtype study
    Rng rng(77);
    GaussianMixtureSem sem = random_mixture_sem(2, 10, rng);
    auto sampled = sample(sem, 400, {0.5, 0.5}, rng);
    CsvData csv;
    csv.column_labels = sem.spec.components[0].labels();
    csv.data = sampled.data;
    // constant column exercises the drop-with-warning path
    csv.column_labels.push_back("CONST");
    csv.data.conservativeResize(Eigen::NoChange, 11);
    csv.data.col(10).setConstant(3.25);
    const std::string path = (dir / "data.csv").string();
    write_csv_file(path, csv);

    ExperimentConfig cfg;
    cfg.alphas = {0.05};
    cfg.master_seed = 5;
    cfg.stability_subsamples = 8;
    cfg.out_dir = (dir / "out").string();
    auto outcome = run_real_data(path, cfg);
    CHECK(outcome.dropped_columns == std::vector<std::string>{"CONST"});
    CHECK(outcome.column_labels.size() == 10);
    CHECK(outcome.ranking.size() == 10);
    CHECK(fs::exists(dir / "out" / "pag.json"));
    CHECK(fs::exists(dir / "out" / "bidirected_ranking.csv"));

    // deterministic rerun
    auto again = run_real_data(path, cfg);
    CHECK(again.pag == outcome.pag);
    CHECK(again.ranking == outcome.ranking);

    // single-column input is refused
    CsvData one;
    one.column_labels = {"A"};
    one.data.resize(3, 1);
    one.data << 1, 2, 3;
    const std::string single = (dir / "single.csv").string();
    write_csv_file(single, one);
    CHECK_THROWS_AS(run_real_data(single, cfg), std::invalid_argument);
}

TEST_CASE("svg plots are written on request", "[experiments]") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "mixdag_svg";
    fs::remove_all(dir);
    ExperimentConfig cfg = small_config();
    cfg.n_trials = 2;
    cfg.out_dir = dir.string();
    cfg.write_svg = true;
    run_shd_experiment(cfg);
    CHECK(fs::exists(dir / "shd.svg"));
    const std::string svg = slurp((dir / "shd.svg").string());
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("polyline") != std::string::npos);
}
