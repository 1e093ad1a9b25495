#include <catch2/catch_amalgamated.hpp>

#include "mixdag/ci.hpp"
#include "mixdag/mixture.hpp"
#include "mixdag/sem.hpp"
#include "test_helpers.hpp"

using namespace mixdag;

TEST_CASE("random mixture sems respect the degree budget", "[sem]") {
    Rng rng(301);
    const int k = 4, n = 10;
    long edges = 0, graphs = 0;
    for (int t = 0; t < 60; ++t) {
        GaussianMixtureSem sem = random_mixture_sem(k, n, rng);
        sem.validate();
        for (const auto& c : sem.spec.components) {
            edges += static_cast<long>(c.edges().size());
            ++graphs;
        }
        CHECK(poset_compatible(component_mags(sem.spec)).compatible);
    }
    // expected per-component degree 1.5/K = 0.375 => mean edges n*d/2 = 1.875
    const double mean_edges = static_cast<double>(edges) / graphs;
    CHECK(mean_edges > 1.2);
    CHECK(mean_edges < 2.6);
}

TEST_CASE("single-component sem is fully invariant", "[sem]") {
    Rng rng(303);
    GaussianMixtureSem sem = random_mixture_sem(1, 6, rng);
    NodeSet all{0, 1, 2, 3, 4, 5};
    CHECK(sem.spec.v_inv == all);
    auto [dmu, y] = mixture_dag(sem.spec);
    CHECK(dmu.children(y).empty());
}

TEST_CASE("shared edges carry equal weights", "[sem]") {
    Rng rng(305);
    for (int t = 0; t < 20; ++t) {
        GaussianMixtureSem sem = random_mixture_sem(3, 8, rng);
        const int k = sem.spec.component_count();
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
                for (const auto& [u, v] : sem.spec.components[i].edges())
                    if (sem.spec.components[j].has_edge(u, v))
                        CHECK(sem.weights[i](u, v) == sem.weights[j](u, v));
        for (const auto& [e, w] : sem.pair_weights) {
            (void)e;
            CHECK(std::abs(w) >= 0.25);
            CHECK(std::abs(w) <= 2.0);
        }
        for (int v = 0; v < 8; ++v) {
            CHECK(sem.noise_means(v) >= -2.0);
            CHECK(sem.noise_means(v) <= 2.0);
        }
    }
}

TEST_CASE("varying-sink rejection leaves varying nodes childless", "[sem]") {
    Rng rng(307);
    for (int t = 0; t < 10; ++t) {
        GaussianMixtureSem sem =
            random_mixture_sem(2, 6, rng, {.varying_nodes_are_sinks = true});
        for (NodeId v = 0; v < 6; ++v) {
            if (set_contains(sem.spec.v_inv, v)) continue;
            for (const auto& c : sem.spec.components) CHECK(c.children(v).empty());
        }
    }
}

TEST_CASE("component moments in closed form", "[sem]") {
    // empty graph: mean = noise means, covariance = diag(sds^2)
    GaussianMixtureSem sem;
    sem.spec = make_mixture_spec({Dag(3)}, {0, 1, 2});
    sem.weights = {Eigen::MatrixXd::Zero(3, 3)};
    sem.noise_means = Eigen::Vector3d(0.5, -1.0, 2.0);
    sem.noise_sds = Eigen::Vector3d(1.0, 2.0, 0.5);
    auto [mean, cov] = component_moments(sem, 0);
    CHECK(mean.isApprox(sem.noise_means));
    CHECK(cov.isApprox(Eigen::Vector3d(1.0, 4.0, 0.25).asDiagonal().toDenseMatrix()));

    // chain u -> v with weight w and unit noise: var(v) = w^2 + 1
    GaussianMixtureSem chain;
    chain.spec = make_mixture_spec({Dag(2, {{0, 1}})}, {0, 1});
    chain.weights = {Eigen::MatrixXd::Zero(2, 2)};
    chain.weights[0](0, 1) = 1.7;
    chain.pair_weights[{0, 1}] = 1.7;
    chain.noise_means = Eigen::Vector2d::Zero();
    chain.noise_sds = Eigen::Vector2d::Ones();
    auto [cmean, ccov] = component_moments(chain, 0);
    CHECK(cmean.isZero(1e-14));
    CHECK(ccov(1, 1) == Catch::Approx(1.7 * 1.7 + 1.0));
    CHECK(ccov(0, 1) == Catch::Approx(1.7));

    CHECK_THROWS_AS(component_moments(chain, 5), std::invalid_argument);
}

TEST_CASE("monte carlo moments match the closed form", "[sem][slow]") {
    Rng rng(311);
    GaussianMixtureSem sem = random_mixture_sem(2, 5, rng);
    const int j = 0;
    auto [mean, cov] = component_moments(sem, j);
    const int n = 1000000;
    auto sampled = sample(sem, n, {1.0, 0.0}, rng);
    Eigen::VectorXd emp_mean = sampled.data.colwise().mean();
    Eigen::MatrixXd centered = sampled.data.rowwise() - emp_mean.transpose();
    Eigen::MatrixXd emp_cov = centered.transpose() * centered / (n - 1);
    CHECK((emp_mean - mean).cwiseAbs().maxCoeff() < 0.02);
    CHECK((emp_cov - cov).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("sampling counts and determinism", "[sem]") {
    Rng rng(313);
    GaussianMixtureSem sem = random_mixture_sem(4, 5, rng);
    std::vector<double> p{0.25, 0.25, 0.25, 0.25};
    Rng s1(99), s2(99);
    auto a = sample(sem, 5000, p, s1);
    auto b = sample(sem, 5000, p, s2);
    CHECK(a.data == b.data);
    CHECK(a.labels == b.labels);
    std::vector<int> counts(4, 0);
    for (int lab : a.labels) counts[lab]++;
    CHECK(counts == std::vector<int>{1250, 1250, 1250, 1250});

    Rng s3(1);
    auto c = sample(sem, 10, {1.0, 0.0, 0.0, 0.0}, s3);
    for (int lab : c.labels) CHECK(lab == 0);

    CHECK_THROWS_AS(sample(sem, 10, {0.5, 0.5, 0.5, -0.5}, s3), std::invalid_argument);
}

TEST_CASE("largest remainder apportionment", "[sem]") {
    CHECK(apportion_counts(10, {0.5, 0.5}) == std::vector<int>{5, 5});
    CHECK(apportion_counts(10, {1.0, 0.0}) == std::vector<int>{10, 0});
    CHECK(apportion_counts(7, {1.0 / 3, 1.0 / 3, 1.0 / 3}) == std::vector<int>{3, 2, 2});
    int total = 0;
    for (int c : apportion_counts(11, {0.21, 0.33, 0.46})) total += c;
    CHECK(total == 11);
}

TEST_CASE("per-component sample means stay within the CLT band", "[sem]") {
    Rng rng(317);
    GaussianMixtureSem sem = random_mixture_sem(2, 4, rng);
    auto res = sample(sem, 20000, {0.5, 0.5}, rng);
    for (int j = 0; j < 2; ++j) {
        auto [mean, cov] = component_moments(sem, j);
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(4);
        int nj = 0;
        for (int i = 0; i < 20000; ++i)
            if (res.labels[i] == j) {
                sum += res.data.row(i).transpose();
                ++nj;
            }
        Eigen::VectorXd emp = sum / nj;
        for (int v = 0; v < 4; ++v) {
            const double sd = std::sqrt(cov(v, v));
            CHECK(std::abs(emp(v) - mean(v)) < 5.0 * sd / std::sqrt(static_cast<double>(nj)));
        }
    }
}

TEST_CASE("dirichlet proportions", "[sem]") {
    Rng rng(319);
    for (int t = 0; t < 100; ++t) {
        auto p = dirichlet_proportions(4, 2.0, rng);
        double sum = 0;
        for (double x : p) {
            CHECK(x >= 0);
            sum += x;
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    // near-degenerate concentration at huge alpha
    auto p = dirichlet_proportions(4, 1e6, rng);
    for (double x : p) CHECK(std::abs(x - 0.25) < 0.01);
    // empirical mean of each coordinate is 1/K
    Eigen::Vector4d acc = Eigen::Vector4d::Zero();
    const int draws = 10000;
    for (int t = 0; t < draws; ++t) {
        auto q = dirichlet_proportions(4, 2.0, rng);
        for (int i = 0; i < 4; ++i) acc(i) += q[i];
    }
    for (int i = 0; i < 4; ++i) CHECK(std::abs(acc(i) / draws - 0.25) < 0.02);
    CHECK_THROWS_AS(dirichlet_proportions(3, 0.0, rng), std::invalid_argument);
}

TEST_CASE("exact joint of a single component matches direct enumeration", "[sem]") {
    Rng rng(323);
    DiscreteMixture dm = random_discrete_mixture(1, 3, 2, rng);
    const JointTable joint = exact_joint(dm);
    double total = 0;
    std::vector<int> state(3);
    for (long idx = 0; idx < joint.state_count(); ++idx) {
        joint.state_at(idx, state);
        double prod = 1;
        for (NodeId v = 0; v < 3; ++v) {
            long row = 0;
            for (NodeId u : dm.spec.components[0].parents(v)) row = row * 2 + state[u];
            prod *= dm.cpts[0][v][row * 2 + state[v]];
        }
        CHECK(joint.p[idx] == Catch::Approx(prod).margin(1e-15));
        total += joint.p[idx];
    }
    CHECK(total == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("uniform CPTs give the uniform joint", "[sem]") {
    DiscreteMixture dm;
    dm.spec = test::running_example_spec();
    dm.cardinalities = {2, 2, 2, 2};
    const Cpt root{0.5, 0.5};
    dm.cpts = {{root, {0.5, 0.5, 0.5, 0.5}, root, root},
               {root, root, {0.5, 0.5, 0.5, 0.5}, root}};
    const JointTable joint = exact_joint(dm);
    for (double p : joint.p) CHECK(p == Catch::Approx(1.0 / 16));
}

TEST_CASE("the running example keeps its invariant endpoints independent", "[sem]") {
    // X1 and X4 are separated in the mixture DAG, so the exact joint must
    // factor for any generic CPTs
    Rng rng(331);
    for (int t = 0; t < 20; ++t) {
        DiscreteMixture dm;
        dm.spec = test::running_example_spec();
        dm.cardinalities = {2, 2, 2, 2};
        auto row = [&] {
            const double p = rng.uniform(0.05, 0.95);
            return Cpt{p, 1 - p};
        };
        auto two_rows = [&] {
            auto a = row(), b = row();
            return Cpt{a[0], a[1], b[0], b[1]};
        };
        dm.cpts = {{row(), two_rows(), row(), row()}, {row(), row(), two_rows(), row()}};
        dm.cpts[1][0] = dm.cpts[0][0];  // invariant nodes share their CPTs
        dm.cpts[1][3] = dm.cpts[0][3];
        const JointTable joint = exact_joint(dm);
        CHECK(exact_discrete_ci(joint, {0}, {3}, {}, 1e-12));
    }
}

TEST_CASE("exact joint marginals decompose over components", "[sem]") {
    Rng rng(337);
    DiscreteMixture dm = random_discrete_mixture(2, 4, 2, rng,
                                                 {.require_poset_compatible = false});
    const JointTable joint = exact_joint(dm);
    // single-node marginal equals the weighted component marginals
    for (NodeId v = 0; v < 4; ++v) {
        std::vector<double> marginal(2, 0.0);
        std::vector<int> state(4);
        for (long idx = 0; idx < joint.state_count(); ++idx) {
            joint.state_at(idx, state);
            marginal[state[v]] += joint.p[idx];
        }
        std::vector<double> expected(2, 0.0);
        for (int j = 0; j < 2; ++j) {
            DiscreteMixture single;
            single.spec = make_mixture_spec({dm.spec.components[j]}, dm.spec.v_inv);
            single.cardinalities = dm.cardinalities;
            single.cpts = {dm.cpts[j]};
            const JointTable cj = exact_joint(single);
            for (long idx = 0; idx < cj.state_count(); ++idx) {
                cj.state_at(idx, state);
                expected[state[v]] += dm.spec.mixing_weights[j] * cj.p[idx];
            }
        }
        CHECK(marginal[0] == Catch::Approx(expected[0]).margin(1e-10));
        CHECK(marginal[1] == Catch::Approx(expected[1]).margin(1e-10));
    }
}

TEST_CASE("crafted density gap vanishes, perturbed does not", "[sem]") {
    const auto gaps = example31_density_gap();
    CHECK(gaps.crafted_gap < 1e-10);
    CHECK(gaps.perturbed_gap > 1e-6);
    CHECK(example31_gap(1.0, 2.001) < 1e-14);  // degenerate mixing: single Gaussian
}

TEST_CASE("mag sem samples match the latent-augmented closed form", "[sem][slow]") {
    Rng rng(341);
    int with_bidirected = 0;
    for (int t = 0; t < 5; ++t) {
        GaussianMixtureSem sem = random_mixture_sem(2, 4, rng);
        MixedGraph mu = union_graph(component_mags(sem.spec));
        with_bidirected += mu.bidirected_edges().empty() ? 0 : 1;
        MagSem ms = make_mag_sem(mu, sem, rng);
        auto [mean, cov] = mag_sem_moments(ms);
        Rng srng(4242 + t);
        const int n = 200000;
        Eigen::MatrixXd x = sample_mag_sem(ms, n, srng);
        Eigen::VectorXd emp_mean = x.colwise().mean();
        Eigen::MatrixXd centered = x.rowwise() - emp_mean.transpose();
        Eigen::MatrixXd emp_cov = centered.transpose() * centered / (n - 1);
        CHECK((emp_mean - mean).cwiseAbs().maxCoeff() < 0.05);
        CHECK((emp_cov - cov).cwiseAbs().maxCoeff() < 0.15);
        // each bidirected pair picks up the unit latent variance
        for (const auto& [u, v] : mu.bidirected_edges()) {
            INFO("pair " << u << "," << v);
            CHECK(std::abs(cov(u, v)) > 0.5);
        }
    }
    CHECK(with_bidirected > 0);
    // deterministic under the same seed
    GaussianMixtureSem sem = random_mixture_sem(2, 4, rng);
    MixedGraph mu = union_graph(component_mags(sem.spec));
    Rng w1(7), w2(7);
    MagSem m1 = make_mag_sem(mu, sem, w1), m2 = make_mag_sem(mu, sem, w2);
    Rng s1(8), s2(8);
    CHECK(sample_mag_sem(m1, 100, s1) == sample_mag_sem(m2, 100, s2));
}
