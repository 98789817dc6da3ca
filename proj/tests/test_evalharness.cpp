#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "btm/evalharness.hpp"
#include "btm/rng.hpp"
#include "oracles.hpp"

using namespace btm;

namespace {

// Exhaustive pairwise AUROC: favorable pairs + half ties.
double auroc_pairwise_oracle(const Vector& scores, const Vector& labels) {
    double favorable = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1.0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0.0) continue;
            ++pairs;
            if (scores[i] > scores[j]) {
                favorable += 1.0;
            } else if (scores[i] == scores[j]) {
                favorable += 0.5;
            }
        }
    }
    return favorable / static_cast<double>(pairs);
}

// Average precision by explicit threshold enumeration over distinct scores.
double auprc_threshold_oracle(const Vector& scores, const Vector& labels) {
    std::set<double, std::greater<double>> thresholds(scores.begin(), scores.end());
    std::size_t n_pos = 0;
    for (double y : labels) n_pos += y == 1.0 ? 1 : 0;
    double ap = 0.0;
    double prev_recall = 0.0;
    for (double tau : thresholds) {
        std::size_t tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= tau) {
                if (labels[i] == 1.0) {
                    ++tp;
                } else {
                    ++fp;
                }
            }
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

}  // namespace

TEST_CASE("auroc on the worked example and the extremes") {
    CHECK(auroc({0.1, 0.4, 0.35, 0.8}, {0.0, 0.0, 1.0, 1.0}) ==
          doctest::Approx(0.75).epsilon(1e-12));
    CHECK(auroc({0.1, 0.2, 0.8, 0.9}, {0.0, 0.0, 1.0, 1.0}) == 1.0);
    CHECK(auroc({0.5, 0.5, 0.5, 0.5}, {0.0, 1.0, 0.0, 1.0}) == 0.5);
    CHECK_THROWS_AS(auroc({0.1, 0.2}, {1.0, 1.0}), UndefinedMetric);
    CHECK_THROWS_AS(auroc({0.1, 0.2}, {0.0, 0.5}), InvalidInput);
}

TEST_CASE("auroc matches exhaustive pairwise counting exactly") {
    Rng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(19);
        Vector scores(n), labels(n);
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse grid scores make ties common.
            scores[i] = std::floor(rng.uniform() * 8.0) / 8.0;
            labels[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
            (labels[i] == 1.0 ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) continue;
        CHECK(auroc(scores, labels) ==
              doctest::Approx(auroc_pairwise_oracle(scores, labels)).epsilon(1e-14));
    }
}

TEST_CASE("auprc on worked examples") {
    CHECK(auprc({0.9, 0.8, 0.7}, {1.0, 0.0, 1.0}) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(auprc({0.2, 0.9, 0.8}, {0.0, 1.0, 1.0}) == 1.0);
    CHECK_THROWS_AS(auprc({0.5, 0.6}, {0.0, 0.0}), UndefinedMetric);
}

TEST_CASE("auprc matches the threshold-enumeration oracle exactly") {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(19);
        Vector scores(n), labels(n);
        bool has_pos = false;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = std::floor(rng.uniform() * 8.0) / 8.0;
            labels[i] = rng.uniform() < 0.4 ? 1.0 : 0.0;
            if (labels[i] == 1.0) has_pos = true;
        }
        if (!has_pos) continue;
        CHECK(auprc(scores, labels) ==
              doctest::Approx(auprc_threshold_oracle(scores, labels)).epsilon(1e-13));
    }
}

TEST_CASE("auprc of random scores approaches prevalence") {
    Rng rng(7);
    const std::size_t n = 10000;
    const double prevalence = 0.2;
    Vector scores(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = rng.uniform();
        labels[i] = rng.uniform() < prevalence ? 1.0 : 0.0;
    }
    const double ap = auprc(scores, labels);
    CHECK(std::abs(ap - prevalence) < 0.05);
    CHECK(ap >= prevalence - 0.05);
}

TEST_CASE("benchmark generation: shapes, stratification, determinism") {
    DataSpec spec;
    spec.n = 4000;
    spec.d = 20;
    spec.prevalence = 0.05;
    spec.seed = 11;
    Dataset ds = generate_benchmark(spec);
    REQUIRE(ds.x.rows == 4000);
    REQUIRE(ds.y.size() == 4000);
    CHECK(ds.prevalence == doctest::Approx(0.05));

    const std::size_t n_train = ds.split_count(Split::train);
    const std::size_t n_val = ds.split_count(Split::val);
    const std::size_t n_test = ds.split_count(Split::test);
    CHECK(n_train + n_val + n_test == 4000);
    CHECK(std::abs(static_cast<double>(n_train) / 4000.0 - 0.65) < 0.01);
    CHECK(std::abs(static_cast<double>(n_val) / 4000.0 - 0.15) < 0.01);

    // Stratification keeps split prevalence near global.
    for (Split s : {Split::train, Split::val, Split::test}) {
        const Batch b = ds.split_batch(s);
        double pos = 0;
        for (double y : b.y) pos += y;
        const double prev = pos / static_cast<double>(b.y.size());
        CHECK(prev >= 0.025);
        CHECK(prev <= 0.10);
    }

    // Train-statistics standardization.
    const Batch train = ds.split_batch(Split::train);
    for (std::size_t j = 0; j < 3; ++j) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < train.x.rows; ++i) mean += train.x(i, j);
        mean /= static_cast<double>(train.x.rows);
        for (std::size_t i = 0; i < train.x.rows; ++i) {
            const double d = train.x(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(train.x.rows);
        CHECK(std::abs(mean) < 1e-10);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-8));
    }

    Dataset again = generate_benchmark(spec);
    CHECK(again.x.data == ds.x.data);
    CHECK(again.split == ds.split);

    DataSpec bad = spec;
    bad.prevalence = 0.001;  // 4 positives
    CHECK_THROWS_AS(generate_benchmark(bad), InvalidSpec);
    bad = spec;
    bad.n = 50;
    CHECK_THROWS_AS(generate_benchmark(bad), InvalidSpec);
}

TEST_CASE("separated balanced benchmark trains to near-perfect AUROC") {
    DataSpec spec;
    spec.n = 1000;
    spec.d = 6;
    spec.prevalence = 0.5;
    spec.overlap = 0.0;
    spec.seed = 13;
    Dataset ds = generate_benchmark(spec);

    bool diverged = false;
    EvalConfig cfg;
    cfg.epochs = 60;
    Vector theta = train_eval_model(ds.split_batch(Split::train), MlpConfig{6, 16, 0.0}, cfg,
                                    99, diverged);
    REQUIRE(!diverged);
    const Batch test = ds.split_batch(Split::test);
    CHECK(auroc(predict(MlpConfig{6, 16, 0.0}, theta, test.x), test.y) >= 0.99);
}

TEST_CASE("XOR arrangement defeats a linear probe but not the MLP") {
    DataSpec spec;
    spec.n = 1200;
    spec.d = 4;
    spec.prevalence = 0.5;
    spec.overlap = 0.2;
    spec.nonlinearity = true;
    spec.seed = 17;
    Dataset ds = generate_benchmark(spec);
    const Batch train = ds.split_batch(Split::train);
    const Batch test = ds.split_batch(Split::test);

    // Linear probe: logistic regression on raw features.
    Vector w(5, 0.0);
    for (int iter = 0; iter < 2000; ++iter) {
        Vector g(5, 0.0);
        for (std::size_t i = 0; i < train.x.rows; ++i) {
            double z = w[4];
            for (int k = 0; k < 4; ++k) z += w[k] * train.x(i, k);
            const double p = 1.0 / (1.0 + std::exp(-z));
            const double dz = (p - train.y[i]) / static_cast<double>(train.x.rows);
            for (int k = 0; k < 4; ++k) g[k] += dz * train.x(i, k);
            g[4] += dz;
        }
        for (int k = 0; k < 5; ++k) w[k] -= 0.5 * g[k];
    }
    Vector linear_scores(test.x.rows);
    for (std::size_t i = 0; i < test.x.rows; ++i) {
        double z = w[4];
        for (int k = 0; k < 4; ++k) z += w[k] * test.x(i, k);
        linear_scores[i] = z;
    }
    const double linear_auroc = auroc(linear_scores, test.y);

    bool diverged = false;
    EvalConfig cfg;
    cfg.epochs = 80;
    const MlpConfig model{4, 16, 0.0};
    Vector theta = train_eval_model(train, model, cfg, 7, diverged);
    REQUIRE(!diverged);
    const double mlp_auroc = auroc(predict(model, theta, test.x), test.y);
    // The interaction carries separability a linear probe cannot reach.
    CHECK(mlp_auroc > 0.85);
    CHECK(mlp_auroc - linear_auroc > 0.08);
}

TEST_CASE("evaluate_synthetic is deterministic and flags no divergence here") {
    DataSpec spec;
    spec.n = 800;
    spec.d = 5;
    spec.prevalence = 0.3;
    spec.seed = 19;
    Dataset ds = generate_benchmark(spec);

    SyntheticDataset synth;
    const Batch train = ds.split_batch(Split::train);
    synth.x = train.x;
    synth.y = train.y;
    synth.ipc = 0;

    const MlpConfig model{5, 8, 0.0};
    EvalConfig cfg;
    cfg.epochs = 30;
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    auto a = evaluate_synthetic(synth, ds, model, cfg, seeds);
    auto b = evaluate_synthetic(synth, ds, model, cfg, seeds);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(!a[i].diverged);
        CHECK(a[i].auroc == b[i].auroc);
        CHECK(a[i].auprc == b[i].auprc);
        CHECK(a[i].n_pos >= 1);
    }

    MetricSummary summary = summarize(a);
    CHECK(summary.valid_seeds == 3);
    CHECK(summary.mean_auroc > 0.8);  // identity condensation keeps full-data quality
}
