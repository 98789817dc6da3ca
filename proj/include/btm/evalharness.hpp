#pragma once

#include <cstdint>
#include <vector>

#include "btm/model.hpp"
#include "btm/synthetic.hpp"

namespace btm {

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

struct DataSpec {
    std::size_t n = 4000;
    std::size_t d = 20;
    double prevalence = 0.05;  // in (0, 0.5]
    double overlap = 0.5;      // 0 = well separated, 1 = indistinguishable classes
    bool nonlinearity = false; // XOR-style component arrangement
    std::uint64_t seed = 0;
};

struct Dataset {
    Matrix x;                        // standardized to train-split statistics
    Vector y;
    std::vector<std::uint8_t> split; // one Split tag per row
    double prevalence = 0.0;

    Batch split_batch(Split s) const;
    std::size_t split_count(Split s) const;
};

// Class-conditional Gaussian mixture (two components per class) with a
// stratified 65/15/20 split and train-statistics standardization.
Dataset generate_benchmark(const DataSpec& spec);

// Mann-Whitney AUROC with midrank tie handling.
double auroc(const Vector& scores, const Vector& labels);

// Average precision (step interpolation); equal scores form one threshold
// group.
double auprc(const Vector& scores, const Vector& labels);

struct EvalConfig {
    double lr = 0.05;
    double momentum = 0.9;
    std::size_t epochs = 100;
    std::size_t batch_size = 256;
};

struct MetricReport {
    double auroc = 0.0;
    double auprc = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    std::uint64_t seed = 0;
    bool diverged = false;
};

// Fresh random init, SGD with momentum on `train`, no dropout. Divergent
// runs are flagged, never retried.
Vector train_eval_model(const Batch& train, const MlpConfig& model_cfg, const EvalConfig& cfg,
                        std::uint64_t seed, bool& diverged);

MetricReport score_model(const MlpConfig& model_cfg, const Vector& theta, const Batch& target,
                         std::uint64_t seed);

// One from-scratch training per seed on the synthetic data, scored on the
// test split of `real`.
std::vector<MetricReport> evaluate_synthetic(const SyntheticDataset& synth, const Dataset& real,
                                             const MlpConfig& model_cfg, const EvalConfig& cfg,
                                             const std::vector<std::uint64_t>& seeds);

struct MetricSummary {
    double mean_auroc = 0.0, std_auroc = 0.0;
    double mean_auprc = 0.0, std_auprc = 0.0;
    std::size_t valid_seeds = 0;
    std::size_t diverged_seeds = 0;
};

MetricSummary summarize(const std::vector<MetricReport>& reports);

}  // namespace btm
