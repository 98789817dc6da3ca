#pragma once

#include <map>
#include <string>
#include <vector>

#include "btm/condense.hpp"
#include "btm/config.hpp"
#include "btm/geometry.hpp"

namespace btm {

// Pipeline stages shared by the CLI subcommands and the experiment suite.
Dataset suite_dataset(const RunConfig& cfg);
std::vector<Trajectory> suite_train_teachers(const RunConfig& cfg, const Dataset& ds);
std::vector<BezierSurrogate> suite_fit_surrogates(
    const RunConfig& cfg, const Dataset& ds, const std::vector<Trajectory>& teachers,
    std::vector<ControlPointResult>* fit_results = nullptr);
std::vector<BezierSurrogate> linear_surrogates_from(const std::vector<Trajectory>& teachers);

// The lower-bound baseline: a class-balanced random draw from the train
// split at the synthetic budget.
SyntheticDataset random_subset_baseline(const Dataset& ds, std::size_t ipc, std::uint64_t seed);

struct CellResult {
    std::string experiment;
    std::string method;
    std::size_t ipc = 0;
    std::vector<MetricReport> per_seed;
    MetricSummary summary;
    std::map<std::string, double> diagnostics;
    double wall_ms = 0.0;
    bool failed = false;
    std::string error;
};

// Runs the configured experiment grid; each cell is isolated, failures are
// recorded and the suite continues. Artifacts land under out_dir.
std::vector<CellResult> run_experiment_suite(const RunConfig& cfg, const std::string& out_dir);

// CSV columns: experiment, method, ipc, seed, auroc, auprc, wall_ms.
void write_results_csv(const std::vector<CellResult>& cells, const std::string& path);
void write_summary_json(const std::vector<CellResult>& cells, const std::string& path);

std::vector<std::uint64_t> evaluation_seeds(const RunConfig& cfg);

}  // namespace btm
