#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "btm/condense.hpp"
#include "btm/evalharness.hpp"
#include "btm/surrogate.hpp"
#include "btm/teacher.hpp"

namespace btm {

struct TeacherSection {
    std::size_t count = 10;
    std::size_t hidden = 24;
    TeacherConfig sgd;  // lr, momentum, epochs, batch_size, dropout
};

struct SurrogateSection {
    ControlPointOpts opts;
};

struct CondenseSection {
    CondenseConfig cfg;
};

struct EvalSection {
    std::size_t seeds = 10;
    EvalConfig cfg;  // final from-scratch evaluation settings
    bool suite = false;
    std::vector<std::string> methods{"btm", "linear", "mtt", "random"};
    std::vector<std::size_t> ipcs{10, 50};
    std::vector<std::string> experiments{"main"};
    std::vector<std::size_t> inner_steps_ablation;
    std::vector<double> segment_dt_ablation;
};

struct VerifySection {
    std::size_t trials = 100;           // Theorem 1 randomized trials
    std::size_t subspace_trials = 1000; // Theorem 2 random subspaces
    std::size_t grid_points = 1001;
    std::size_t surrogate_dim = 500;    // Theorem 3 ambient dimension
    std::size_t surrogate_count = 20;
    std::size_t segments_per_surrogate = 50;
    std::size_t fidelity_surrogates = 10;
};

// One config file drives every pipeline stage. Unknown sections or keys are
// rejected; `seed` is mandatory and lives above the first section header.
struct RunConfig {
    std::uint64_t seed = 0;
    DataSpec data;
    std::string data_file;  // optional pre-generated benchmark, relative to the config
    TeacherSection teacher;
    SurrogateSection surrogate;
    CondenseSection condense;
    EvalSection eval;
    VerifySection verify;
    std::string config_dir;  // directory of the parsed file

    MlpConfig model_cfg() const { return MlpConfig{data.d, teacher.hidden, 0.0}; }
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& config_dir);

// Benchmark dataset container, format "BTMG": magic, u32 version=1, u64 n,
// u64 d, f64 prevalence, row-major f64 features, n label bytes, n split
// bytes.
void save_benchmark(const Dataset& ds, const std::string& path);
Dataset load_benchmark(const std::string& path);

}  // namespace btm
