#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "btm/evalharness.hpp"
#include "btm/surrogate.hpp"
#include "btm/synthetic.hpp"

namespace btm {

enum class Method { btm, mtt, linear };

struct CondenseConfig {
    Method method = Method::btm;
    std::size_t ipc = 10;
    std::size_t inner_steps = 30;  // N (surrogate methods)
    double student_lr = 0.01;      // eta_s, jointly meta-optimized
    double meta_lr = 100.0;        // eta_x
    double meta_momentum = 0.9;
    std::size_t batch_size = 0;    // 0 = max(2*ipc, 256)
    double segment_dt = 0.2;
    bool free_pair = false;        // sample (t_s, t_e) as an unconstrained ordered pair
    std::size_t max_iters = 2000;
    std::size_t eval_every = 50;
    std::uint64_t seed = 0;
    InitMode init_mode = InitMode::real;
    double student_lr_meta_lr = 1e-4;
    double student_lr_meta_momentum = 0.5;
    std::size_t mtt_segment_epochs = 5;  // M
    std::size_t mtt_inner_steps = 60;    // N for the raw-SGD baseline
    EvalConfig eval_cfg{0.05, 0.9, 50, 256};  // from-scratch eval during condensation
    std::size_t eval_models = 3;  // fresh models averaged per validation estimate

    std::size_t resolved_batch_size() const {
        return batch_size != 0 ? batch_size : std::max<std::size_t>(2 * ipc, 256);
    }
};

// Everything retained from one inner loop so the meta-gradient can be
// assembled afterwards.
struct UnrollResult {
    Vector theta_end;
    std::vector<Vector> thetas;     // theta_n before step n, n = 0..N-1
    std::vector<Vector> gradients;  // g_n
    std::vector<std::vector<std::size_t>> batch_indices;
    double eta_s = 0.0;
};

// N plain gradient steps on synthetic mini-batches. Batches are drawn
// without replacement within a pass and reshuffled between passes, all from
// the given seed.
UnrollResult student_unroll(const Vector& theta_start, const SyntheticDataset& synth,
                            std::size_t n_steps, double eta_s, std::uint64_t seed,
                            const MlpConfig& model_cfg, std::size_t batch_size = 0);

// t_s uniform on [0, 1 - dt], t_e = t_s + dt.
std::pair<double, double> sample_segment(Rng& rng, double dt);
// Unconstrained ordered pair t_s < t_e, both uniform on (0, 1).
std::pair<double, double> sample_segment_free(Rng& rng);

// |theta_hat - theta_e|^2 / |theta_s - theta_e|^2
double btm_loss(const Vector& theta_hat, const Vector& theta_s, const Vector& theta_e);

// g_L = 2 (theta_hat - theta_e) / |theta_s - theta_e|^2
Vector matching_loss_gradient(const Vector& theta_hat, const Vector& theta_s,
                              const Vector& theta_e);

// First-order meta-gradient w.r.t. the synthetic inputs: the student-step
// gradients are treated as constants except through the explicit mixed
// term. Rows of samples never drawn in the unroll stay zero.
Matrix meta_gradient(const UnrollResult& unroll, const Vector& theta_e, const Vector& theta_s,
                     const SyntheticDataset& synth, const MlpConfig& model_cfg);

struct TraceRow {
    std::size_t iter = 0;
    std::size_t source_id = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    double matching_loss = 0.0;
    double meta_grad_norm = 0.0;
    double student_lr = 0.0;  // eta_s after this iteration's meta-update
    double eval_auprc = 0.0;
    bool has_eval = false;
};

struct CondenseTrace {
    std::vector<TraceRow> rows;
    SyntheticDataset best;
    double best_val_auprc = -1.0;
    std::size_t best_iter = 0;
    bool aborted = false;
    std::string abort_reason;
};

struct Supervision {
    std::vector<BezierSurrogate> surrogates;  // btm / linear methods
    std::vector<Trajectory> trajectories;     // mtt baseline
};

// Class-balanced synthetic initialization from the train split (real mode)
// or per-class moment-matched Gaussians (random mode).
SyntheticDataset init_synthetic(const Dataset& real, std::size_t ipc, InitMode mode,
                                std::uint64_t seed);

// The outer loop of dataset condensation. Populates `trace` as it runs, so
// a NumericalError abort still leaves the trace (and best checkpoint so
// far) available to the caller.
SyntheticDataset condense(const Dataset& real, const Supervision& supervision,
                          const CondenseConfig& cfg, const MlpConfig& model_cfg,
                          CondenseTrace& trace);

// CSV columns: iter, loss, grad_norm, eval_auprc (blank on non-eval rows).
void write_trace_csv(const CondenseTrace& trace, const std::string& path);

}  // namespace btm
