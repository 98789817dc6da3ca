#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "btm/model.hpp"

namespace btm {

struct TeacherConfig {
    double lr = 0.05;
    double momentum = 0.9;   // in [0, 1)
    std::size_t epochs = 40;
    std::size_t batch_size = 128;
    std::uint64_t seed = 0;
    double dropout_rate = 0.0;
};

struct Trajectory {
    std::vector<Vector> checkpoints;  // theta_0 .. theta_T, one per epoch boundary
    std::uint64_t seed = 0;
    double final_train_loss = 0.0;

    std::size_t epochs() const { return checkpoints.size() - 1; }
    std::size_t dim() const { return checkpoints.empty() ? 0 : checkpoints.front().size(); }
};

// SGD with optional heavy-ball momentum; the momentum buffer is not part of
// the recorded checkpoints. Shuffles use a per-epoch seed derived as
// hash(seed, epoch), so (seed, config, data) fully determine the trajectory.
Trajectory train_teacher(const Batch& data, const TeacherConfig& cfg,
                         const MlpConfig& model_cfg);

// Format "BTMT": magic, u32 version=1, u64 T, u64 p, then T+1 checkpoints,
// each a u64 epoch index followed by p little-endian f64. Round-trips are
// bit-exact.
void save_trajectory(const Trajectory& t, const std::string& path);
Trajectory load_trajectory(const std::string& path);

struct StorageReport {
    std::size_t sgd_vectors = 0;     // (T+1) * M
    std::size_t bezier_vectors = 0;  // 3 * M
    double ratio = 0.0;              // (T+1) / 3
    std::size_t sgd_bytes = 0;
    std::size_t bezier_bytes = 0;
};

StorageReport storage_report(std::size_t num_trajectories, std::size_t epochs, std::size_t p);

}  // namespace btm
