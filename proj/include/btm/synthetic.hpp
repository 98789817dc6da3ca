#pragma once

#include <cstdint>
#include <string>

#include "btm/model.hpp"

namespace btm {

enum class InitMode { real, random_gaussian };

// The condensation output: learnable inputs with fixed hard labels,
// balanced between the two classes (n = 2 * ipc).
struct SyntheticDataset {
    Matrix x;          // n x d, learnable
    Vector y;          // fixed hard labels in {0, 1}
    std::size_t ipc = 0;
    InitMode init_mode = InitMode::real;

    std::size_t size() const { return x.rows; }
    Batch as_batch() const { return Batch{x, y}; }
};

// Format "BTMD": magic, u32 version=1, u64 n, u64 d, row-major
// little-endian f64 features, then n labels as u8.
void save_synthetic(const SyntheticDataset& s, const std::string& path);
SyntheticDataset load_synthetic(const std::string& path);

}  // namespace btm
