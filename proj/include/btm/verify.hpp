#pragma once

#include <string>
#include <vector>

#include "btm/config.hpp"

namespace btm {

struct CertificateResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double wall_ms = 0.0;
};

// Runnable certificates for the geometric claims: displacement rank,
// chord-deviation law and its maximum, the projection lower bound, the
// rank bottleneck, and the fidelity triangle bounds. Inputs are generated
// deterministically from cfg.seed at the sizes in [verify].
std::vector<CertificateResult> run_theory_certificates(const RunConfig& cfg);

}  // namespace btm
