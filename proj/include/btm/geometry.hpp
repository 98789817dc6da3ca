#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "btm/linalg.hpp"
#include "btm/rng.hpp"
#include "btm/surrogate.hpp"
#include "btm/teacher.hpp"

namespace btm {

enum class SupervisionSource { sgd, bezier, linear };

struct SegmentMeta {
    std::size_t source_id = 0;  // trajectory or surrogate index
    double t_start = 0.0;       // epoch index for SGD sources, curve time otherwise
    double t_end = 0.0;
};

struct DisplacementMatrix {
    Matrix a;  // p x K, one displacement per column
    SupervisionSource source = SupervisionSource::sgd;
    std::vector<SegmentMeta> segments;
};

struct EpochSegment {
    std::size_t trajectory = 0;
    std::size_t start_epoch = 0;
    std::size_t end_epoch = 0;
};

struct CurveSegment {
    std::size_t surrogate = 0;
    double t_start = 0.0;
    double t_end = 0.0;
};

DisplacementMatrix build_displacements(const std::vector<Trajectory>& trajectories,
                                       const std::vector<EpochSegment>& segments);

DisplacementMatrix build_displacements(const std::vector<BezierSurrogate>& surrogates,
                                       const std::vector<CurveSegment>& segments,
                                       SupervisionSource source);

// All contiguous (s, s + length) epoch pairs of every trajectory.
std::vector<EpochSegment> contiguous_epoch_segments(const std::vector<Trajectory>& trajectories,
                                                    std::size_t length);

// Per surrogate, `per_surrogate` segments (t_s, t_s + dt) with t_s uniform
// on [0, 1 - dt].
std::vector<CurveSegment> sample_curve_segments(std::size_t num_surrogates,
                                                std::size_t per_surrogate, double dt, Rng& rng);

// Column-orthonormal basis of span{g_0, ..., g_{N-1}}. All-zero gradients
// yield an empty basis (the span is {0}).
Matrix reachable_span(const std::vector<Vector>& student_gradients, double tol);

struct ProjectionBoundReport {
    double bound = 0.0;              // |(I - P_G) delta|^2
    double realized_residual = 0.0;  // from an actual student run
    Vector best_in_span;             // P_G delta
    bool holds = false;              // realized >= bound - 1e-10 (1 + bound)
};

ProjectionBoundReport projection_bound_certificate(const Vector& teacher_displacement,
                                                   const Matrix& span_basis,
                                                   double realized_residual);

struct RankBottleneckReport {
    double tail_energy = 0.0;           // (1/K) sum_{j>r} sigma_j^2
    double top_subspace_residual = 0.0; // residual of the top-r left-singular subspace
    bool top_subspace_attains = false;  // matches tail within 1e-8 relative
    double min_random_residual = 0.0;
    std::size_t violations = 0;         // random subspaces beating the tail
    std::size_t trials = 0;
};

RankBottleneckReport rank_bottleneck_certificate(const DisplacementMatrix& a, std::size_t r,
                                                 std::size_t trials, std::uint64_t seed);

struct SpectralReport {
    Vector singular_values;
    Vector cumulative_energy;  // partial sums of sigma^2 / total
    std::size_t effective_rank_90 = 0;
    std::size_t effective_rank_95 = 0;
    std::size_t effective_rank_99 = 0;
    std::size_t numerical_rank = 0;
};

SpectralReport spectral_report(const DisplacementMatrix& a);

// CSV columns: k, sigma_k, cumulative_energy.
void write_spectral_csv(const SpectralReport& rep, const std::string& path);

// Orthonormalized standard-normal p x r subspace basis.
Matrix random_subspace(std::size_t dim, std::size_t rank, Rng& rng);

}  // namespace btm
