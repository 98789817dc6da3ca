#include "btm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

namespace btm {

DisplacementMatrix build_displacements(const std::vector<Trajectory>& trajectories,
                                       const std::vector<EpochSegment>& segments) {
    if (segments.empty()) throw InvalidInput("build_displacements: no segments");
    if (trajectories.empty()) throw InvalidInput("build_displacements: no trajectories");
    const std::size_t p = trajectories.front().dim();

    DisplacementMatrix out;
    out.source = SupervisionSource::sgd;
    out.a = Matrix(p, segments.size());
    out.segments.reserve(segments.size());
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const EpochSegment& seg = segments[k];
        if (seg.trajectory >= trajectories.size())
            throw InvalidInput("build_displacements: trajectory id out of range");
        const Trajectory& traj = trajectories[seg.trajectory];
        if (traj.dim() != p) throw DimError("build_displacements: trajectory dimension mismatch");
        if (seg.start_epoch >= seg.end_epoch || seg.end_epoch > traj.epochs())
            throw InvalidSegment("build_displacements: need start < end <= T");
        const Vector& a = traj.checkpoints[seg.start_epoch];
        const Vector& b = traj.checkpoints[seg.end_epoch];
        for (std::size_t i = 0; i < p; ++i) out.a(i, k) = b[i] - a[i];
        out.segments.push_back({seg.trajectory, static_cast<double>(seg.start_epoch),
                                static_cast<double>(seg.end_epoch)});
    }
    return out;
}

DisplacementMatrix build_displacements(const std::vector<BezierSurrogate>& surrogates,
                                       const std::vector<CurveSegment>& segments,
                                       SupervisionSource source) {
    if (segments.empty()) throw InvalidInput("build_displacements: no segments");
    if (surrogates.empty()) throw InvalidInput("build_displacements: no surrogates");
    if (source == SupervisionSource::sgd)
        throw InvalidInput("build_displacements: sgd source takes epoch segments");
    const std::size_t p = surrogates.front().dim();

    DisplacementMatrix out;
    out.source = source;
    out.a = Matrix(p, segments.size());
    out.segments.reserve(segments.size());
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const CurveSegment& seg = segments[k];
        if (seg.surrogate >= surrogates.size())
            throw InvalidInput("build_displacements: surrogate id out of range");
        const BezierSurrogate& s = surrogates[seg.surrogate];
        if (s.dim() != p) throw DimError("build_displacements: surrogate dimension mismatch");
        if (!(seg.t_start < seg.t_end))
            throw InvalidSegment("build_displacements: need t_start < t_end");
        // The linear family is represented by surrogates whose control point
        // already sits at the midpoint.
        Vector d = segment_displacement(s, seg.t_start, seg.t_end);
        out.a.set_col(k, d);
        out.segments.push_back({seg.surrogate, seg.t_start, seg.t_end});
    }
    return out;
}

std::vector<EpochSegment> contiguous_epoch_segments(const std::vector<Trajectory>& trajectories,
                                                    std::size_t length) {
    if (length == 0) throw InvalidInput("contiguous_epoch_segments: zero length");
    std::vector<EpochSegment> segs;
    for (std::size_t m = 0; m < trajectories.size(); ++m) {
        const std::size_t T = trajectories[m].epochs();
        for (std::size_t s = 0; s + length <= T; ++s) {
            segs.push_back({m, s, s + length});
        }
    }
    return segs;
}

std::vector<CurveSegment> sample_curve_segments(std::size_t num_surrogates,
                                                std::size_t per_surrogate, double dt, Rng& rng) {
    if (!(dt > 0.0 && dt <= 1.0)) throw InvalidInput("sample_curve_segments: dt outside (0, 1]");
    std::vector<CurveSegment> segs;
    segs.reserve(num_surrogates * per_surrogate);
    for (std::size_t m = 0; m < num_surrogates; ++m) {
        for (std::size_t k = 0; k < per_surrogate; ++k) {
            const double ts = rng.uniform(0.0, 1.0 - dt);
            segs.push_back({m, ts, ts + dt});
        }
    }
    return segs;
}

Matrix reachable_span(const std::vector<Vector>& student_gradients, double tol) {
    if (student_gradients.empty()) throw InvalidInput("reachable_span: no gradients");
    return orthonormal_basis(Matrix::from_columns(student_gradients), tol);
}

ProjectionBoundReport projection_bound_certificate(const Vector& teacher_displacement,
                                                   const Matrix& span_basis,
                                                   double realized_residual) {
    ProjectionBoundReport rep;
    rep.best_in_span = project_onto(span_basis, teacher_displacement);
    rep.bound = norm_sq(sub(teacher_displacement, rep.best_in_span));
    rep.realized_residual = realized_residual;
    rep.holds = realized_residual >= rep.bound - 1e-10 * (1.0 + rep.bound);
    return rep;
}

Matrix random_subspace(std::size_t dim, std::size_t rank, Rng& rng) {
    Matrix g(dim, rank);
    for (double& v : g.data) v = rng.normal();
    Matrix basis = orthonormal_basis(g, 1e-12);
    // Standard-normal columns are almost surely independent; regenerate on
    // the measure-zero degenerate draw.
    while (basis.cols < rank) {
        for (double& v : g.data) v = rng.normal();
        basis = orthonormal_basis(g, 1e-12);
    }
    return basis;
}

namespace {

// (1/K) |(I - B B^T) A|_F^2 for a column-orthonormal basis B.
double mean_projection_residual(const Matrix& a, const Matrix& basis) {
    Matrix coeffs = matmul_transposed_a(basis, a);   // r x K
    Matrix reproj = matmul(basis, coeffs);           // p x K
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - reproj.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.cols);
}

}  // namespace

RankBottleneckReport rank_bottleneck_certificate(const DisplacementMatrix& dm, std::size_t r,
                                                 std::size_t trials, std::uint64_t seed) {
    const Matrix& a = dm.a;
    if (r < 1 || r >= std::min(a.rows, a.cols))
        throw InvalidInput("rank_bottleneck_certificate: r out of range");

    const SvdResult s = svd(a);
    const double k_inv = 1.0 / static_cast<double>(a.cols);

    RankBottleneckReport rep;
    rep.trials = trials;
    for (std::size_t j = r; j < s.singular_values.size(); ++j)
        rep.tail_energy += s.singular_values[j] * s.singular_values[j];
    rep.tail_energy *= k_inv;

    Matrix top(a.rows, r);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < r; ++j) top(i, j) = s.left_basis(i, j);
    rep.top_subspace_residual = mean_projection_residual(a, top);
    rep.top_subspace_attains =
        std::abs(rep.top_subspace_residual - rep.tail_energy) <= 1e-8 * (1.0 + rep.tail_energy);

    rep.min_random_residual = std::numeric_limits<double>::infinity();
    std::vector<double> residuals(trials);
    const std::int64_t n_trials = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(static)
    for (std::int64_t trial = 0; trial < n_trials; ++trial) {
        Rng trial_rng(hash_combine(seed, static_cast<std::uint64_t>(trial)));
        Matrix basis = random_subspace(a.rows, r, trial_rng);
        residuals[static_cast<std::size_t>(trial)] = mean_projection_residual(a, basis);
    }
    for (double res : residuals) {
        rep.min_random_residual = std::min(rep.min_random_residual, res);
        if (res < rep.tail_energy - 1e-8 * (1.0 + rep.tail_energy)) ++rep.violations;
    }
    return rep;
}

SpectralReport spectral_report(const DisplacementMatrix& dm) {
    if (frobenius_norm(dm.a) == 0.0) throw InvalidInput("spectral_report: zero matrix");
    const SvdResult s = svd(dm.a);

    SpectralReport rep;
    rep.singular_values = s.singular_values;
    rep.numerical_rank = numerical_rank(s.singular_values);

    double total = 0.0;
    for (double sv : s.singular_values) total += sv * sv;
    rep.cumulative_energy.resize(s.singular_values.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < s.singular_values.size(); ++k) {
        acc += s.singular_values[k] * s.singular_values[k];
        rep.cumulative_energy[k] = acc / total;
    }

    auto effective_rank = [&](double threshold) {
        for (std::size_t k = 0; k < rep.cumulative_energy.size(); ++k) {
            if (rep.cumulative_energy[k] >= threshold) return k + 1;
        }
        return rep.cumulative_energy.size();
    };
    rep.effective_rank_90 = effective_rank(0.90);
    rep.effective_rank_95 = effective_rank(0.95);
    rep.effective_rank_99 = effective_rank(0.99);
    return rep;
}

void write_spectral_csv(const SpectralReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "k,sigma_k,cumulative_energy\n";
    out.precision(17);
    for (std::size_t k = 0; k < rep.singular_values.size(); ++k) {
        out << (k + 1) << ',' << rep.singular_values[k] << ',' << rep.cumulative_energy[k]
            << '\n';
    }
}

}  // namespace btm
