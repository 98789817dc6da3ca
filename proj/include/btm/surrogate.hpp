#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "btm/model.hpp"
#include "btm/rng.hpp"
#include "btm/teacher.hpp"

namespace btm {

// Quadratic Bezier curve in parameter space:
//   Phi(t) = (1-t)^2 theta0 + 2t(1-t) control + t^2 thetaT
struct BezierSurrogate {
    Vector theta0;
    Vector control;
    Vector thetaT;

    std::size_t dim() const { return theta0.size(); }
};

// control = midpoint recovers the chord; used as the linear-path ablation.
BezierSurrogate linear_surrogate(const Vector& theta0, const Vector& thetaT);

Vector eval_curve(const BezierSurrogate& s, double t);

// Closed-form displacement
//   (te-ts)(thetaT-theta0) + (te-ts)(1-ts-te)(2 control - theta0 - thetaT),
// identical to eval_curve(te) - eval_curve(ts).
Vector segment_displacement(const BezierSurrogate& s, double t_start, double t_end);

// kappa = 2 |theta0 - 2 control + thetaT|, the constant |Phi''|.
double curvature_kappa(const BezierSurrogate& s);

// Index-uniform piecewise-linear interpolation of a checkpoint sequence,
// mapped affinely onto t in [0,1].
Vector interpolate_path(const std::vector<Vector>& points, double t);

// Loss landscape a curve is optimized against. full_loss is deterministic
// (whole dataset); sample_loss_grad may subsample and is what the Monte
// Carlo control-point steps consume.
class PathLoss {
  public:
    virtual ~PathLoss() = default;
    virtual double full_loss(const Vector& theta) const = 0;
    virtual double sample_loss_grad(const Vector& theta, Rng& rng, Vector& grad_out) const = 0;
};

class MlpPathLoss final : public PathLoss {
  public:
    MlpPathLoss(const MlpConfig& cfg, const Batch& data, std::size_t batch_size);
    double full_loss(const Vector& theta) const override;
    double sample_loss_grad(const Vector& theta, Rng& rng, Vector& grad_out) const override;

  private:
    MlpConfig cfg_;
    const Batch& data_;
    std::size_t batch_size_;
};

struct ControlPointOpts {
    double lr = 1e-2;
    double grad_tol = 1e-5;
    std::size_t max_iters = 300;
    std::size_t mc_samples = 5;
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;
    std::size_t grid_points = 21;       // fixed evaluation grid
    std::size_t grid_check_every = 25;  // best-iterate acceptance cadence
};

struct ControlPointResult {
    BezierSurrogate surrogate;
    double start_grid_loss = 0.0;  // midpoint initialisation, fixed grid
    double end_grid_loss = 0.0;    // returned control point, fixed grid
    std::size_t iterations = 0;
    bool reached_grad_tol = false;
};

// Algorithm: initialise control at the midpoint, then plain gradient descent
// on the Monte Carlo path loss with chain factor 2t(1-t). Returns the final
// iterate unless it scores worse than the initialization on the fixed grid,
// in which case the best accepted iterate is returned instead; either way
// end_grid_loss <= start_grid_loss.
ControlPointResult optimize_control_point(const Vector& theta0, const Vector& thetaT,
                                          const PathLoss& objective,
                                          const ControlPointOpts& opts);

ControlPointResult optimize_control_point(const Vector& theta0, const Vector& thetaT,
                                          const Batch& data, const MlpConfig& model_cfg,
                                          const ControlPointOpts& opts);

// Mean full-data loss of the curve over an evenly spaced t-grid.
double grid_mean_path_loss(const PathLoss& objective, const BezierSurrogate& s,
                           std::size_t grid_points);

struct ChordReport {
    double kappa = 0.0;
    double max_chord_deviation = 0.0;  // max_t |Phi(t) - c(t)|, equals kappa/8
    double argmax_t = 0.0;
    double teacher_deviation = 0.0;    // D = max_t |gamma(t) - c(t)|
};

ChordReport chord_report(const BezierSurrogate& s, const Trajectory& teacher,
                         std::size_t grid_points);

struct FidelityReport {
    double kappa = 0.0;
    double chord_bound = 0.0;            // kappa / 8
    double teacher_deviation = 0.0;      // D
    double sup_surrogate_teacher = 0.0;  // sup |Phi - gamma|
    bool triangle_bound_holds = false;   // sup |Phi - gamma| <= kappa/8 + D + 1e-9
    double eps_syn = 0.0;                // sup |gamma_stu - Phi|
    double sup_student_teacher = 0.0;    // sup |gamma_stu - gamma|
    bool composite_bound_holds = false;  // <= eps_syn + kappa/8 + D + 1e-9
    // Diagnostic only; the model Lipschitz constant is not certified.
    bool has_prediction_probe = false;
    double prediction_deviation = 0.0;   // sup_{x,t} |f_Phi(t)(x) - f_gamma(t)(x)|
    double prediction_ratio = 0.0;       // prediction_deviation / sup_surrogate_teacher
};

FidelityReport verify_fidelity_geometry(const BezierSurrogate& s, const Trajectory& teacher,
                                        const std::vector<Vector>& student_path,
                                        const MlpConfig* probe_cfg = nullptr,
                                        const Matrix* probe_x = nullptr,
                                        std::size_t grid_points = 1001);

// |theta_{tau+1} - 2 theta_tau + theta_{tau-1}| for tau = 1..T-1. The
// surrogate companion value is the constant kappa.
Vector curvature_profile(const Trajectory& teacher);

// Format "BTMB": magic, u32 version=1, u64 p, then theta0, control, thetaT
// as little-endian f64.
void save_surrogate(const BezierSurrogate& s, const std::string& path);
BezierSurrogate load_surrogate(const std::string& path);

}  // namespace btm
