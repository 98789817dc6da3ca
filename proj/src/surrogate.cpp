#include "btm/surrogate.hpp"

#include <algorithm>
#include <cmath>

#include "btm/io.hpp"

namespace btm {

BezierSurrogate linear_surrogate(const Vector& theta0, const Vector& thetaT) {
    if (theta0.size() != thetaT.size()) throw DimError("linear_surrogate: endpoint mismatch");
    BezierSurrogate s;
    s.theta0 = theta0;
    s.thetaT = thetaT;
    s.control.resize(theta0.size());
    for (std::size_t i = 0; i < theta0.size(); ++i)
        s.control[i] = 0.5 * (theta0[i] + thetaT[i]);
    return s;
}

Vector eval_curve(const BezierSurrogate& s, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("eval_curve: t outside [0, 1]");
    if (t == 0.0) return s.theta0;
    if (t == 1.0) return s.thetaT;
    const double w0 = (1.0 - t) * (1.0 - t);
    const double wc = 2.0 * t * (1.0 - t);
    const double wT = t * t;
    Vector out(s.dim());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = w0 * s.theta0[i] + wc * s.control[i] + wT * s.thetaT[i];
    return out;
}

Vector segment_displacement(const BezierSurrogate& s, double t_start, double t_end) {
    if (!(t_start >= 0.0 && t_end <= 1.0 && t_start < t_end))
        throw DomainError("segment_displacement: need 0 <= t_start < t_end <= 1");
    const double dt = t_end - t_start;
    const double bend = dt * (1.0 - t_start - t_end);
    Vector out(s.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = dt * (s.thetaT[i] - s.theta0[i]) +
                 bend * (2.0 * s.control[i] - s.theta0[i] - s.thetaT[i]);
    }
    return out;
}

double curvature_kappa(const BezierSurrogate& s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.dim(); ++i) {
        const double v = s.theta0[i] - 2.0 * s.control[i] + s.thetaT[i];
        acc += v * v;
    }
    return 2.0 * std::sqrt(acc);
}

Vector interpolate_path(const std::vector<Vector>& points, double t) {
    if (points.empty()) throw InvalidInput("interpolate_path: empty path");
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("interpolate_path: t outside [0, 1]");
    if (points.size() == 1) return points.front();
    const double pos = t * static_cast<double>(points.size() - 1);
    const std::size_t lo = std::min(static_cast<std::size_t>(pos), points.size() - 2);
    const double frac = pos - static_cast<double>(lo);
    Vector out(points.front().size());
    const Vector& a = points[lo];
    const Vector& b = points[lo + 1];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + frac * (b[i] - a[i]);
    return out;
}

MlpPathLoss::MlpPathLoss(const MlpConfig& cfg, const Batch& data, std::size_t batch_size)
    : cfg_(cfg), data_(data), batch_size_(std::min(batch_size, data.x.rows)) {
    validate_batch(cfg, data);
}

double MlpPathLoss::full_loss(const Vector& theta) const { return loss(cfg_, theta, data_); }

double MlpPathLoss::sample_loss_grad(const Vector& theta, Rng& rng, Vector& grad_out) const {
    const std::size_t n = data_.x.rows;
    Batch mb;
    mb.x = Matrix(batch_size_, data_.x.cols);
    mb.y.resize(batch_size_);
    // Independent uniform draw per slot; the batch is fresh per t-sample.
    for (std::size_t i = 0; i < batch_size_; ++i) {
        const std::size_t src = static_cast<std::size_t>(rng.uniform_index(n));
        const double* row = data_.x.row_ptr(src);
        std::copy(row, row + data_.x.cols, mb.x.row_ptr(i));
        mb.y[i] = data_.y[src];
    }
    return loss_and_grad(cfg_, theta, mb, grad_out);
}

double grid_mean_path_loss(const PathLoss& objective, const BezierSurrogate& s,
                           std::size_t grid_points) {
    if (grid_points < 2) throw InvalidInput("grid_mean_path_loss: need >= 2 grid points");
    double acc = 0.0;
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(grid_points - 1);
        acc += objective.full_loss(eval_curve(s, t));
    }
    return acc / static_cast<double>(grid_points);
}

ControlPointResult optimize_control_point(const Vector& theta0, const Vector& thetaT,
                                          const PathLoss& objective,
                                          const ControlPointOpts& opts) {
    if (theta0.size() != thetaT.size())
        throw DimError("optimize_control_point: endpoint dimension mismatch");

    BezierSurrogate s = linear_surrogate(theta0, thetaT);
    Rng rng(opts.seed);

    ControlPointResult res;
    res.start_grid_loss = grid_mean_path_loss(objective, s, opts.grid_points);

    Vector best_control = s.control;
    double best_grid_loss = res.start_grid_loss;

    Vector grad_phi(s.dim());
    Vector grad_theta;
    std::size_t iter = 0;
    for (; iter < opts.max_iters; ++iter) {
        std::fill(grad_phi.begin(), grad_phi.end(), 0.0);
        const double mc_weight = 1.0 / static_cast<double>(opts.mc_samples);
        for (std::size_t mc = 0; mc < opts.mc_samples; ++mc) {
            const double t = rng.uniform();
            const Vector theta_t = eval_curve(s, t);
            const double sample_loss = objective.sample_loss_grad(theta_t, rng, grad_theta);
            if (!std::isfinite(sample_loss))
                throw NumericalError("optimize_control_point: non-finite path loss");
            // d theta_t / d control = 2 t (1 - t)
            axpy(mc_weight * 2.0 * t * (1.0 - t), grad_theta, grad_phi);
        }
        if (!all_finite(grad_phi))
            throw NumericalError("optimize_control_point: non-finite gradient");
        if (norm(grad_phi) < opts.grad_tol) {
            res.reached_grad_tol = true;
            break;
        }
        axpy(-opts.lr, grad_phi, s.control);

        if ((iter + 1) % opts.grid_check_every == 0) {
            const double g = grid_mean_path_loss(objective, s, opts.grid_points);
            if (g < best_grid_loss) {
                best_grid_loss = g;
                best_control = s.control;
            }
        }
    }
    res.iterations = iter;

    // Keep the final iterate unless it breaks the end <= start contract on
    // the fixed grid; then fall back to the best accepted iterate (the
    // midpoint initialization is always a candidate).
    const double final_grid = grid_mean_path_loss(objective, s, opts.grid_points);
    if (final_grid <= res.start_grid_loss) {
        res.end_grid_loss = final_grid;
    } else {
        s.control = best_control;
        res.end_grid_loss = best_grid_loss;
    }
    res.surrogate = s;
    return res;
}

ControlPointResult optimize_control_point(const Vector& theta0, const Vector& thetaT,
                                          const Batch& data, const MlpConfig& model_cfg,
                                          const ControlPointOpts& opts) {
    if (data.x.rows == 0) throw InvalidInput("optimize_control_point: empty dataset");
    MlpPathLoss objective(model_cfg, data, opts.batch_size);
    return optimize_control_point(theta0, thetaT, objective, opts);
}

namespace {

Vector chord_point(const Vector& theta0, const Vector& thetaT, double t) {
    Vector c(theta0.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = (1.0 - t) * theta0[i] + t * thetaT[i];
    return c;
}

}  // namespace

ChordReport chord_report(const BezierSurrogate& s, const Trajectory& teacher,
                         std::size_t grid_points) {
    if (grid_points < 3) throw InvalidInput("chord_report: need >= 3 grid points");
    if (teacher.dim() != s.dim()) throw DimError("chord_report: trajectory dimension mismatch");

    ChordReport rep;
    rep.kappa = curvature_kappa(s);
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(grid_points - 1);
        const Vector c = chord_point(s.theta0, s.thetaT, t);
        const double dev = norm(sub(eval_curve(s, t), c));
        if (dev > rep.max_chord_deviation) {
            rep.max_chord_deviation = dev;
            rep.argmax_t = t;
        }
        const double teach_dev = norm(sub(interpolate_path(teacher.checkpoints, t), c));
        rep.teacher_deviation = std::max(rep.teacher_deviation, teach_dev);
    }
    return rep;
}

FidelityReport verify_fidelity_geometry(const BezierSurrogate& s, const Trajectory& teacher,
                                        const std::vector<Vector>& student_path,
                                        const MlpConfig* probe_cfg, const Matrix* probe_x,
                                        std::size_t grid_points) {
    if (student_path.empty()) throw InvalidInput("verify_fidelity_geometry: empty student path");
    if (teacher.dim() != s.dim() || student_path.front().size() != s.dim())
        throw DimError("verify_fidelity_geometry: path dimension mismatch");

    constexpr double kSlack = 1e-9;
    FidelityReport rep;
    rep.kappa = curvature_kappa(s);
    rep.chord_bound = rep.kappa / 8.0;

    for (std::size_t i = 0; i < grid_points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(grid_points - 1);
        const Vector phi = eval_curve(s, t);
        const Vector gamma = interpolate_path(teacher.checkpoints, t);
        const Vector stu = interpolate_path(student_path, t);
        const Vector c = chord_point(s.theta0, s.thetaT, t);
        rep.teacher_deviation = std::max(rep.teacher_deviation, norm(sub(gamma, c)));
        rep.sup_surrogate_teacher = std::max(rep.sup_surrogate_teacher, norm(sub(phi, gamma)));
        rep.eps_syn = std::max(rep.eps_syn, norm(sub(stu, phi)));
        rep.sup_student_teacher = std::max(rep.sup_student_teacher, norm(sub(stu, gamma)));

        if (probe_cfg != nullptr && probe_x != nullptr) {
            const Vector p_phi = predict(*probe_cfg, phi, *probe_x);
            const Vector p_gamma = predict(*probe_cfg, gamma, *probe_x);
            for (std::size_t k = 0; k < p_phi.size(); ++k) {
                rep.prediction_deviation =
                    std::max(rep.prediction_deviation, std::abs(p_phi[k] - p_gamma[k]));
            }
            rep.has_prediction_probe = true;
        }
    }

    rep.triangle_bound_holds =
        rep.sup_surrogate_teacher <= rep.chord_bound + rep.teacher_deviation + kSlack;
    rep.composite_bound_holds =
        rep.sup_student_teacher <=
        rep.eps_syn + rep.chord_bound + rep.teacher_deviation + kSlack;
    if (rep.has_prediction_probe && rep.sup_surrogate_teacher > 0.0)
        rep.prediction_ratio = rep.prediction_deviation / rep.sup_surrogate_teacher;
    return rep;
}

Vector curvature_profile(const Trajectory& teacher) {
    if (teacher.epochs() < 2) throw InvalidInput("curvature_profile: need T >= 2");
    Vector out(teacher.epochs() - 1);
    for (std::size_t tau = 1; tau < teacher.epochs(); ++tau) {
        double acc = 0.0;
        for (std::size_t i = 0; i < teacher.dim(); ++i) {
            const double h = teacher.checkpoints[tau + 1][i] - 2.0 * teacher.checkpoints[tau][i] +
                             teacher.checkpoints[tau - 1][i];
            acc += h * h;
        }
        out[tau - 1] = std::sqrt(acc);
    }
    return out;
}

void save_surrogate(const BezierSurrogate& s, const std::string& path) {
    if (s.control.size() != s.dim() || s.thetaT.size() != s.dim())
        throw DimError("save_surrogate: component dimension mismatch");
    io::BinaryWriter w(path);
    w.write_bytes("BTMB", 4);
    w.write_u32(1);
    w.write_u64(s.dim());
    w.write_f64_array(s.theta0.data(), s.dim());
    w.write_f64_array(s.control.data(), s.dim());
    w.write_f64_array(s.thetaT.data(), s.dim());
}

BezierSurrogate load_surrogate(const std::string& path) {
    io::BinaryReader r(path);
    char magic[4];
    r.read_bytes(magic, 4, "magic");
    if (std::string(magic, 4) != "BTMB") throw FormatError("bad magic in " + path, 0);
    if (r.read_u32("version") != 1) throw FormatError("unsupported surrogate version", 4);
    const std::uint64_t p = r.read_u64("parameter count");
    BezierSurrogate s;
    s.theta0.resize(p);
    s.control.resize(p);
    s.thetaT.resize(p);
    r.read_f64_array(s.theta0.data(), p, "theta0");
    r.read_f64_array(s.control.data(), p, "control point");
    r.read_f64_array(s.thetaT.data(), p, "thetaT");
    if (!r.at_eof()) throw FormatError("trailing bytes after surrogate", r.offset());
    return s;
}

}  // namespace btm
