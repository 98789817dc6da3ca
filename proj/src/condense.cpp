#include "btm/condense.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace btm {

namespace {

constexpr std::uint64_t kInitSalt = 0x73796e7468696e69ULL;
constexpr std::uint64_t kSegmentSalt = 0x7365676d656e7400ULL;
constexpr std::uint64_t kUnrollSalt = 0x756e726f6c6c0000ULL;
constexpr std::uint64_t kEvalSalt = 0x6576616c00000000ULL;

Batch gather_rows(const SyntheticDataset& synth, const std::vector<std::size_t>& idx) {
    Batch b;
    b.x = Matrix(idx.size(), synth.x.cols);
    b.y.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* row = synth.x.row_ptr(idx[i]);
        std::copy(row, row + synth.x.cols, b.x.row_ptr(i));
        b.y[i] = synth.y[idx[i]];
    }
    return b;
}

}  // namespace

UnrollResult student_unroll(const Vector& theta_start, const SyntheticDataset& synth,
                            std::size_t n_steps, double eta_s, std::uint64_t seed,
                            const MlpConfig& model_cfg, std::size_t batch_size) {
    if (synth.size() == 0) throw InvalidInput("student_unroll: empty synthetic dataset");
    if (theta_start.size() != model_cfg.param_count())
        throw DimError("student_unroll: parameter count mismatch");

    const std::size_t n = synth.size();
    const std::size_t batch = std::min(batch_size == 0 ? n : batch_size, n);

    UnrollResult out;
    out.eta_s = eta_s;
    out.thetas.reserve(n_steps);
    out.gradients.reserve(n_steps);
    out.batch_indices.reserve(n_steps);

    Rng rng(seed);
    std::vector<std::size_t> order = rng.permutation(n);
    std::size_t cursor = 0;

    Vector theta = theta_start;
    Vector grad;
    for (std::size_t step = 0; step < n_steps; ++step) {
        if (cursor >= n) {  // pass exhausted; reshuffle
            order = rng.permutation(n);
            cursor = 0;
        }
        // A short batch at the end of a pass keeps sampling without
        // replacement; batches never straddle passes.
        const std::size_t end = std::min(cursor + batch, n);
        std::vector<std::size_t> idx(order.begin() + cursor, order.begin() + end);
        cursor = end;

        Batch mb = gather_rows(synth, idx);
        const double step_loss = loss_and_grad(model_cfg, theta, mb, grad);
        if (!std::isfinite(step_loss) || !all_finite(grad))
            throw NumericalError("student_unroll: non-finite update at step " +
                                 std::to_string(step));

        out.thetas.push_back(theta);
        out.gradients.push_back(grad);
        out.batch_indices.push_back(std::move(idx));
        axpy(-eta_s, grad, theta);
    }
    out.theta_end = std::move(theta);
    return out;
}

std::pair<double, double> sample_segment(Rng& rng, double dt) {
    if (!(dt > 0.0 && dt <= 1.0)) throw DomainError("sample_segment: dt outside (0, 1]");
    const double ts = rng.uniform(0.0, 1.0 - dt);
    return {ts, ts + dt};
}

std::pair<double, double> sample_segment_free(Rng& rng) {
    double a, b;
    do {
        a = rng.uniform();
        b = rng.uniform();
    } while (a == b);
    return {std::min(a, b), std::max(a, b)};
}

double btm_loss(const Vector& theta_hat, const Vector& theta_s, const Vector& theta_e) {
    const double denom = norm_sq(sub(theta_s, theta_e));
    if (denom == 0.0) throw DegenerateSegment("btm_loss: coincident segment endpoints");
    return norm_sq(sub(theta_hat, theta_e)) / denom;
}

Vector matching_loss_gradient(const Vector& theta_hat, const Vector& theta_s,
                              const Vector& theta_e) {
    const double denom = norm_sq(sub(theta_s, theta_e));
    if (denom == 0.0) throw DegenerateSegment("matching_loss_gradient: coincident endpoints");
    return scaled(sub(theta_hat, theta_e), 2.0 / denom);
}

Matrix meta_gradient(const UnrollResult& unroll, const Vector& theta_e, const Vector& theta_s,
                     const SyntheticDataset& synth, const MlpConfig& model_cfg) {
    if (unroll.thetas.size() != unroll.gradients.size() ||
        unroll.thetas.size() != unroll.batch_indices.size())
        throw InvalidInput("meta_gradient: incomplete unroll trace");

    const Vector g_l = matching_loss_gradient(unroll.theta_end, theta_s, theta_e);

    Matrix grad_x(synth.size(), synth.x.cols, 0.0);
    for (std::size_t step = 0; step < unroll.thetas.size(); ++step) {
        const std::vector<std::size_t>& idx = unroll.batch_indices[step];
        Batch mb = gather_rows(synth, idx);
        // mixed_grad carries the 1/|B_n| mean factor of the batch loss.
        Matrix mg = mixed_grad(model_cfg, unroll.thetas[step], mb, g_l);
        for (std::size_t j = 0; j < idx.size(); ++j) {
            double* dst = grad_x.row_ptr(idx[j]);
            const double* src = mg.row_ptr(j);
            for (std::size_t c = 0; c < grad_x.cols; ++c) dst[c] += -unroll.eta_s * src[c];
        }
    }
    return grad_x;
}

SyntheticDataset init_synthetic(const Dataset& real, std::size_t ipc, InitMode mode,
                                std::uint64_t seed) {
    if (ipc == 0) throw InvalidInput("init_synthetic: ipc must be positive");
    const Batch train = real.split_batch(Split::train);
    const std::size_t d = train.x.cols;

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < train.x.rows; ++i) {
        (train.y[i] == 1.0 ? pos : neg).push_back(i);
    }

    SyntheticDataset synth;
    synth.ipc = ipc;
    synth.init_mode = mode;
    synth.x = Matrix(2 * ipc, d);
    synth.y.resize(2 * ipc);
    for (std::size_t i = 0; i < ipc; ++i) synth.y[i] = 1.0;
    for (std::size_t i = ipc; i < 2 * ipc; ++i) synth.y[i] = 0.0;

    Rng rng(hash_combine(seed, kInitSalt));
    if (mode == InitMode::real) {
        if (pos.size() < ipc || neg.size() < ipc)
            throw InvalidSpec("init_synthetic: train split has fewer than ipc samples per class");
        rng.shuffle(pos);
        rng.shuffle(neg);
        for (std::size_t i = 0; i < ipc; ++i) {
            const double* src = train.x.row_ptr(pos[i]);
            std::copy(src, src + d, synth.x.row_ptr(i));
        }
        for (std::size_t i = 0; i < ipc; ++i) {
            const double* src = train.x.row_ptr(neg[i]);
            std::copy(src, src + d, synth.x.row_ptr(ipc + i));
        }
        return synth;
    }

    // Per-class, per-feature moment-matched Gaussians.
    for (int cls = 1; cls >= 0; --cls) {
        const std::vector<std::size_t>& members = cls == 1 ? pos : neg;
        if (members.empty()) throw InvalidSpec("init_synthetic: class missing from train split");
        Vector mean(d, 0.0), var(d, 0.0);
        for (std::size_t i : members) {
            for (std::size_t j = 0; j < d; ++j) mean[j] += train.x(i, j);
        }
        for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(members.size());
        for (std::size_t i : members) {
            for (std::size_t j = 0; j < d; ++j) {
                const double dev = train.x(i, j) - mean[j];
                var[j] += dev * dev;
            }
        }
        const std::size_t row0 = cls == 1 ? 0 : ipc;
        for (std::size_t j = 0; j < d; ++j)
            var[j] = std::sqrt(var[j] / static_cast<double>(members.size()));
        for (std::size_t i = 0; i < ipc; ++i) {
            double* row = synth.x.row_ptr(row0 + i);
            for (std::size_t j = 0; j < d; ++j) row[j] = rng.normal(mean[j], var[j]);
        }
    }
    return synth;
}

namespace {

struct SegmentDraw {
    std::size_t source_id = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    Vector theta_s;
    Vector theta_e;
};

SegmentDraw draw_segment(const Supervision& sup, const CondenseConfig& cfg, Rng& rng) {
    SegmentDraw out;
    if (cfg.method == Method::mtt) {
        if (sup.trajectories.empty()) throw InvalidInput("condense: mtt needs trajectories");
        out.source_id = static_cast<std::size_t>(rng.uniform_index(sup.trajectories.size()));
        const Trajectory& traj = sup.trajectories[out.source_id];
        const std::size_t m = cfg.mtt_segment_epochs;
        if (traj.epochs() < m) throw InvalidInput("condense: trajectory shorter than segment");
        const std::size_t s = static_cast<std::size_t>(rng.uniform_index(traj.epochs() - m + 1));
        out.t_start = static_cast<double>(s);
        out.t_end = static_cast<double>(s + m);
        out.theta_s = traj.checkpoints[s];
        out.theta_e = traj.checkpoints[s + m];
        return out;
    }

    if (sup.surrogates.empty()) throw InvalidInput("condense: surrogate methods need surrogates");
    // Resample on (numerically) coincident endpoints; Eq. (17) needs a
    // nonzero denominator.
    for (int attempt = 0; attempt < 100; ++attempt) {
        out.source_id = static_cast<std::size_t>(rng.uniform_index(sup.surrogates.size()));
        const BezierSurrogate& sur = sup.surrogates[out.source_id];
        const auto [ts, te] =
            cfg.free_pair ? sample_segment_free(rng) : sample_segment(rng, cfg.segment_dt);
        out.t_start = ts;
        out.t_end = te;
        out.theta_s = eval_curve(sur, ts);
        out.theta_e = eval_curve(sur, te);
        if (norm(sub(out.theta_s, out.theta_e)) >= 1e-12 * (1.0 + norm(out.theta_s))) return out;
    }
    throw DegenerateSegment("condense: could not draw a non-degenerate segment");
}

// Validation AUPRC averaged over a few fresh models; a single from-scratch
// model is too noisy to drive checkpoint selection at desk scale.
double eval_val_auprc(const SyntheticDataset& synth, const Batch& val,
                      const MlpConfig& model_cfg, const EvalConfig& eval_cfg,
                      std::size_t n_models, std::uint64_t seed) {
    double total = 0.0;
    std::size_t valid = 0;
    for (std::size_t m = 0; m < n_models; ++m) {
        bool diverged = false;
        Vector theta = train_eval_model(synth.as_batch(), model_cfg, eval_cfg,
                                        hash_combine(seed, m), diverged);
        if (diverged) continue;
        total += auprc(predict(model_cfg, theta, val.x), val.y);
        ++valid;
    }
    return valid == 0 ? -1.0 : total / static_cast<double>(valid);
}

}  // namespace

SyntheticDataset condense(const Dataset& real, const Supervision& supervision,
                          const CondenseConfig& cfg, const MlpConfig& model_cfg,
                          CondenseTrace& trace) {
    if (cfg.method != Method::mtt && supervision.surrogates.empty())
        throw InvalidInput("condense: supervision is empty");
    if (cfg.method == Method::mtt && supervision.trajectories.empty())
        throw InvalidInput("condense: supervision is empty");
    if (cfg.method != Method::mtt && !(cfg.segment_dt > 0.0 && cfg.segment_dt <= 1.0))
        throw InvalidInput("condense: segment_dt outside (0, 1]");

    trace = CondenseTrace{};
    SyntheticDataset synth = init_synthetic(real, cfg.ipc, cfg.init_mode, cfg.seed);
    const Batch val = real.split_batch(Split::val);

    const std::size_t n_steps =
        cfg.method == Method::mtt ? cfg.mtt_inner_steps : cfg.inner_steps;
    const std::size_t batch = cfg.resolved_batch_size();

    // Best-so-far snapshot starts at the initialization.
    trace.best = synth;
    trace.best_val_auprc = eval_val_auprc(synth, val, model_cfg, cfg.eval_cfg, cfg.eval_models,
                                          hash_combine(cfg.seed, kEvalSalt));
    trace.best_iter = 0;

    Matrix velocity(synth.x.rows, synth.x.cols, 0.0);
    double eta_s = cfg.student_lr;
    double eta_s_velocity = 0.0;

    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        Rng rng(hash_combine(hash_combine(cfg.seed, kSegmentSalt), iter));
        SegmentDraw seg = draw_segment(supervision, cfg, rng);

        UnrollResult unroll;
        Matrix grad_x;
        double match;
        try {
            unroll = student_unroll(seg.theta_s, synth, n_steps, eta_s,
                                    hash_combine(hash_combine(cfg.seed, kUnrollSalt), iter),
                                    model_cfg, batch);
            match = btm_loss(unroll.theta_end, seg.theta_s, seg.theta_e);
            grad_x = meta_gradient(unroll, seg.theta_e, seg.theta_s, synth, model_cfg);
        } catch (const NumericalError& e) {
            trace.aborted = true;
            trace.abort_reason = e.what();
            throw;
        }

        double grad_norm_sq = 0.0;
        for (double g : grad_x.data) grad_norm_sq += g * g;

        for (std::size_t i = 0; i < velocity.data.size(); ++i) {
            velocity.data[i] = cfg.meta_momentum * velocity.data[i] + grad_x.data[i];
            synth.x.data[i] -= cfg.meta_lr * velocity.data[i];
        }
        if (!all_finite(synth.x)) {
            trace.aborted = true;
            trace.abort_reason = "non-finite synthetic inputs at iter " + std::to_string(iter);
            throw NumericalError(trace.abort_reason);
        }

        // eta_s is meta-optimized with the same first-order signal.
        const Vector g_l = matching_loss_gradient(unroll.theta_end, seg.theta_s, seg.theta_e);
        Vector grad_sum(g_l.size(), 0.0);
        for (const Vector& g : unroll.gradients) axpy(1.0, g, grad_sum);
        const double eta_grad = -dot(grad_sum, g_l);
        eta_s_velocity = cfg.student_lr_meta_momentum * eta_s_velocity + eta_grad;
        eta_s -= cfg.student_lr_meta_lr * eta_s_velocity;
        if (!(eta_s > 1e-8)) eta_s = 1e-8;  // keep the inner loop a descent step

        TraceRow row;
        row.iter = iter;
        row.source_id = seg.source_id;
        row.t_start = seg.t_start;
        row.t_end = seg.t_end;
        row.matching_loss = match;
        row.meta_grad_norm = std::sqrt(grad_norm_sq);
        row.student_lr = eta_s;
        if ((iter + 1) % cfg.eval_every == 0 || iter + 1 == cfg.max_iters) {
            const double score =
                eval_val_auprc(synth, val, model_cfg, cfg.eval_cfg, cfg.eval_models,
                               hash_combine(hash_combine(cfg.seed, kEvalSalt), iter + 1));
            row.eval_auprc = score;
            row.has_eval = true;
            if (score > trace.best_val_auprc) {
                trace.best_val_auprc = score;
                trace.best = synth;
                trace.best_iter = iter + 1;
            }
        }
        trace.rows.push_back(row);
    }
    return trace.best;
}

void write_trace_csv(const CondenseTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "iter,loss,grad_norm,eval_auprc\n";
    out.precision(17);
    for (const TraceRow& row : trace.rows) {
        out << row.iter << ',' << row.matching_loss << ',' << row.meta_grad_norm << ',';
        if (row.has_eval) out << row.eval_auprc;
        out << '\n';
    }
}

}  // namespace btm
