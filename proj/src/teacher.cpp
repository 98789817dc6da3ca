#include "btm/teacher.hpp"

#include <cmath>

#include "btm/io.hpp"
#include "btm/rng.hpp"

namespace btm {

namespace {

constexpr std::uint64_t kInitSalt = 0x7465616368657230ULL;
constexpr std::uint64_t kDropoutSalt = 0x64726f706f757431ULL;

Batch gather_batch(const Batch& data, const std::vector<std::size_t>& order,
                   std::size_t begin, std::size_t end) {
    const std::size_t d = data.x.cols;
    Batch b;
    b.x = Matrix(end - begin, d);
    b.y.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        const std::size_t src = order[i];
        const double* row = data.x.row_ptr(src);
        std::copy(row, row + d, b.x.row_ptr(i - begin));
        b.y[i - begin] = data.y[src];
    }
    return b;
}

Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng& rng) {
    Matrix m(rows, cols);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& v : m.data) v = rng.uniform() < rate ? 0.0 : keep_scale;
    return m;
}

}  // namespace

Trajectory train_teacher(const Batch& data, const TeacherConfig& cfg,
                         const MlpConfig& model_cfg) {
    validate_batch(model_cfg, data);
    if (!(cfg.lr > 0.0)) throw InvalidInput("teacher: lr must be positive");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
        throw InvalidInput("teacher: momentum must be in [0, 1)");
    if (cfg.batch_size == 0) throw InvalidInput("teacher: batch_size must be positive");

    const std::size_t n = data.x.rows;
    const std::size_t batch = std::min(cfg.batch_size, n);

    Rng init_rng(hash_combine(cfg.seed, kInitSalt));
    Vector theta = init_params(model_cfg, init_rng);

    Trajectory traj;
    traj.seed = cfg.seed;
    traj.checkpoints.push_back(theta);

    Vector velocity(theta.size(), 0.0);
    Vector grad;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(hash_combine(cfg.seed, epoch));
        std::vector<std::size_t> order = shuffle_rng.permutation(n);
        Rng drop_rng(hash_combine(hash_combine(cfg.seed, kDropoutSalt), epoch));

        for (std::size_t begin = 0; begin < n; begin += batch) {
            const std::size_t end = std::min(begin + batch, n);
            Batch mb = gather_batch(data, order, begin, end);
            double step_loss;
            if (cfg.dropout_rate > 0.0) {
                Matrix mask = dropout_mask(mb.x.rows, model_cfg.hidden_units,
                                           cfg.dropout_rate, drop_rng);
                step_loss = loss_and_grad(model_cfg, theta, mb, grad, &mask);
            } else {
                step_loss = loss_and_grad(model_cfg, theta, mb, grad);
            }
            if (!std::isfinite(step_loss)) throw TrainingDiverged("teacher: non-finite loss", epoch);
            for (std::size_t i = 0; i < theta.size(); ++i) {
                velocity[i] = cfg.momentum * velocity[i] - cfg.lr * grad[i];
                theta[i] += velocity[i];
            }
        }
        if (!all_finite(theta)) throw TrainingDiverged("teacher: non-finite parameters", epoch);
        traj.checkpoints.push_back(theta);
    }

    traj.final_train_loss = loss(model_cfg, theta, data);
    return traj;
}

void save_trajectory(const Trajectory& t, const std::string& path) {
    if (t.checkpoints.empty()) throw InvalidInput("save_trajectory: no checkpoints");
    const std::size_t p = t.dim();
    io::BinaryWriter w(path);
    w.write_bytes("BTMT", 4);
    w.write_u32(1);
    w.write_u64(t.epochs());
    w.write_u64(p);
    for (std::size_t e = 0; e < t.checkpoints.size(); ++e) {
        if (t.checkpoints[e].size() != p)
            throw DimError("save_trajectory: checkpoint dimension mismatch");
        w.write_u64(e);
        w.write_f64_array(t.checkpoints[e].data(), p);
    }
}

Trajectory load_trajectory(const std::string& path) {
    io::BinaryReader r(path);
    char magic[4];
    r.read_bytes(magic, 4, "magic");
    if (std::string(magic, 4) != "BTMT") throw FormatError("bad magic in " + path, 0);
    const std::uint32_t version = r.read_u32("version");
    if (version != 1) throw FormatError("unsupported trajectory version", 4);
    const std::uint64_t epochs = r.read_u64("epoch count");
    const std::uint64_t p = r.read_u64("parameter count");

    Trajectory t;
    t.checkpoints.resize(epochs + 1);
    for (std::uint64_t e = 0; e <= epochs; ++e) {
        const std::size_t index_offset = r.offset();
        const std::uint64_t idx = r.read_u64("checkpoint index");
        if (idx != e) throw FormatError("checkpoint index out of order", index_offset);
        t.checkpoints[e].resize(p);
        r.read_f64_array(t.checkpoints[e].data(), p, "checkpoint data");
    }
    if (!r.at_eof()) throw FormatError("trailing bytes after trajectory", r.offset());
    return t;
}

StorageReport storage_report(std::size_t num_trajectories, std::size_t epochs, std::size_t p) {
    if (num_trajectories < 1 || epochs < 1 || p < 1)
        throw InvalidInput("storage_report: all arguments must be >= 1");
    StorageReport rep;
    rep.sgd_vectors = (epochs + 1) * num_trajectories;
    rep.bezier_vectors = 3 * num_trajectories;
    rep.ratio = static_cast<double>(epochs + 1) / 3.0;
    rep.sgd_bytes = rep.sgd_vectors * p * sizeof(double);
    rep.bezier_bytes = rep.bezier_vectors * p * sizeof(double);
    return rep;
}

}  // namespace btm
