#include "btm/model.hpp"

#include <algorithm>
#include <cmath>

#include "btm/errors.hpp"
#include "btm/kernels.hpp"

namespace btm {

namespace {

constexpr double kLogitClamp = 30.0;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Stable BCE from the (already clamped) logit.
double bce_from_logit(double z, double y) {
    return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

struct ForwardState {
    Matrix z1;      // b x h pre-activations
    Matrix a1;      // b x h activations (after optional dropout)
    Vector logit;   // b raw logits
    double loss = 0.0;
};

ForwardState forward(const MlpConfig& cfg, const Vector& theta, const Batch& batch,
                     const Matrix* mask) {
    const ParamLayout lay(cfg);
    const std::size_t b = batch.x.rows;
    const std::size_t d = cfg.input_dim;
    const std::size_t h = cfg.hidden_units;

    ForwardState st;
    st.z1 = Matrix(b, h);
    kernels::gemm_nt(batch.x.data.data(), theta.data() + lay.w1, st.z1.data.data(), b, d, h);
    for (std::size_t i = 0; i < b; ++i) {
        double* zi = st.z1.row_ptr(i);
        for (std::size_t j = 0; j < h; ++j) zi[j] += theta[lay.b1 + j];
    }

    st.a1 = st.z1;
    for (double& v : st.a1.data) v = v > 0.0 ? v : 0.0;  // ReLU, subgradient 0 at 0
    if (mask != nullptr) {
        for (std::size_t i = 0; i < st.a1.data.size(); ++i) st.a1.data[i] *= mask->data[i];
    }

    st.logit.resize(b);
    double total = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        const double* ai = st.a1.row_ptr(i);
        double z = theta[lay.b2];
        for (std::size_t j = 0; j < h; ++j) z += ai[j] * theta[lay.w2 + j];
        st.logit[i] = z;
        const double zc = std::clamp(z, -kLogitClamp, kLogitClamp);
        total += bce_from_logit(zc, batch.y[i]);
    }
    st.loss = total / static_cast<double>(b);
    return st;
}

// dloss/dlogit per sample, including the 1/b mean factor. The clamp has
// zero derivative outside [-30, 30].
Vector logit_grad(const ForwardState& st, const Batch& batch) {
    const std::size_t b = batch.y.size();
    Vector dz(b);
    for (std::size_t i = 0; i < b; ++i) {
        const double z = st.logit[i];
        if (z < -kLogitClamp || z > kLogitClamp) {
            dz[i] = 0.0;
        } else {
            dz[i] = (sigmoid(z) - batch.y[i]) / static_cast<double>(b);
        }
    }
    return dz;
}

}  // namespace

void validate_batch(const MlpConfig& cfg, const Batch& batch) {
    if (batch.x.rows == 0) throw InvalidInput("batch: empty");
    if (batch.x.cols != cfg.input_dim) throw DimError("batch: feature dimension mismatch");
    if (batch.y.size() != batch.x.rows) throw DimError("batch: label count mismatch");
    if (!all_finite(batch.x)) throw InvalidInput("batch: non-finite features");
    for (double y : batch.y) {
        if (y != 0.0 && y != 1.0) throw InvalidInput("batch: labels must be exactly 0 or 1");
    }
}

Vector flatten(const Matrix& w1, const Vector& b1, const Vector& w2, double b2) {
    Vector theta;
    theta.reserve(w1.data.size() + b1.size() + w2.size() + 1);
    theta.insert(theta.end(), w1.data.begin(), w1.data.end());
    theta.insert(theta.end(), b1.begin(), b1.end());
    theta.insert(theta.end(), w2.begin(), w2.end());
    theta.push_back(b2);
    return theta;
}

void unflatten(const MlpConfig& cfg, const Vector& theta,
               Matrix& w1, Vector& b1, Vector& w2, double& b2) {
    const ParamLayout lay(cfg);
    if (theta.size() != lay.total) throw DimError("unflatten: parameter count mismatch");
    w1 = Matrix(cfg.hidden_units, cfg.input_dim);
    std::copy(theta.begin(), theta.begin() + lay.b1, w1.data.begin());
    b1.assign(theta.begin() + lay.b1, theta.begin() + lay.w2);
    w2.assign(theta.begin() + lay.w2, theta.begin() + lay.b2);
    b2 = theta[lay.b2];
}

Vector init_params(const MlpConfig& cfg, Rng& rng) {
    const ParamLayout lay(cfg);
    Vector theta(lay.total, 0.0);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(cfg.input_dim));
    for (std::size_t i = 0; i < lay.b1; ++i) theta[i] = rng.uniform(-s1, s1);
    const double s2 = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_units));
    for (std::size_t i = lay.w2; i < lay.b2; ++i) theta[i] = rng.uniform(-s2, s2);
    return theta;
}

Vector predict(const MlpConfig& cfg, const Vector& theta, const Matrix& x) {
    Batch tmp{x, Vector(x.rows, 0.0)};
    ForwardState st = forward(cfg, theta, tmp, nullptr);
    Vector p(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
        p[i] = sigmoid(std::clamp(st.logit[i], -kLogitClamp, kLogitClamp));
    return p;
}

double loss(const MlpConfig& cfg, const Vector& theta, const Batch& batch) {
    validate_batch(cfg, batch);
    if (theta.size() != cfg.param_count()) throw DimError("loss: parameter count mismatch");
    return forward(cfg, theta, batch, nullptr).loss;
}

double loss_and_grad(const MlpConfig& cfg, const Vector& theta, const Batch& batch,
                     Vector& grad_out, const Matrix* dropout_scaled_mask) {
    const ParamLayout lay(cfg);
    const std::size_t b = batch.x.rows;
    const std::size_t d = cfg.input_dim;
    const std::size_t h = cfg.hidden_units;

    ForwardState st = forward(cfg, theta, batch, dropout_scaled_mask);
    Vector dz2 = logit_grad(st, batch);

    grad_out.assign(lay.total, 0.0);

    // w2, b2
    for (std::size_t i = 0; i < b; ++i) {
        const double* ai = st.a1.row_ptr(i);
        for (std::size_t j = 0; j < h; ++j) grad_out[lay.w2 + j] += dz2[i] * ai[j];
        grad_out[lay.b2] += dz2[i];
    }

    // Backprop into the hidden layer.
    Matrix dz1(b, h);
    for (std::size_t i = 0; i < b; ++i) {
        const double* z1i = st.z1.row_ptr(i);
        double* di = dz1.row_ptr(i);
        for (std::size_t j = 0; j < h; ++j) {
            double g = dz2[i] * theta[lay.w2 + j];
            if (dropout_scaled_mask != nullptr) g *= (*dropout_scaled_mask)(i, j);
            di[j] = z1i[j] > 0.0 ? g : 0.0;
        }
    }

    // W1 = dz1^T * x, b1 = column sums of dz1
    kernels::gemm_tn(dz1.data.data(), batch.x.data.data(), grad_out.data() + lay.w1, h, b, d);
    for (std::size_t i = 0; i < b; ++i) {
        const double* di = dz1.row_ptr(i);
        for (std::size_t j = 0; j < h; ++j) grad_out[lay.b1 + j] += di[j];
    }
    return st.loss;
}

Vector grad_params(const MlpConfig& cfg, const Vector& theta, const Batch& batch) {
    validate_batch(cfg, batch);
    if (theta.size() != cfg.param_count()) throw DimError("grad_params: parameter count mismatch");
    Vector g;
    loss_and_grad(cfg, theta, batch, g);
    return g;
}

Matrix grad_inputs(const MlpConfig& cfg, const Vector& theta, const Batch& batch) {
    validate_batch(cfg, batch);
    if (theta.size() != cfg.param_count()) throw DimError("grad_inputs: parameter count mismatch");
    const ParamLayout lay(cfg);
    const std::size_t b = batch.x.rows;
    const std::size_t h = cfg.hidden_units;

    ForwardState st = forward(cfg, theta, batch, nullptr);
    Vector dz2 = logit_grad(st, batch);

    Matrix dz1(b, h);
    for (std::size_t i = 0; i < b; ++i) {
        const double* z1i = st.z1.row_ptr(i);
        double* di = dz1.row_ptr(i);
        for (std::size_t j = 0; j < h; ++j)
            di[j] = z1i[j] > 0.0 ? dz2[i] * theta[lay.w2 + j] : 0.0;
    }

    // dx = dz1 * W1
    Matrix gx(b, cfg.input_dim);
    kernels::gemm_nn(dz1.data.data(), theta.data() + lay.w1, gx.data.data(),
                     b, h, cfg.input_dim);
    return gx;
}

Matrix mixed_grad(const MlpConfig& cfg, const Vector& theta, const Batch& batch,
                  const Vector& v) {
    validate_batch(cfg, batch);
    if (theta.size() != cfg.param_count()) throw DimError("mixed_grad: parameter count mismatch");
    if (v.size() != theta.size()) throw DimError("mixed_grad: direction dimension mismatch");
    if (!all_finite(v)) throw InvalidInput("mixed_grad: non-finite direction");
    return mixed_grad_parameter_shift(
        theta, v, [&](const Vector& params) { return grad_inputs(cfg, params, batch); });
}

}  // namespace btm
