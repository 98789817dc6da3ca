#pragma once

#include <cstddef>

#include "btm/linalg.hpp"
#include "btm/rng.hpp"

namespace btm {

// Single-hidden-layer MLP: input -> ReLU(hidden) -> sigmoid logit,
// trained with mean binary cross-entropy over hard {0,1} labels.
struct MlpConfig {
    std::size_t input_dim = 1;
    std::size_t hidden_units = 1;
    double dropout_rate = 0.0;  // teacher training only; 0 keeps replay deterministic

    // Flat layout: W1 (h x d, row-major), b1 (h), w2 (h), b2 (1).
    std::size_t param_count() const {
        return hidden_units * input_dim + hidden_units + hidden_units + 1;
    }
};

struct Batch {
    Matrix x;  // b x d
    Vector y;  // b labels, each exactly 0 or 1
};

void validate_batch(const MlpConfig& cfg, const Batch& batch);

// Offsets of each block inside the flat parameter vector.
struct ParamLayout {
    std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;
    explicit ParamLayout(const MlpConfig& cfg)
        : w1(0),
          b1(cfg.hidden_units * cfg.input_dim),
          w2(b1 + cfg.hidden_units),
          b2(w2 + cfg.hidden_units),
          total(b2 + 1) {}
};

Vector flatten(const Matrix& w1, const Vector& b1, const Vector& w2, double b2);
void unflatten(const MlpConfig& cfg, const Vector& theta,
               Matrix& w1, Vector& b1, Vector& w2, double& b2);

// Uniform init in +-1/sqrt(fan_in) for the weight blocks, zero biases.
Vector init_params(const MlpConfig& cfg, Rng& rng);

// Sigmoid probabilities for every row of x (logits clamped to +-30).
Vector predict(const MlpConfig& cfg, const Vector& theta, const Matrix& x);

double loss(const MlpConfig& cfg, const Vector& theta, const Batch& batch);
Vector grad_params(const MlpConfig& cfg, const Vector& theta, const Batch& batch);
Matrix grad_inputs(const MlpConfig& cfg, const Vector& theta, const Batch& batch);

// Fused loss + parameter gradient (the training hot path). When
// dropout_scaled_mask is non-null it multiplies the hidden activations;
// entries are 0 or 1/(1-rate) (inverted dropout).
double loss_and_grad(const MlpConfig& cfg, const Vector& theta, const Batch& batch,
                     Vector& grad_out, const Matrix* dropout_scaled_mask = nullptr);

// d/dx of <grad_theta loss(theta; x, y), v> via the symmetric parameter-shift
// rule: (grad_inputs(theta + eps*vhat) - grad_inputs(theta - eps*vhat)) * |v| / (2 eps)
// with eps = 1e-4 * (1 + |theta|) / (1 + |vhat|). A zero v returns a zero
// matrix rather than an error.
Matrix mixed_grad(const MlpConfig& cfg, const Vector& theta, const Batch& batch,
                  const Vector& v);

// The same shift rule over an arbitrary input-gradient map; lets tests drive
// it with closed-form models.
template <typename GradInputsFn>
Matrix mixed_grad_parameter_shift(const Vector& theta, const Vector& v, GradInputsFn&& gi) {
    const double v_norm = norm(v);
    Matrix probe = gi(theta);
    if (v_norm == 0.0) return Matrix(probe.rows, probe.cols, 0.0);
    const Vector vhat = scaled(v, 1.0 / v_norm);
    const double eps = 1e-4 * (1.0 + norm(theta)) / (1.0 + norm(vhat));
    Vector plus = theta, minus = theta;
    axpy(eps, vhat, plus);
    axpy(-eps, vhat, minus);
    Matrix gp = gi(plus);
    Matrix gm = gi(minus);
    const double scale = v_norm / (2.0 * eps);
    Matrix out(gp.rows, gp.cols);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = (gp.data[i] - gm.data[i]) * scale;
    return out;
}

}  // namespace btm
