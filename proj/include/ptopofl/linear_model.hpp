#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ptopofl/common.hpp"
#include "ptopofl/rng.hpp"

namespace ptopofl {

struct ModelParams {
    std::vector<double> weights;
    double bias = 0.0;

    ModelParams() = default;
    explicit ModelParams(int dim) : weights(static_cast<std::size_t>(dim), 0.0) {}

    int dim() const { return static_cast<int>(weights.size()); }

    // flat layout [w_1 .. w_d, b]
    std::vector<double> to_flat() const {
        std::vector<double> flat = weights;
        flat.push_back(bias);
        return flat;
    }

    static ModelParams from_flat(const std::vector<double>& flat) {
        if (flat.empty()) throw input_error("ModelParams: empty flat vector");
        ModelParams p;
        p.weights.assign(flat.begin(), flat.end() - 1);
        p.bias = flat.back();
        return p;
    }
};

struct LabeledDataset {
    int n = 0;
    int d = 0;
    std::vector<double> features; // n*d row-major
    std::vector<int> labels;      // n entries in {0,1}

    LabeledDataset() = default;
    LabeledDataset(int n_, int d_)
        : n(n_), d(d_), features(static_cast<std::size_t>(n_) * d_, 0.0), labels(static_cast<std::size_t>(n_), 0) {}

    double& x(int i, int j) { return features[static_cast<std::size_t>(i) * d + j]; }
    double x(int i, int j) const { return features[static_cast<std::size_t>(i) * d + j]; }
};

struct ControlVariate {
    std::vector<double> c_local;  // dim + 1 (bias slot last)
    std::vector<double> c_global; // same layout

    static ControlVariate zeros(int dim) {
        ControlVariate cv;
        cv.c_local.assign(static_cast<std::size_t>(dim) + 1, 0.0);
        cv.c_global.assign(static_cast<std::size_t>(dim) + 1, 0.0);
        return cv;
    }
};

struct TrainConfig {
    double learning_rate = 0.05;
    int local_epochs = 5;
    int batch_size = 32;
    double l2_reg = 1.0;       // 1/C; applied as l2_reg/(2n)*||w||^2, weights only
    double prox_mu = 0.1;      // FedProx proximal strength
    double pfedme_lambda = 15.0;
    int pfedme_inner_steps = 5;
    double pfedme_outer_lr = 0.05;

    void validate() const {
        if (!(learning_rate > 0.0)) throw config_error("TrainConfig: learning_rate must be > 0");
        if (local_epochs < 1) throw config_error("TrainConfig: local_epochs >= 1");
        if (batch_size < 1) throw config_error("TrainConfig: batch_size >= 1");
        if (l2_reg < 0.0) throw config_error("TrainConfig: l2_reg >= 0");
        if (prox_mu < 0.0) throw config_error("TrainConfig: prox_mu >= 0");
        if (pfedme_lambda < 0.0) throw config_error("TrainConfig: pfedme_lambda >= 0");
    }
};

enum class LocalMode { kPlain, kProx, kScaffold, kPfedme };

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline std::vector<double> predict_proba(const ModelParams& params, const LabeledDataset& data) {
    if (params.dim() != data.d) throw input_error("predict_proba: dimension mismatch");
    std::vector<double> out(static_cast<std::size_t>(data.n), 0.0);
    for (int i = 0; i < data.n; ++i) {
        double z = params.bias;
        for (int j = 0; j < data.d; ++j) z += params.weights[static_cast<std::size_t>(j)] * data.x(i, j);
        out[static_cast<std::size_t>(i)] = sigmoid(z);
    }
    return out;
}

// Mean binary cross-entropy over the given rows plus l2_reg/(2*n_effective) on
// the weights and, when prox_mu > 0, the proximal pull toward global_params.
// The gradient is the exact analytic gradient of the returned loss.
// n_effective defaults to the row count and lets minibatch steps keep the
// regularizer scaled by the full local dataset size.
inline std::pair<double, std::vector<double>> loss_and_gradient(
    const ModelParams& params, const LabeledDataset& data, const TrainConfig& cfg,
    const ModelParams* global_params = nullptr, int n_effective = -1) {
    if (params.dim() != data.d) throw input_error("loss_and_gradient: dimension mismatch");
    if (data.n < 1) throw input_error("loss_and_gradient: empty dataset");
    if (cfg.prox_mu > 0.0 && global_params == nullptr)
        throw config_error("loss_and_gradient: prox_mu > 0 requires global_params");
    const double n = static_cast<double>(data.n);
    const double n_eff = n_effective > 0 ? static_cast<double>(n_effective) : n;
    const int d = data.d;

    double loss = 0.0;
    std::vector<double> grad(static_cast<std::size_t>(d) + 1, 0.0); // [w..., b]
    for (int i = 0; i < data.n; ++i) {
        double z = params.bias;
        for (int j = 0; j < d; ++j) z += params.weights[static_cast<std::size_t>(j)] * data.x(i, j);
        const double y = static_cast<double>(data.labels[static_cast<std::size_t>(i)]);
        // numerically stable log(1+exp(-|z|)) form
        loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
        const double residual = sigmoid(z) - y;
        for (int j = 0; j < d; ++j) grad[static_cast<std::size_t>(j)] += residual * data.x(i, j);
        grad[static_cast<std::size_t>(d)] += residual;
    }
    loss /= n;
    for (auto& g : grad) g /= n;

    for (int j = 0; j < d; ++j) {
        const double w = params.weights[static_cast<std::size_t>(j)];
        loss += 0.5 * cfg.l2_reg * w * w / n_eff;
        grad[static_cast<std::size_t>(j)] += cfg.l2_reg * w / n_eff;
    }
    if (cfg.prox_mu > 0.0) {
        for (int j = 0; j < d; ++j) {
            const double diff = params.weights[static_cast<std::size_t>(j)] - global_params->weights[static_cast<std::size_t>(j)];
            loss += 0.5 * cfg.prox_mu * diff * diff;
            grad[static_cast<std::size_t>(j)] += cfg.prox_mu * diff;
        }
        const double diff_b = params.bias - global_params->bias;
        loss += 0.5 * cfg.prox_mu * diff_b * diff_b;
        grad[static_cast<std::size_t>(d)] += cfg.prox_mu * diff_b;
    }
    return {loss, grad};
}

struct LocalUpdateResult {
    ModelParams params;                      // plain/prox/scaffold model; pfedme omega iterate
    std::optional<ControlVariate> variates;  // scaffold only
    std::optional<ModelParams> personalized; // pfedme theta-hat
};

namespace detail {

inline LabeledDataset take_rows(const LabeledDataset& data, const std::vector<int>& rows, int lo, int hi) {
    LabeledDataset batch(hi - lo, data.d);
    for (int r = lo; r < hi; ++r) {
        const int src = rows[static_cast<std::size_t>(r)];
        for (int j = 0; j < data.d; ++j) batch.x(r - lo, j) = data.x(src, j);
        batch.labels[static_cast<std::size_t>(r - lo)] = data.labels[static_cast<std::size_t>(src)];
    }
    return batch;
}

inline void apply_step(ModelParams& p, const std::vector<double>& grad, double lr) {
    const int d = p.dim();
    for (int j = 0; j < d; ++j) p.weights[static_cast<std::size_t>(j)] -= lr * grad[static_cast<std::size_t>(j)];
    p.bias -= lr * grad[static_cast<std::size_t>(d)];
}

} // namespace detail

// One client-side update. plain/prox run local_epochs passes of seeded
// minibatch SGD; scaffold corrects each step with c_global - c_local and
// refreshes c_local by option II; pfedme solves the Moreau envelope inner
// problem with a few gradient steps per batch and moves the omega iterate.
inline LocalUpdateResult local_update(const ModelParams& start, const LabeledDataset& data,
                                      const TrainConfig& cfg, LocalMode mode,
                                      const ControlVariate* cv, Rng& rng,
                                      const ModelParams* global_params = nullptr) {
    cfg.validate();
    if (data.n < 1) throw input_error("local_update: empty dataset");
    if (mode == LocalMode::kScaffold && cv == nullptr)
        throw config_error("local_update: scaffold mode requires control variates");
    if (mode == LocalMode::kPfedme && !(cfg.pfedme_lambda > 0.0))
        throw config_error("local_update: pfedme mode requires pfedme_lambda > 0");

    const int d = data.d;
    TrainConfig step_cfg = cfg;
    if (mode != LocalMode::kProx) step_cfg.prox_mu = 0.0;
    const ModelParams* prox_anchor = (mode == LocalMode::kProx)
                                         ? (global_params != nullptr ? global_params : &start)
                                         : nullptr;

    std::vector<int> rows(static_cast<std::size_t>(data.n));
    for (int i = 0; i < data.n; ++i) rows[static_cast<std::size_t>(i)] = i;

    LocalUpdateResult out;

    if (mode == LocalMode::kPfedme) {
        ModelParams omega = start;
        ModelParams theta_hat = start;
        for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
            rng.shuffle(rows);
            for (int lo = 0; lo < data.n; lo += cfg.batch_size) {
                const int hi = std::min(lo + cfg.batch_size, data.n);
                const LabeledDataset batch = detail::take_rows(data, rows, lo, hi);
                ModelParams theta = omega;
                for (int s = 0; s < cfg.pfedme_inner_steps; ++s) {
                    auto [loss, grad] = loss_and_gradient(theta, batch, step_cfg, nullptr, data.n);
                    (void)loss;
                    // add the Moreau envelope pull toward omega
                    for (int j = 0; j < d; ++j)
                        grad[static_cast<std::size_t>(j)] +=
                            cfg.pfedme_lambda * (theta.weights[static_cast<std::size_t>(j)] - omega.weights[static_cast<std::size_t>(j)]);
                    grad[static_cast<std::size_t>(d)] += cfg.pfedme_lambda * (theta.bias - omega.bias);
                    detail::apply_step(theta, grad, cfg.learning_rate);
                }
                for (int j = 0; j < d; ++j)
                    omega.weights[static_cast<std::size_t>(j)] -=
                        cfg.pfedme_outer_lr * cfg.pfedme_lambda *
                        (omega.weights[static_cast<std::size_t>(j)] - theta.weights[static_cast<std::size_t>(j)]);
                omega.bias -= cfg.pfedme_outer_lr * cfg.pfedme_lambda * (omega.bias - theta.bias);
                theta_hat = theta;
            }
        }
        out.params = omega;
        out.personalized = theta_hat;
        return out;
    }

    ModelParams params = start;
    int steps = 0;
    for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        rng.shuffle(rows);
        for (int lo = 0; lo < data.n; lo += cfg.batch_size) {
            const int hi = std::min(lo + cfg.batch_size, data.n);
            const LabeledDataset batch = detail::take_rows(data, rows, lo, hi);
            auto [loss, grad] = loss_and_gradient(params, batch, step_cfg, prox_anchor, data.n);
            (void)loss;
            if (mode == LocalMode::kScaffold) {
                for (int j = 0; j <= d; ++j)
                    grad[static_cast<std::size_t>(j)] += cv->c_global[static_cast<std::size_t>(j)] -
                                                         cv->c_local[static_cast<std::size_t>(j)];
            }
            detail::apply_step(params, grad, cfg.learning_rate);
            ++steps;
        }
    }
    out.params = params;

    if (mode == LocalMode::kScaffold) {
        // option II: c_local <- c_local - c_global + (theta_start - theta_end)/(lr * steps)
        ControlVariate updated = *cv;
        const auto flat_start = start.to_flat();
        const auto flat_end = params.to_flat();
        const double denom = cfg.learning_rate * static_cast<double>(steps);
        for (int j = 0; j <= d; ++j)
            updated.c_local[static_cast<std::size_t>(j)] =
                cv->c_local[static_cast<std::size_t>(j)] - cv->c_global[static_cast<std::size_t>(j)] +
                (flat_start[static_cast<std::size_t>(j)] - flat_end[static_cast<std::size_t>(j)]) / denom;
        out.variates = updated;
    }
    return out;
}

// Appends the four topology-derived columns: the per-row distance to the
// client's feature centroid, then three client-level constants.
struct AugmentStats {
    double h0_entropy = 0.0;
    double h1_entropy = 0.0;
    double betti_median = 0.0;
};

inline LabeledDataset augment_features(const LabeledDataset& data, const AugmentStats& stats) {
    if (data.n < 1) throw input_error("augment_features: empty dataset");
    std::vector<double> centroid(static_cast<std::size_t>(data.d), 0.0);
    for (int i = 0; i < data.n; ++i)
        for (int j = 0; j < data.d; ++j) centroid[static_cast<std::size_t>(j)] += data.x(i, j);
    for (auto& c : centroid) c /= static_cast<double>(data.n);

    LabeledDataset out(data.n, data.d + 4);
    out.labels = data.labels;
    for (int i = 0; i < data.n; ++i) {
        double s = 0.0;
        for (int j = 0; j < data.d; ++j) {
            out.x(i, j) = data.x(i, j);
            const double diff = data.x(i, j) - centroid[static_cast<std::size_t>(j)];
            s += diff * diff;
        }
        out.x(i, data.d) = std::sqrt(s);
        out.x(i, data.d + 1) = stats.h0_entropy;
        out.x(i, data.d + 2) = stats.h1_entropy;
        out.x(i, data.d + 3) = stats.betti_median;
    }
    return out;
}

} // namespace ptopofl
