#pragma once

#include <cmath>
#include <vector>

#include "ptopofl/clustering.hpp"
#include "ptopofl/common.hpp"
#include "ptopofl/descriptor.hpp"
#include "ptopofl/linear_model.hpp"

namespace ptopofl {

enum class WeightingMode { kDescriptorExp, kWassersteinSoftmax };

// The server's resolved weighting for one round: cluster assignment,
// per-client weights (summing to 1 inside each cluster), and the blending
// coefficient applied afterwards.
struct AggregationPlan {
    ClusterAssignment assignment;
    std::vector<double> weights;
    double beta_blend = 0.3;
    WeightingMode mode = WeightingMode::kDescriptorExp;
};

// Per-client aggregation weights, normalized to sum 1 inside each cluster:
//   w_k ~ n_k * exp(-||phi_hat_k - phi_hat_C||) * t_k
// on l2-normalized descriptors; the exponential factor can be switched off
// for ablations.
inline std::vector<double> intra_cluster_weights(const std::vector<TopoDescriptor>& descs,
                                                 const std::vector<int>& sizes,
                                                 const std::vector<double>& trust,
                                                 const ClusterAssignment& assignment,
                                                 bool exp_factor_enabled = true) {
    const std::size_t K = descs.size();
    if (sizes.size() != K || trust.size() != K || assignment.labels.size() != K)
        throw input_error("intra_cluster_weights: size mismatch");

    std::vector<TopoDescriptor> unit;
    unit.reserve(K);
    for (const auto& d : descs) unit.push_back(normalized(d));

    // centroid of normalized members per cluster
    std::vector<TopoDescriptor> centroid(static_cast<std::size_t>(assignment.M));
    std::vector<int> count(static_cast<std::size_t>(assignment.M), 0);
    for (std::size_t k = 0; k < K; ++k) {
        const auto c = static_cast<std::size_t>(assignment.labels[k]);
        for (int i = 0; i < TopoDescriptor::kDim; ++i) centroid[c][i] += unit[k][i];
        ++count[c];
    }
    for (int c = 0; c < assignment.M; ++c)
        for (int i = 0; i < TopoDescriptor::kDim; ++i)
            centroid[static_cast<std::size_t>(c)][i] /= static_cast<double>(count[static_cast<std::size_t>(c)]);

    std::vector<double> weights(K, 0.0);
    std::vector<double> cluster_total(static_cast<std::size_t>(assignment.M), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        const auto c = static_cast<std::size_t>(assignment.labels[k]);
        double w = static_cast<double>(sizes[k]) * trust[k];
        if (exp_factor_enabled) w *= std::exp(-descriptor_distance(unit[k], centroid[c]));
        weights[k] = w;
        cluster_total[c] += w;
    }
    for (std::size_t k = 0; k < K; ++k)
        weights[k] /= cluster_total[static_cast<std::size_t>(assignment.labels[k])];
    return weights;
}

// Entrywise weighted average of parameter vectors; weights must sum to 1.
inline ModelParams aggregate_cluster(const std::vector<ModelParams>& models,
                                     const std::vector<double>& weights) {
    if (models.empty() || models.size() != weights.size())
        throw input_error("aggregate_cluster: size mismatch");
    double total = 0.0;
    for (double w : weights) total += w;
    if (std::abs(total - 1.0) > 1e-9) throw input_error("aggregate_cluster: weights must sum to 1");
    const int d = models.front().dim();
    ModelParams out(d);
    for (std::size_t k = 0; k < models.size(); ++k) {
        if (models[k].dim() != d) throw input_error("aggregate_cluster: dimension mismatch");
        for (int j = 0; j < d; ++j) out.weights[static_cast<std::size_t>(j)] += weights[k] * models[k].weights[static_cast<std::size_t>(j)];
        out.bias += weights[k] * models[k].bias;
    }
    return out;
}

// Inter-cluster blending toward the size-weighted consensus:
//   theta*_Cj = (1 - beta) theta_Cj + beta * sum_j (|Cj|/K) theta_Cj
inline std::vector<ModelParams> blend_clusters(const std::vector<ModelParams>& cluster_models,
                                               const std::vector<int>& cluster_sizes, double beta) {
    if (cluster_models.size() != cluster_sizes.size())
        throw input_error("blend_clusters: size mismatch");
    if (beta < 0.0 || beta > 1.0) throw input_error("blend_clusters: beta must lie in [0,1]");
    int K = 0;
    for (int s : cluster_sizes) K += s;
    const int d = cluster_models.front().dim();
    ModelParams consensus(d);
    for (std::size_t c = 0; c < cluster_models.size(); ++c) {
        const double w = static_cast<double>(cluster_sizes[c]) / static_cast<double>(K);
        for (int j = 0; j < d; ++j)
            consensus.weights[static_cast<std::size_t>(j)] += w * cluster_models[c].weights[static_cast<std::size_t>(j)];
        consensus.bias += w * cluster_models[c].bias;
    }
    std::vector<ModelParams> out;
    out.reserve(cluster_models.size());
    for (const auto& m : cluster_models) {
        ModelParams blended(d);
        for (int j = 0; j < d; ++j)
            blended.weights[static_cast<std::size_t>(j)] =
                (1.0 - beta) * m.weights[static_cast<std::size_t>(j)] + beta * consensus.weights[static_cast<std::size_t>(j)];
        blended.bias = (1.0 - beta) * m.bias + beta * consensus.bias;
        out.push_back(std::move(blended));
    }
    return out;
}

// Softmax of -lambda * distance; the alternate diagram-space weighting.
inline std::vector<double> wasserstein_softmax_weights(const std::vector<double>& diagram_dists,
                                                       double lambda) {
    if (diagram_dists.empty()) throw input_error("wasserstein_softmax_weights: empty input");
    if (lambda < 0.0) throw input_error("wasserstein_softmax_weights: lambda >= 0 required");
    double lo = diagram_dists.front();
    for (double d : diagram_dists) lo = std::min(lo, d);
    std::vector<double> w(diagram_dists.size(), 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < diagram_dists.size(); ++k) {
        w[k] = std::exp(-lambda * (diagram_dists[k] - lo));
        total += w[k];
    }
    for (auto& x : w) x /= total;
    return w;
}

// Both sides of the weighted variance decomposition
//   sum_k a_k ||g_k - g_bar_a||^2 = sum_k a_k ||g_k - g_bar||^2 - ||g_bar_a - g_bar||^2.
// Test-facing helper; returns (lhs, rhs).
inline std::pair<double, double> variance_identity_check(const std::vector<std::vector<double>>& grads,
                                                         const std::vector<double>& alpha) {
    if (grads.empty() || grads.size() != alpha.size())
        throw input_error("variance_identity_check: size mismatch");
    const std::size_t K = grads.size();
    const std::size_t d = grads.front().size();
    std::vector<double> mean(d, 0.0), mean_alpha(d, 0.0);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < d; ++j) {
            mean[j] += grads[k][j] / static_cast<double>(K);
            mean_alpha[j] += alpha[k] * grads[k][j];
        }
    auto sqdist = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
        return s;
    };
    double lhs = 0.0, weighted_to_mean = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        lhs += alpha[k] * sqdist(grads[k], mean_alpha);
        weighted_to_mean += alpha[k] * sqdist(grads[k], mean);
    }
    const double rhs = weighted_to_mean - sqdist(mean_alpha, mean);
    return {lhs, rhs};
}

} // namespace ptopofl
