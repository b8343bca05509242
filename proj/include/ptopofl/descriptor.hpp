#pragma once

#include <array>
#include <cmath>
#include <cstring>
#include <vector>

#include "ptopofl/common.hpp"
#include "ptopofl/diagram_stats.hpp"
#include "ptopofl/persistence.hpp"
#include "ptopofl/point_cloud.hpp"
#include "ptopofl/rng.hpp"

namespace ptopofl {

// Fixed layout of the 48-dimensional topological descriptor:
//   [beta0, beta1, H0 entropy, H1 entropy, A0, A1, n0_pers, n1_pers,
//    20 H0 Betti-curve values, 20 H1 Betti-curve values]
struct TopoDescriptor {
    static constexpr int kDim = 48;
    static constexpr int kCurveLen = 20;
    enum Index { kBeta0 = 0, kBeta1, kH0Entropy, kH1Entropy, kAmp0, kAmp1, kN0Pers, kN1Pers, kCurve0 = 8, kCurve1 = 28 };

    std::array<double, kDim> values{};

    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }

    // Simulated wire payload: 48 IEEE-754 doubles, little-endian on this
    // platform, in layout order.
    std::vector<unsigned char> to_bytes() const {
        std::vector<unsigned char> buf(sizeof(double) * kDim);
        std::memcpy(buf.data(), values.data(), buf.size());
        return buf;
    }

    static TopoDescriptor from_bytes(const std::vector<unsigned char>& buf) {
        if (buf.size() != sizeof(double) * kDim)
            throw input_error("TopoDescriptor: payload must be exactly 48 doubles");
        TopoDescriptor d;
        std::memcpy(d.values.data(), buf.data(), buf.size());
        return d;
    }
};

inline double descriptor_distance(const TopoDescriptor& a, const TopoDescriptor& b) {
    double s = 0.0;
    for (int i = 0; i < TopoDescriptor::kDim; ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return std::sqrt(s);
}

inline double descriptor_norm(const TopoDescriptor& a) {
    double s = 0.0;
    for (int i = 0; i < TopoDescriptor::kDim; ++i) s += a[i] * a[i];
    return std::sqrt(s);
}

// l2-normalized copy; zero vectors are left as zero.
inline TopoDescriptor normalized(const TopoDescriptor& a) {
    const double norm = descriptor_norm(a);
    if (norm < 1e-12) return a;
    TopoDescriptor out;
    for (int i = 0; i < TopoDescriptor::kDim; ++i) out[i] = a[i] / norm;
    return out;
}

struct DescriptorResult {
    TopoDescriptor descriptor;
    PersistenceDiagram h0;
    PersistenceDiagram h1;
};

// Full descriptor pipeline: subsample to n_sub points when needed, compute H0
// exactly and H1 on the 2-skeleton truncated at the 95th percentile of
// pairwise distances, then assemble the fixed layout.
inline DescriptorResult descriptor_with_diagrams(const PointCloud& cloud, int n_sub, int L, Rng& rng) {
    cloud.validate();
    if (n_sub < 2) throw config_error("descriptor: n_sub >= 2 required");
    if (L != TopoDescriptor::kCurveLen)
        throw config_error("descriptor: the 48-dim layout requires L = 20");

    const PointCloud* work = &cloud;
    PointCloud sampled;
    if (cloud.n > n_sub) {
        const auto idx = rng.sample_without_replacement(cloud.n, n_sub);
        sampled = PointCloud(n_sub, cloud.d);
        for (int i = 0; i < n_sub; ++i)
            for (int j = 0; j < cloud.d; ++j) sampled.at(i, j) = cloud.at(idx[static_cast<std::size_t>(i)], j);
        work = &sampled;
    }

    const DistanceMatrix dist = pairwise_distances(*work);
    DescriptorResult out;
    out.h0 = h0_persistence(dist);

    std::vector<double> all_dists;
    all_dists.reserve(static_cast<std::size_t>(dist.n) * (dist.n - 1) / 2);
    for (int i = 0; i < dist.n; ++i)
        for (int j = i + 1; j < dist.n; ++j) all_dists.push_back(dist.at(i, j));
    const double max_scale = quantile(all_dists, 0.95);
    out.h1 = h1_persistence(dist, max_scale, std::max(dist.n, 200));

    TopoDescriptor& desc = out.descriptor;
    desc[TopoDescriptor::kBeta0] = static_cast<double>(out.h0.count_infinite(0));
    int beta1 = 0;
    for (const auto& p : out.h1.pairs)
        if (p.dim == 1 && p.persistence() > 0.0) ++beta1;
    desc[TopoDescriptor::kBeta1] = static_cast<double>(beta1);
    desc[TopoDescriptor::kH0Entropy] = persistence_entropy(out.h0, 0);
    desc[TopoDescriptor::kH1Entropy] = persistence_entropy(out.h1, 1);
    desc[TopoDescriptor::kAmp0] = amplitude(out.h0, 0);
    desc[TopoDescriptor::kAmp1] = amplitude(out.h1, 1);
    desc[TopoDescriptor::kN0Pers] = count_above_median_persistence(out.h0, 0);
    desc[TopoDescriptor::kN1Pers] = count_above_median_persistence(out.h1, 1);
    const auto c0 = betti_curve(out.h0, 0, L);
    const auto c1 = betti_curve(out.h1, 1, L);
    for (int l = 0; l < L; ++l) {
        desc[TopoDescriptor::kCurve0 + l] = c0[static_cast<std::size_t>(l)];
        desc[TopoDescriptor::kCurve1 + l] = c1[static_cast<std::size_t>(l)];
    }
    return out;
}

inline TopoDescriptor descriptor(const PointCloud& cloud, int n_sub, int L, Rng& rng) {
    return descriptor_with_diagrams(cloud, n_sub, L, rng).descriptor;
}

// Entrywise weighted mean; the approximate Frechet barycenter in descriptor
// space. Weights must be non-negative and sum to 1.
inline TopoDescriptor descriptor_barycenter(const std::vector<TopoDescriptor>& descs,
                                            const std::vector<double>& weights) {
    if (descs.empty()) throw input_error("descriptor_barycenter: empty input");
    if (weights.size() != descs.size())
        throw input_error("descriptor_barycenter: weights/descriptors size mismatch");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw input_error("descriptor_barycenter: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw input_error("descriptor_barycenter: weights must sum to 1");
    TopoDescriptor out;
    for (std::size_t k = 0; k < descs.size(); ++k)
        for (int i = 0; i < TopoDescriptor::kDim; ++i) out[i] += weights[k] * descs[k][i];
    return out;
}

} // namespace ptopofl
