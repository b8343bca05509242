#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ptopofl/common.hpp"

namespace ptopofl {

// Finite point set in R^d, row-major flat storage.
struct PointCloud {
    int n = 0;
    int d = 0;
    std::vector<double> xs; // n*d, row-major

    PointCloud() = default;
    PointCloud(int n_, int d_) : n(n_), d(d_), xs(static_cast<std::size_t>(n_) * d_, 0.0) {}

    double& at(int i, int j) { return xs[static_cast<std::size_t>(i) * d + j]; }
    double at(int i, int j) const { return xs[static_cast<std::size_t>(i) * d + j]; }

    void validate() const {
        if (n < 1 || d < 1) throw input_error("PointCloud: need n >= 1 and d >= 1");
        if (xs.size() != static_cast<std::size_t>(n) * d)
            throw input_error("PointCloud: storage size does not match n*d");
        for (double v : xs)
            if (!std::isfinite(v)) throw input_error("PointCloud: non-finite coordinate");
    }
};

// Symmetric pairwise-distance matrix with zero diagonal.
struct DistanceMatrix {
    int n = 0;
    std::vector<double> entries; // n*n

    DistanceMatrix() = default;
    explicit DistanceMatrix(int n_) : n(n_), entries(static_cast<std::size_t>(n_) * n_, 0.0) {}

    double& at(int i, int j) { return entries[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * n + j]; }
};

inline DistanceMatrix pairwise_distances(const PointCloud& cloud) {
    cloud.validate();
    DistanceMatrix dist(cloud.n);
    for (int i = 0; i < cloud.n; ++i) {
        for (int j = i + 1; j < cloud.n; ++j) {
            double s = 0.0;
            for (int k = 0; k < cloud.d; ++k) {
                const double diff = cloud.at(i, k) - cloud.at(j, k);
                s += diff * diff;
            }
            const double dij = std::sqrt(s);
            dist.at(i, j) = dij;
            dist.at(j, i) = dij;
        }
    }
    return dist;
}

// q-th quantile (numpy-style linear interpolation), q in [0,1]. Sorts a copy.
inline double quantile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    const double rank = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

} // namespace ptopofl
