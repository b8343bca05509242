#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ptopofl/common.hpp"
#include "ptopofl/persistence.hpp"
#include "ptopofl/point_cloud.hpp"

namespace ptopofl {

// Betti curve sampled at L thresholds linearly spaced from 0 to the 95th
// percentile of finite death values; entry l counts finite pairs of the given
// dimension with death strictly above the threshold.
inline std::vector<double> betti_curve(const PersistenceDiagram& diag, int dim, int L) {
    if (L < 1) throw input_error("betti_curve: L >= 1 required");
    if (dim != 0 && dim != 1) throw input_error("betti_curve: dim must be 0 or 1");
    std::vector<double> curve(static_cast<std::size_t>(L), 0.0);
    const auto deaths = diag.finite_deaths(dim);
    if (deaths.empty()) return curve;
    const double hi = quantile(deaths, 0.95);
    for (int l = 0; l < L; ++l) {
        const double t = (L == 1) ? 0.0 : hi * static_cast<double>(l) / static_cast<double>(L - 1);
        int count = 0;
        for (double d : deaths)
            if (d > t) ++count;
        curve[static_cast<std::size_t>(l)] = static_cast<double>(count);
    }
    return curve;
}

// Shannon entropy (nats) of normalized finite lifetimes, with the small
// epsilon guard inside the log. Degenerate diagrams give 0.
inline double persistence_entropy(const PersistenceDiagram& diag, int dim) {
    if (dim != 0 && dim != 1) throw input_error("persistence_entropy: dim must be 0 or 1");
    const auto pers = diag.finite_persistences(dim);
    if (pers.size() <= 1) return 0.0;
    double total = 0.0;
    for (double p : pers) total += p;
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double p : pers) {
        const double q = p / total;
        h -= q * std::log(q + 1e-10);
    }
    return std::max(0.0, h);
}

// l2 amplitude: sqrt of the sum of squared finite lifetimes.
inline double amplitude(const PersistenceDiagram& diag, int dim) {
    if (dim != 0 && dim != 1) throw input_error("amplitude: dim must be 0 or 1");
    double s = 0.0;
    for (double p : diag.finite_persistences(dim)) s += p * p;
    return std::sqrt(s);
}

// Count of finite pairs with lifetime strictly above the median lifetime.
inline double count_above_median_persistence(const PersistenceDiagram& diag, int dim) {
    auto pers = diag.finite_persistences(dim);
    if (pers.empty()) return 0.0;
    const double med = quantile(pers, 0.5);
    int count = 0;
    for (double p : pers)
        if (p > med) ++count;
    return static_cast<double>(count);
}

} // namespace ptopofl
