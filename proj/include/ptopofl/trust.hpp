#pragma once

#include <cmath>
#include <set>
#include <vector>

#include "ptopofl/common.hpp"
#include "ptopofl/descriptor.hpp"

namespace ptopofl {

struct TrustReport {
    std::vector<double> delta; // mean raw-descriptor distance to all other clients
    std::vector<double> z;     // population z-scores of delta
    std::vector<double> trust; // exp(-max(z-1, 0)), in (0, 1]
    std::set<int> flagged;     // z > tau
};

// Topological anomaly scores on raw (unnormalized) descriptors. Clients whose
// mean distance to the rest sits more than one population sigma above the
// mean are down-weighted exponentially; z > tau flags them.
inline TrustReport trust_scores(const std::vector<TopoDescriptor>& descs, double tau) {
    const int K = static_cast<int>(descs.size());
    if (K < 2) throw config_error("trust_scores: need at least 2 clients");
    TrustReport report;
    report.delta.assign(static_cast<std::size_t>(K), 0.0);
    for (int k = 0; k < K; ++k) {
        double s = 0.0;
        for (int j = 0; j < K; ++j)
            if (j != k) s += descriptor_distance(descs[static_cast<std::size_t>(k)], descs[static_cast<std::size_t>(j)]);
        report.delta[static_cast<std::size_t>(k)] = s / static_cast<double>(K - 1);
    }

    double mu = 0.0;
    for (double d : report.delta) mu += d;
    mu /= static_cast<double>(K);
    double var = 0.0;
    for (double d : report.delta) var += (d - mu) * (d - mu);
    const double sigma = std::sqrt(var / static_cast<double>(K));

    report.z.assign(static_cast<std::size_t>(K), 0.0);
    if (sigma >= 1e-12)
        for (int k = 0; k < K; ++k)
            report.z[static_cast<std::size_t>(k)] = (report.delta[static_cast<std::size_t>(k)] - mu) / sigma;

    report.trust.assign(static_cast<std::size_t>(K), 1.0);
    for (int k = 0; k < K; ++k) {
        const double zk = report.z[static_cast<std::size_t>(k)];
        report.trust[static_cast<std::size_t>(k)] = std::exp(-std::max(zk - 1.0, 0.0));
        if (zk > tau) report.flagged.insert(k);
    }
    return report;
}

} // namespace ptopofl
