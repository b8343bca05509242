#pragma once

#include <algorithm>
#include <vector>

#include "ptopofl/common.hpp"
#include "ptopofl/descriptor.hpp"

namespace ptopofl {

struct ClusterAssignment {
    std::vector<int> labels; // one label in [0, M) per client
    int M = 0;

    std::vector<std::vector<int>> members() const {
        std::vector<std::vector<int>> out(static_cast<std::size_t>(M));
        for (std::size_t k = 0; k < labels.size(); ++k)
            out[static_cast<std::size_t>(labels[k])].push_back(static_cast<int>(k));
        return out;
    }
};

// Hierarchical agglomerative clustering with average linkage down to M
// clusters, on a precomputed pairwise distance matrix. Ties merge the pair
// with the lexicographically smallest (min member, min member) key. Output
// labels are renumbered by each cluster's smallest member index.
inline ClusterAssignment average_linkage_clusters(const std::vector<std::vector<double>>& dist, int M) {
    const int K = static_cast<int>(dist.size());
    if (K < 1) throw input_error("average_linkage_clusters: empty input");
    if (M < 1 || M > K) throw config_error("average_linkage_clusters: need 1 <= M <= K");

    std::vector<std::vector<int>> clusters;
    for (int k = 0; k < K; ++k) clusters.push_back({k});

    auto cluster_distance = [&](const std::vector<int>& a, const std::vector<int>& b) {
        double s = 0.0;
        for (int i : a)
            for (int j : b) s += dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        return s / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    };

    while (static_cast<int>(clusters.size()) > M) {
        int best_a = -1, best_b = -1;
        double best_d = 0.0;
        std::pair<int, int> best_key{0, 0};
        for (std::size_t a = 0; a < clusters.size(); ++a) {
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                const double d = cluster_distance(clusters[a], clusters[b]);
                int lo = clusters[a].front(), hi = clusters[b].front();
                if (lo > hi) std::swap(lo, hi);
                const std::pair<int, int> key{lo, hi};
                if (best_a < 0 || d < best_d || (d == best_d && key < best_key)) {
                    best_a = static_cast<int>(a);
                    best_b = static_cast<int>(b);
                    best_d = d;
                    best_key = key;
                }
            }
        }
        auto& dst = clusters[static_cast<std::size_t>(best_a)];
        auto& src = clusters[static_cast<std::size_t>(best_b)];
        dst.insert(dst.end(), src.begin(), src.end());
        std::sort(dst.begin(), dst.end());
        clusters.erase(clusters.begin() + best_b);
    }

    // stable relabeling: cluster containing the smallest client index gets 0
    std::sort(clusters.begin(), clusters.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); });
    ClusterAssignment out;
    out.M = M;
    out.labels.assign(static_cast<std::size_t>(K), 0);
    for (int c = 0; c < M; ++c)
        for (int k : clusters[static_cast<std::size_t>(c)]) out.labels[static_cast<std::size_t>(k)] = c;
    return out;
}

// Round-0 clustering of Algorithm-style aggregation: Euclidean distances on
// l2-normalized descriptors, average linkage down to M clusters.
inline ClusterAssignment cluster_clients(const std::vector<TopoDescriptor>& descs, int M) {
    const int K = static_cast<int>(descs.size());
    if (K < 1) throw input_error("cluster_clients: no descriptors");
    if (M < 1 || M > K) throw config_error("cluster_clients: need 1 <= M <= K");
    std::vector<TopoDescriptor> unit;
    unit.reserve(descs.size());
    for (const auto& d : descs) unit.push_back(normalized(d));
    std::vector<std::vector<double>> dist(static_cast<std::size_t>(K),
                                          std::vector<double>(static_cast<std::size_t>(K), 0.0));
    for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j) {
            const double d = descriptor_distance(unit[static_cast<std::size_t>(i)], unit[static_cast<std::size_t>(j)]);
            dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d;
            dist[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = d;
        }
    return average_linkage_clusters(dist, M);
}

} // namespace ptopofl
