#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "ptopofl/common.hpp"
#include "ptopofl/persistence.hpp"

namespace ptopofl {

// Exact min-cost perfect matching on a square cost matrix (Hungarian
// algorithm with potentials, O(n^3)).
inline double solve_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return 0.0;
    const double kInf = std::numeric_limits<double>::max();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = match[static_cast<std::size_t>(j0)];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j)
        total += cost[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)][static_cast<std::size_t>(j - 1)];
    return total;
}

// L2 distance from a diagram point to the diagonal b = d.
inline double diagonal_gap(const PersistencePair& p) { return (p.death - p.birth) / std::sqrt(2.0); }

// p-Wasserstein distance between the finite parts of two diagrams in one
// homology dimension, solved exactly on the augmented (m_a+m_b) x (m_a+m_b)
// cost matrix where unmatched points pay their diagonal projection. Essential
// (infinite) pairs are excluded from the matching.
inline double wasserstein_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim,
                                   double p = 2.0) {
    if (p < 1.0) throw input_error("wasserstein_distance: p >= 1 required");
    std::vector<PersistencePair> pa, pb;
    for (const auto& q : a.pairs)
        if (q.dim == dim && q.is_finite()) pa.push_back(q);
    for (const auto& q : b.pairs)
        if (q.dim == dim && q.is_finite()) pb.push_back(q);
    const int ma = static_cast<int>(pa.size());
    const int mb = static_cast<int>(pb.size());
    const int n = ma + mb;
    if (n == 0) return 0.0;

    std::vector<std::vector<double>> cost(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < ma; ++i) {
        const double gap_i = std::pow(diagonal_gap(pa[static_cast<std::size_t>(i)]), p);
        for (int j = 0; j < mb; ++j) {
            const double db = pa[static_cast<std::size_t>(i)].birth - pb[static_cast<std::size_t>(j)].birth;
            const double dd = pa[static_cast<std::size_t>(i)].death - pb[static_cast<std::size_t>(j)].death;
            cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                std::pow(std::sqrt(db * db + dd * dd), p);
        }
        for (int j = mb; j < n; ++j) cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = gap_i;
    }
    for (int j = 0; j < mb; ++j) {
        const double gap_j = std::pow(diagonal_gap(pb[static_cast<std::size_t>(j)]), p);
        for (int i = ma; i < n; ++i) cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = gap_j;
    }
    return std::pow(solve_assignment(cost), 1.0 / p);
}

} // namespace ptopofl
