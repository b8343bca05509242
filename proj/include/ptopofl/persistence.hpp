#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

#include "ptopofl/common.hpp"
#include "ptopofl/point_cloud.hpp"

namespace ptopofl {

inline constexpr double kInfDeath = std::numeric_limits<double>::infinity();

struct PersistencePair {
    double birth = 0.0;
    double death = 0.0; // +inf for essential classes
    int dim = 0;        // 0 or 1

    double persistence() const { return death - birth; }
    bool is_finite() const { return std::isfinite(death); }
};

struct PersistenceDiagram {
    std::vector<PersistencePair> pairs;

    std::set<int> dims_present() const {
        std::set<int> s;
        for (const auto& p : pairs) s.insert(p.dim);
        return s;
    }

    std::vector<double> finite_deaths(int dim) const {
        std::vector<double> out;
        for (const auto& p : pairs)
            if (p.dim == dim && p.is_finite()) out.push_back(p.death);
        return out;
    }

    std::vector<double> finite_persistences(int dim) const {
        std::vector<double> out;
        for (const auto& p : pairs)
            if (p.dim == dim && p.is_finite()) out.push_back(p.persistence());
        return out;
    }

    int count_infinite(int dim) const {
        int c = 0;
        for (const auto& p : pairs)
            if (p.dim == dim && !p.is_finite()) ++c;
        return c;
    }
};

namespace detail {

// Union-find with the component's minimum point index as its representative
// key. On a merge the component holding the smaller minimum index survives,
// which pins the elder rule deterministically (all H0 births are 0, so ages
// alone cannot break ties).
class UnionFind {
public:
    explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)), min_index_(static_cast<std::size_t>(n)) {
        for (int i = 0; i < n; ++i) {
            parent_[static_cast<std::size_t>(i)] = i;
            min_index_[static_cast<std::size_t>(i)] = i;
        }
    }

    int find(int x) {
        int root = x;
        while (parent_[static_cast<std::size_t>(root)] != root) root = parent_[static_cast<std::size_t>(root)];
        while (parent_[static_cast<std::size_t>(x)] != root) {
            const int next = parent_[static_cast<std::size_t>(x)];
            parent_[static_cast<std::size_t>(x)] = root;
            x = next;
        }
        return root;
    }

    // returns false when already connected
    bool merge(int a, int b) {
        int ra = find(a), rb = find(b);
        if (ra == rb) return false;
        if (min_index_[static_cast<std::size_t>(rb)] < min_index_[static_cast<std::size_t>(ra)]) std::swap(ra, rb);
        parent_[static_cast<std::size_t>(rb)] = ra; // ra keeps the smaller min index
        return true;
    }

    int min_index(int x) { return min_index_[static_cast<std::size_t>(find(x))]; }

private:
    std::vector<int> parent_;
    std::vector<int> min_index_;
};

struct Edge {
    int i, j;
    double w;
};

inline std::vector<Edge> sorted_edges(const DistanceMatrix& dist, double max_w) {
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(dist.n) * (dist.n - 1) / 2);
    for (int i = 0; i < dist.n; ++i)
        for (int j = i + 1; j < dist.n; ++j)
            if (dist.at(i, j) <= max_w) edges.push_back({i, j, dist.at(i, j)});
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.w != b.w) return a.w < b.w;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    return edges;
}

} // namespace detail

// 0-dimensional persistence of the Vietoris-Rips filtration. Births are all
// zero; finite deaths are the MST edge weights taken in ascending order;
// one essential pair remains per connected component of the completion.
inline PersistenceDiagram h0_persistence(const DistanceMatrix& dist) {
    if (dist.n < 1) throw input_error("h0_persistence: need at least 1 point");
    PersistenceDiagram diag;
    detail::UnionFind uf(dist.n);
    auto edges = detail::sorted_edges(dist, kInfDeath);
    int components = dist.n;
    for (const auto& e : edges) {
        if (components == 1) break;
        if (uf.merge(e.i, e.j)) {
            diag.pairs.push_back({0.0, e.w, 0});
            --components;
        }
    }
    for (int c = 0; c < components; ++c) diag.pairs.push_back({0.0, kInfDeath, 0});
    return diag;
}

namespace detail {

// Sparse Z/2 column reduction for the triangle boundary matrix. Columns hold
// edge indices sorted ascending; the pivot is the largest index.
inline bool xor_column(std::vector<int>& col, const std::vector<int>& other) {
    std::vector<int> merged;
    merged.reserve(col.size() + other.size());
    std::size_t a = 0, b = 0;
    while (a < col.size() && b < other.size()) {
        if (col[a] == other[b]) {
            ++a;
            ++b;
        } else if (col[a] < other[b]) {
            merged.push_back(col[a++]);
        } else {
            merged.push_back(other[b++]);
        }
    }
    while (a < col.size()) merged.push_back(col[a++]);
    while (b < other.size()) merged.push_back(other[b++]);
    col = std::move(merged);
    return !col.empty();
}

struct Triangle {
    int i, j, k;
    double diam;
};

} // namespace detail

// 1-dimensional persistence of the Vietoris-Rips filtration restricted to
// simplices with filtration value <= max_scale, by exact boundary reduction on
// the 2-skeleton. Classes still alive at max_scale are truncated there;
// zero-persistence pairs are dropped.
inline PersistenceDiagram h1_persistence(const DistanceMatrix& dist, double max_scale, int max_points = 200) {
    if (dist.n > max_points)
        throw size_error("h1_persistence: point count exceeds cap; subsample first");
    PersistenceDiagram diag;
    if (dist.n < 3 || !(max_scale > 0.0)) return diag;

    const auto edges = detail::sorted_edges(dist, max_scale);
    const int n_edges = static_cast<int>(edges.size());

    // edge index lookup within the filtration order
    std::vector<int> edge_id(static_cast<std::size_t>(dist.n) * dist.n, -1);
    for (int e = 0; e < n_edges; ++e)
        edge_id[static_cast<std::size_t>(edges[static_cast<std::size_t>(e)].i) * dist.n +
                edges[static_cast<std::size_t>(e)].j] = e;
    auto eid = [&](int a, int b) {
        if (a > b) std::swap(a, b);
        return edge_id[static_cast<std::size_t>(a) * dist.n + b];
    };

    // positive edges: the ones that close a cycle instead of merging components
    std::vector<bool> positive(static_cast<std::size_t>(n_edges), false);
    {
        detail::UnionFind uf(dist.n);
        for (int e = 0; e < n_edges; ++e)
            positive[static_cast<std::size_t>(e)] =
                !uf.merge(edges[static_cast<std::size_t>(e)].i, edges[static_cast<std::size_t>(e)].j);
    }

    std::vector<detail::Triangle> tris;
    for (int i = 0; i < dist.n; ++i)
        for (int j = i + 1; j < dist.n; ++j) {
            const double dij = dist.at(i, j);
            if (dij > max_scale) continue;
            for (int k = j + 1; k < dist.n; ++k) {
                const double diam = std::max({dij, dist.at(i, k), dist.at(j, k)});
                if (diam <= max_scale) tris.push_back({i, j, k, diam});
            }
        }
    std::sort(tris.begin(), tris.end(), [](const detail::Triangle& a, const detail::Triangle& b) {
        if (a.diam != b.diam) return a.diam < b.diam;
        if (a.i != b.i) return a.i < b.i;
        if (a.j != b.j) return a.j < b.j;
        return a.k < b.k;
    });

    // reduce each triangle column against previously stored pivots
    std::vector<int> pivot_owner(static_cast<std::size_t>(n_edges), -1);
    std::vector<std::vector<int>> reduced;
    reduced.reserve(tris.size());
    std::vector<bool> edge_paired(static_cast<std::size_t>(n_edges), false);

    for (const auto& t : tris) {
        std::vector<int> col = {eid(t.i, t.j), eid(t.i, t.k), eid(t.j, t.k)};
        std::sort(col.begin(), col.end());
        while (!col.empty()) {
            const int low = col.back();
            const int owner = pivot_owner[static_cast<std::size_t>(low)];
            if (owner < 0) break;
            detail::xor_column(col, reduced[static_cast<std::size_t>(owner)]);
        }
        if (col.empty()) continue; // positive triangle (would create H2)
        const int low = col.back();
        pivot_owner[static_cast<std::size_t>(low)] = static_cast<int>(reduced.size());
        reduced.push_back(std::move(col));
        edge_paired[static_cast<std::size_t>(low)] = true;
        const double birth = edges[static_cast<std::size_t>(low)].w;
        if (t.diam > birth) diag.pairs.push_back({birth, t.diam, 1});
    }

    // cycles never killed within the truncated filtration die at max_scale
    for (int e = 0; e < n_edges; ++e) {
        if (!positive[static_cast<std::size_t>(e)] || edge_paired[static_cast<std::size_t>(e)]) continue;
        const double birth = edges[static_cast<std::size_t>(e)].w;
        if (max_scale > birth) diag.pairs.push_back({birth, max_scale, 1});
    }

    std::sort(diag.pairs.begin(), diag.pairs.end(), [](const PersistencePair& a, const PersistencePair& b) {
        if (a.birth != b.birth) return a.birth < b.birth;
        return a.death < b.death;
    });
    return diag;
}

} // namespace ptopofl
