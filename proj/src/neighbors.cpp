#include "cfa/neighbors.hpp"

#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cfa {

NeighborIndex::NeighborIndex(std::vector<FeatureVector> points, DistanceMetric metric)
    : points_(std::move(points)), metric_(metric) {
    if (points_.empty()) throw std::invalid_argument("NeighborIndex: no points");
}

NeighborIndex::Hit NeighborIndex::nearest(const FeatureVector& q,
                                          std::optional<std::size_t> exclude) const {
    Hit best{points_.size(), std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (exclude && *exclude == i) continue;
        const double d = distance(metric_, q, points_[i]);
        if (d < best.distance) best = {i, d};
    }
    if (best.index == points_.size())
        throw std::invalid_argument("NeighborIndex: empty after exclusion");
    return best;
}

DbscanLabeling dbscan(const std::vector<FeatureVector>& points,
                      const DbscanParams& params, DistanceMetric metric) {
    if (points.empty()) throw std::invalid_argument("dbscan: no points");
    if (params.eps <= 0.0) throw std::invalid_argument("dbscan: eps must be positive");
    if (params.min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
    const std::size_t n = points.size();

    std::vector<std::vector<std::size_t>> nbrs(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (distance(metric, points[i], points[j]) < params.eps) {
                nbrs[i].push_back(j);
                nbrs[j].push_back(i);
            }

    std::vector<bool> core(n);
    for (std::size_t i = 0; i < n; ++i)
        core[i] = nbrs[i].size() + 1 >= static_cast<std::size_t>(params.min_pts);

    DbscanLabeling out;
    out.cluster_id.assign(n, DbscanLabeling::kNoise);
    // Expand clusters from core points in index order; a border point attaches
    // to the first (lowest-id) cluster that reaches it.
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || out.cluster_id[i] != DbscanLabeling::kNoise) continue;
        const int cid = out.cluster_id[i] = out.n_clusters++;
        std::deque<std::size_t> frontier{i};
        while (!frontier.empty()) {
            const std::size_t p = frontier.front();
            frontier.pop_front();
            for (std::size_t q : nbrs[p]) {
                if (out.cluster_id[q] != DbscanLabeling::kNoise) continue;
                out.cluster_id[q] = cid;
                if (core[q]) frontier.push_back(q);
            }
        }
    }
    return out;
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<int> epsilon_components(const std::vector<FeatureVector>& points,
                                    double eps, DistanceMetric metric) {
    if (points.empty()) throw std::invalid_argument("epsilon_components: no points");
    const std::size_t n = points.size();
    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (distance(metric, points[i], points[j]) < eps) uf.unite(i, j);

    std::vector<int> comp(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = uf.find(i);
        if (comp[root] == -1) comp[root] = next++;
        comp[i] = comp[root];
    }
    return comp;
}

}  // namespace cfa
