#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cfa/dataset.hpp"

namespace cfa {

/// Exhaustive-scan nearest-neighbor index. Immutable after build; ties break
/// toward the lowest point index.
class NeighborIndex {
public:
    NeighborIndex(std::vector<FeatureVector> points, DistanceMetric metric);

    struct Hit {
        std::size_t index;
        double distance;
    };

    /// Exact nearest neighbor of q; `exclude` skips one designated point.
    Hit nearest(const FeatureVector& q,
                std::optional<std::size_t> exclude = std::nullopt) const;

    const std::vector<FeatureVector>& points() const { return points_; }
    DistanceMetric metric() const { return metric_; }
    std::size_t size() const { return points_.size(); }

private:
    std::vector<FeatureVector> points_;
    DistanceMetric metric_;
};

struct DbscanParams {
    double eps = 0.0;
    int min_pts = 2;
};

struct DbscanLabeling {
    static constexpr int kNoise = -1;
    std::vector<int> cluster_id;  // -1 = noise, else contiguous from 0
    int n_clusters = 0;
};

/// Density clustering. Neighborhood membership is strict (`distance < eps`),
/// matching the chain definition the connectedness criterion builds on; note
/// the textbook algorithm uses `<=`. Self counts toward the core test.
DbscanLabeling dbscan(const std::vector<FeatureVector>& points,
                      const DbscanParams& params,
                      DistanceMetric metric = DistanceMetric::L2);

/// Connected components of the graph with an edge iff distance < eps.
/// Component ids are contiguous from 0 in order of first appearance.
std::vector<int> epsilon_components(const std::vector<FeatureVector>& points,
                                    double eps,
                                    DistanceMetric metric = DistanceMetric::L2);

}  // namespace cfa
