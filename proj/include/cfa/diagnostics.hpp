#pragma once

#include <functional>
#include <optional>

#include "cfa/dataset.hpp"
#include "cfa/neighbors.hpp"

namespace cfa {

/// Proximity of an explanation to ground-truth data of its class: distance to
/// the nearest same-class instance a0, relative to a0's own nearest-neighbor
/// distance. Equals the Local Outlier Factor score with k=1.
struct ProximityScore {
    double value = 0.0;
    std::size_t a0_index = 0;
    double numerator = 0.0;
    double denominator = 0.0;
};

ProximityScore proximity(const FeatureVector& e, const Dataset& same_class_data,
                         DistanceMetric metric = DistanceMetric::L2);

struct ConnectednessResult {
    bool connected = false;
    double eps = 0.0;
    int cluster_id = -1;  // -1 = noise
    std::optional<std::size_t> anchor_index;  // index into same_class_data
};

/// Runs dbscan(min_pts=2) on {e} + same_class_data; e is connected iff it is
/// non-noise and shares a cluster with at least one data instance.
ConnectednessResult connectedness(const FeatureVector& e,
                                  const Dataset& same_class_data, double eps,
                                  DistanceMetric metric = DistanceMetric::L2);

/// Smallest eps leaving no instance isolated: the max over instances of the
/// nearest-neighbor distance, plus a small margin for the strict inequality.
double default_epsilon(const Dataset& same_class_data,
                       DistanceMetric metric = DistanceMetric::L2);

struct EpsilonPolicy {
    enum class Mode { Fixed, AutoPerClass } mode = Mode::AutoPerClass;
    double fixed_value = 0.0;

    double resolve(const Dataset& same_class_data, DistanceMetric metric) const;
};

/// A counterfactual explainer as seen by the stability metric: may fail.
using Explainer = std::function<std::optional<FeatureVector>(const FeatureVector&)>;

struct StabilityScore {
    double value = 0.0;
    std::size_t witness_index = 0;  // dataset index of the maximizing neighbor
    std::size_t n_neighbors = 0;    // qualifying neighbors inside the ball
    std::size_t n_failed = 0;       // neighbors the explainer failed on
};

/// Max over dataset neighbors x_j within the L2 ball B(x, eps), x_j != x, of
/// |E(x) - E(x_j)|_2 / |x - x_j|_2. Explainer failures are skipped and
/// counted.
StabilityScore stability(const FeatureVector& x, const Dataset& data,
                         const Explainer& explainer, double eps);

}  // namespace cfa
