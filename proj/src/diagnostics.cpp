#include "cfa/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace cfa {

ProximityScore proximity(const FeatureVector& e, const Dataset& same_class_data,
                         DistanceMetric metric) {
    if (same_class_data.size() < 2)
        throw std::invalid_argument("proximity: need at least 2 same-class instances");

    std::vector<FeatureVector> pts;
    pts.reserve(same_class_data.size());
    for (const auto& inst : same_class_data.instances()) pts.push_back(inst.features);
    const NeighborIndex idx(std::move(pts), metric);

    const auto a0 = idx.nearest(e);
    // a0's nearest other instance; excluding a0 itself keeps the denominator
    // nonzero.
    const auto a0_nn = idx.nearest(idx.points()[a0.index], a0.index);

    ProximityScore score;
    score.a0_index = a0.index;
    score.numerator = a0.distance;
    score.denominator = a0_nn.distance;
    if (score.denominator <= 0.0)
        throw std::invalid_argument("proximity: duplicate instances make the score undefined");
    score.value = score.numerator / score.denominator;
    return score;
}

ConnectednessResult connectedness(const FeatureVector& e,
                                  const Dataset& same_class_data, double eps,
                                  DistanceMetric metric) {
    if (same_class_data.empty())
        throw std::invalid_argument("connectedness: empty same-class data");
    if (eps <= 0.0) throw std::invalid_argument("connectedness: eps must be positive");

    std::vector<FeatureVector> pts;
    pts.reserve(same_class_data.size() + 1);
    pts.push_back(e);
    for (const auto& inst : same_class_data.instances()) pts.push_back(inst.features);
    const DbscanLabeling labeling = dbscan(pts, {eps, 2}, metric);

    ConnectednessResult out;
    out.eps = eps;
    out.cluster_id = labeling.cluster_id[0];
    if (out.cluster_id == DbscanLabeling::kNoise) return out;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (labeling.cluster_id[i] == out.cluster_id) {
            out.connected = true;
            out.anchor_index = i - 1;
            break;
        }
    }
    return out;
}

double default_epsilon(const Dataset& same_class_data, DistanceMetric metric) {
    if (same_class_data.size() < 2)
        throw std::invalid_argument("default_epsilon: need at least 2 instances");
    std::vector<FeatureVector> pts;
    pts.reserve(same_class_data.size());
    for (const auto& inst : same_class_data.instances()) pts.push_back(inst.features);
    const NeighborIndex idx(std::move(pts), metric);

    double max_nn = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i)
        max_nn = std::max(max_nn, idx.nearest(idx.points()[i], i).distance);
    return max_nn + 1e-9;
}

double EpsilonPolicy::resolve(const Dataset& same_class_data,
                              DistanceMetric metric) const {
    if (mode == Mode::Fixed) {
        if (fixed_value <= 0.0)
            throw std::invalid_argument("epsilon policy: fixed eps must be positive");
        return fixed_value;
    }
    return default_epsilon(same_class_data, metric);
}

StabilityScore stability(const FeatureVector& x, const Dataset& data,
                         const Explainer& explainer, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("stability: eps must be positive");

    const std::optional<FeatureVector> ex = explainer(x);
    if (!ex) throw std::runtime_error("stability: explainer failed on the center point");

    StabilityScore score;
    bool any_neighbor = false;
    for (std::size_t j = 0; j < data.size(); ++j) {
        const double dxj = l2_distance(x, data[j].features);
        if (dxj == 0.0 || dxj > eps) continue;
        any_neighbor = true;
        const std::optional<FeatureVector> exj = explainer(data[j].features);
        if (!exj) {
            ++score.n_failed;
            continue;
        }
        ++score.n_neighbors;
        const double ratio = l2_distance(*ex, *exj) / dxj;
        if (score.n_neighbors == 1 || ratio > score.value) {
            score.value = ratio;
            score.witness_index = j;
        }
    }
    if (!any_neighbor)
        throw std::runtime_error("stability undefined: no dataset point within eps");
    if (score.n_neighbors == 0)
        throw std::runtime_error("stability undefined: explainer failed on every neighbor");
    return score;
}

}  // namespace cfa
