#pragma once

#include "cfa/classifier.hpp"
#include "cfa/dataset.hpp"

namespace cfa {

struct KnnConfig {
    int k = 5;  // odd, <= training set size
    DistanceMetric metric = DistanceMetric::L2;
};

/// Majority vote over the k nearest training instances; scores are vote
/// fractions. Distance ties break toward the lower training index.
class KnnClassifier final : public Classifier {
public:
    KnnClassifier(Dataset train, KnnConfig cfg);

    ClassScores class_scores(const FeatureVector& x) const override;
    std::size_t n_classes() const override { return train_.n_classes(); }
    std::size_t dimension() const override { return train_.dimension(); }

private:
    Dataset train_;
    KnnConfig cfg_;
};

}  // namespace cfa
