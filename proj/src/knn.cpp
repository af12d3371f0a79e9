#include "cfa/knn.hpp"

#include <algorithm>
#include <stdexcept>

namespace cfa {

KnnClassifier::KnnClassifier(Dataset train, KnnConfig cfg)
    : train_(std::move(train)), cfg_(cfg) {
    if (cfg_.k <= 0 || static_cast<std::size_t>(cfg_.k) > train_.size())
        throw std::invalid_argument("knn: k must be in [1, n]");
    if (cfg_.k % 2 == 0)
        throw std::invalid_argument("knn: k must be odd");
}

ClassScores KnnClassifier::class_scores(const FeatureVector& x) const {
    if (x.size() != train_.dimension())
        throw std::invalid_argument("knn: dimensionality mismatch");
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(train_.size());
    for (std::size_t i = 0; i < train_.size(); ++i)
        dist.emplace_back(distance(cfg_.metric, x, train_[i].features), i);
    // pair ordering breaks distance ties toward the lower training index
    std::partial_sort(dist.begin(), dist.begin() + cfg_.k, dist.end());

    ClassScores scores(train_.n_classes(), 0.0);
    for (int r = 0; r < cfg_.k; ++r)
        scores[static_cast<std::size_t>(train_[dist[static_cast<std::size_t>(r)].second].label)] +=
            1.0 / static_cast<double>(cfg_.k);
    return scores;
}

}  // namespace cfa
