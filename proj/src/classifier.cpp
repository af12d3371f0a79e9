#include "cfa/classifier.hpp"

#include <stdexcept>

namespace cfa {

int Classifier::predict(const FeatureVector& x) const {
    const ClassScores s = class_scores(x);
    int best = 0;
    for (int i = 1; i < static_cast<int>(s.size()); ++i)
        if (s[static_cast<std::size_t>(i)] > s[static_cast<std::size_t>(best)]) best = i;
    return best;
}

double accuracy(const Classifier& f, const Dataset& d) {
    if (d.empty()) throw std::invalid_argument("accuracy: empty dataset");
    std::size_t correct = 0;
    for (const auto& inst : d.instances())
        if (f.predict(inst.features) == inst.label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(d.size());
}

Dataset correctly_predicted_subset(const Classifier& f, const Dataset& d, int label) {
    if (d.empty()) throw std::invalid_argument("correctly_predicted_subset: empty dataset");
    if (label < 0 || static_cast<std::size_t>(label) >= d.n_classes())
        throw std::invalid_argument("correctly_predicted_subset: invalid label");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i].label == label && f.predict(d[i].features) == label) keep.push_back(i);
    return d.subset(keep);
}

}  // namespace cfa
