#pragma once

#include <memory>
#include <vector>

#include "cfa/dataset.hpp"

namespace cfa {

/// Per-class scores summing to 1, each in [0,1].
using ClassScores = std::vector<double>;

/// Black-box classifier f. Only predict/class_scores are exposed; trained
/// classifiers are immutable and safe to call concurrently.
class Classifier {
public:
    virtual ~Classifier() = default;

    /// Predicted class id; equals argmax of class_scores with the lowest
    /// class id winning ties.
    virtual int predict(const FeatureVector& x) const;

    virtual ClassScores class_scores(const FeatureVector& x) const = 0;
    virtual std::size_t n_classes() const = 0;
    virtual std::size_t dimension() const = 0;
};

/// Fraction of instances whose prediction equals the true label.
double accuracy(const Classifier& f, const Dataset& d);

/// X^l: instances of d with true label l that f also predicts as l.
Dataset correctly_predicted_subset(const Classifier& f, const Dataset& d, int label);

/// Wrapper counting classifier calls (generators report `evaluations`).
class CountingClassifier final : public Classifier {
public:
    explicit CountingClassifier(const Classifier& inner) : inner_(inner) {}

    int predict(const FeatureVector& x) const override {
        ++calls_;
        return inner_.predict(x);
    }
    ClassScores class_scores(const FeatureVector& x) const override {
        ++calls_;
        return inner_.class_scores(x);
    }
    std::size_t n_classes() const override { return inner_.n_classes(); }
    std::size_t dimension() const override { return inner_.dimension(); }

    std::size_t calls() const { return calls_; }

private:
    const Classifier& inner_;
    mutable std::size_t calls_ = 0;
};

}  // namespace cfa
