#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfa/classifier.hpp"
#include "cfa/dataset.hpp"

namespace cfa {

struct RbfSvmConfig {
    double c = 1.0;
    /// Kernel width; unset means auto-scale: 1 / (n_features * var(all
    /// training feature values)).
    std::optional<double> gamma;
    double kkt_tolerance = 1e-3;
    int max_passes = 200;
    std::uint64_t seed = 0;
};

/// One binary soft-margin machine of the one-vs-rest ensemble.
struct BinarySvm {
    std::vector<FeatureVector> support_vectors;
    std::vector<double> dual_coeffs;  // alpha_i * y_i per support vector
    double bias = 0.0;
    bool converged = true;
    int passes_used = 0;

    double decision_value(const FeatureVector& x, double gamma) const;
};

/// RBF-kernel SVM trained by pairwise dual optimization (maximal-KKT-violation
/// working set). Multiclass via one-vs-rest; scores are the softmax of the
/// per-class decision values.
class RbfSvm final : public Classifier {
public:
    int predict(const FeatureVector& x) const override;
    ClassScores class_scores(const FeatureVector& x) const override;
    std::size_t n_classes() const override { return machines_.size(); }
    std::size_t dimension() const override { return dimension_; }

    std::vector<double> decision_values(const FeatureVector& x) const;
    double gamma() const { return gamma_; }
    double c() const { return c_; }
    bool converged() const;
    const std::vector<BinarySvm>& machines() const { return machines_; }
    const std::vector<std::string>& class_names() const { return class_names_; }

    std::string to_json() const;
    static RbfSvm from_json(const std::string& text);

    friend RbfSvm train_rbf_svm(const Dataset& train, const RbfSvmConfig& cfg);

private:
    std::vector<BinarySvm> machines_;  // one per class, index = class id
    std::vector<std::string> class_names_;
    double gamma_ = 1.0;
    double c_ = 1.0;
    std::size_t dimension_ = 0;
};

RbfSvm train_rbf_svm(const Dataset& train, const RbfSvmConfig& cfg);

/// Exposed for testing: trains one binary machine on labels y in {-1,+1}.
/// Returns per-point alphas alongside the packed machine.
struct BinarySvmTraining {
    BinarySvm machine;
    std::vector<double> alphas;  // one per training point, 0 <= alpha <= c
};
BinarySvmTraining train_binary_svm(const std::vector<FeatureVector>& points,
                                   const std::vector<int>& y, double c, double gamma,
                                   double kkt_tolerance, int max_passes,
                                   std::uint64_t seed);

double rbf_kernel(const FeatureVector& a, const FeatureVector& b, double gamma);

/// sklearn-style "scale" default: 1 / (n_features * variance of the flattened
/// training feature matrix).
double auto_scale_gamma(const Dataset& train);

}  // namespace cfa
