#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfa/classifier.hpp"
#include "cfa/dataset.hpp"

namespace cfa {

struct CounterfactualResult {
    FeatureVector counterfactual;
    FeatureVector source;
    int source_label = -1;
    int counterfactual_label = -1;
    double distance_l2 = 0.0;
    std::string generator;
    std::size_t evaluations = 0;  // classifier calls consumed
};

/// Raised when a generator exhausts its search without flipping the label.
class NoCounterfactualError : public std::runtime_error {
public:
    NoCounterfactualError(const std::string& what, double radius_reached)
        : std::runtime_error(what), radius_reached(radius_reached) {}
    double radius_reached;
};

struct GsConfig {
    int n_per_layer = 1000;
    double eta0 = 1.0;                // initial ball radius
    double layer_width_factor = 1.0;  // layer width = factor * final eta
    double shrink_factor = 0.5;
    double max_radius = 1e3;
    bool sparsify = false;
    std::uint64_t seed = 0;
};

struct HclsConfig {
    double budget = 1.0;  // max L2 distance from x
    double budget_growth = 2.0;
    double max_budget = 1e3;
    int n_candidates = 20;
    int local_steps = 100;
    double step_size = 0.05;
    std::uint64_t seed = 0;
};

struct WachterConfig {
    double target_score = 0.5;
    std::vector<double> lambda_schedule = {0.1, 1.0, 10.0, 100.0, 1000.0};
    int n_restarts = 4;
    int max_iters = 200;
    double initial_step = 0.5;
    std::uint64_t seed = 0;
};

/// Shrink a ball around x until it is enemy-free, then grow spherical layers
/// outward and return the L2-closest enemy of the first populated layer.
CounterfactualResult growing_spheres(const FeatureVector& x, const Classifier& f,
                                     const GsConfig& cfg);

/// Greedily reverts coordinates of e toward x (smallest |e_j - x_j| first)
/// while the prediction stays on e's side.
FeatureVector gs_sparsify(const FeatureVector& x, const FeatureVector& e,
                          const Classifier& f);

/// Random-restart hill climbing on the best non-source class score inside a
/// growing budget ball.
CounterfactualResult hcls(const FeatureVector& x, const Classifier& f,
                          const HclsConfig& cfg);

/// Derivative-free coordinate descent on
///   lambda * (score_target(e) - target_score)^2 + |x - e|_1
/// sweeping lambda up the schedule until the label flips.
CounterfactualResult wachter(const FeatureVector& x, const Classifier& f,
                             const WachterConfig& cfg);

/// Uniform sample of the spherical shell {z : r_lo <= |z - center|_2 <= r_hi};
/// radial density proportional to r^(d-1). r_lo = 0 gives the full ball.
FeatureVector sample_shell(const FeatureVector& center, double r_lo, double r_hi,
                           std::mt19937_64& rng);

}  // namespace cfa
