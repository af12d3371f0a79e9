#include "cfa/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace cfa {

double rbf_kernel(const FeatureVector& a, const FeatureVector& b, double gamma) {
    const double d = l2_distance(a, b);
    return std::exp(-gamma * d * d);
}

double auto_scale_gamma(const Dataset& train) {
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (const auto& inst : train.instances()) {
        for (double v : inst.features) {
            sum += v;
            sum2 += v * v;
            ++n;
        }
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sum2 / static_cast<double>(n) - mean * mean;
    if (var <= 0.0) return 1.0;
    return 1.0 / (static_cast<double>(train.dimension()) * var);
}

double BinarySvm::decision_value(const FeatureVector& x, double gamma) const {
    double s = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i)
        s += dual_coeffs[i] * rbf_kernel(support_vectors[i], x, gamma);
    return s;
}

BinarySvmTraining train_binary_svm(const std::vector<FeatureVector>& points,
                                   const std::vector<int>& y, double c, double gamma,
                                   double kkt_tolerance, int max_passes,
                                   std::uint64_t seed) {
    const std::size_t n = points.size();
    if (n == 0 || y.size() != n) throw std::invalid_argument("train_binary_svm: bad input");
    if (c <= 0.0 || gamma <= 0.0 || kkt_tolerance <= 0.0 || max_passes <= 0)
        throw std::invalid_argument("train_binary_svm: bad hyperparameters");

    // Full kernel cache; the trainer targets desk-scale problems.
    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            K[i][j] = K[j][i] = rbf_kernel(points[i], points[j], gamma);

    // Dual problem: minimize 1/2 a^T Q a - e^T a, Q_ij = y_i y_j K_ij,
    // subject to 0 <= a_i <= c and sum a_i y_i = 0.
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // (Q a)_i - 1
    const auto yd = [&](std::size_t i) { return static_cast<double>(y[i]); };

    std::mt19937_64 rng(seed);
    bool converged = false;
    const long max_updates = static_cast<long>(max_passes) * static_cast<long>(n);
    long updates = 0;
    int passes = 0;
    for (; updates < max_updates; ++updates) {
        // Maximal-violating pair: i maximizes -y_i grad_i over I_up,
        // j minimizes it over I_low. Ties broken at random.
        double up_best = -std::numeric_limits<double>::infinity();
        double low_best = std::numeric_limits<double>::infinity();
        std::ptrdiff_t i = -1, j = -1;
        std::size_t up_ties = 0, low_ties = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -yd(t) * grad[t];
            const bool in_up = (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
            const bool in_low = (y[t] < 0 && alpha[t] < c) || (y[t] > 0 && alpha[t] > 0);
            if (in_up) {
                if (v > up_best) {
                    up_best = v;
                    i = static_cast<std::ptrdiff_t>(t);
                    up_ties = 1;
                } else if (v == up_best && rng() % ++up_ties == 0) {
                    i = static_cast<std::ptrdiff_t>(t);
                }
            }
            if (in_low) {
                if (v < low_best) {
                    low_best = v;
                    j = static_cast<std::ptrdiff_t>(t);
                    low_ties = 1;
                } else if (v == low_best && rng() % ++low_ties == 0) {
                    j = static_cast<std::ptrdiff_t>(t);
                }
            }
        }
        if (i < 0 || j < 0 || up_best - low_best <= kkt_tolerance) {
            converged = true;
            break;
        }
        const auto si = static_cast<std::size_t>(i);
        const auto sj = static_cast<std::size_t>(j);

        // Two-variable analytic step along d_i = y_i, d_j = -y_j.
        double quad = K[si][si] + K[sj][sj] - 2.0 * K[si][sj];
        quad = std::max(quad, 1e-12);
        double t_step = (up_best - low_best) / quad;
        double t_max = (y[si] > 0) ? c - alpha[si] : alpha[si];
        t_max = std::min(t_max, (y[sj] > 0) ? alpha[sj] : c - alpha[sj]);
        t_step = std::min(t_step, t_max);
        if (t_step <= 0.0) {
            converged = true;  // numerically stuck at the box boundary
            break;
        }
        const double dai = yd(si) * t_step;
        const double daj = -yd(sj) * t_step;
        alpha[si] += dai;
        alpha[sj] += daj;
        // grad_t += Q_ti*dai + Q_tj*daj with Q_ti = y_t y_i K_ti
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += yd(t) * (yd(si) * K[t][si] * dai + yd(sj) * K[t][sj] * daj);
    }
    passes = static_cast<int>((updates + static_cast<long>(n) - 1) / static_cast<long>(n));

    // Recompute gradient-independent bias from the final alphas: midpoint of
    // the feasible interval [max over I_up, min over I_low] of -y_i grad_i.
    double up_best = -std::numeric_limits<double>::infinity();
    double low_best = std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double v = -yd(t) * grad[t];
        const bool in_up = (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
        const bool in_low = (y[t] < 0 && alpha[t] < c) || (y[t] > 0 && alpha[t] > 0);
        if (in_up) up_best = std::max(up_best, v);
        if (in_low) low_best = std::min(low_best, v);
        if (alpha[t] > 0.0 && alpha[t] < c) {
            free_sum += v;
            ++free_count;
        }
    }
    double bias;
    if (free_count > 0)
        bias = free_sum / static_cast<double>(free_count);
    else if (std::isfinite(up_best) && std::isfinite(low_best))
        bias = 0.5 * (up_best + low_best);
    else
        bias = std::isfinite(up_best) ? up_best : (std::isfinite(low_best) ? low_best : 0.0);

    BinarySvmTraining out;
    out.alphas = alpha;
    out.machine.bias = bias;
    out.machine.converged = converged;
    out.machine.passes_used = passes;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            out.machine.support_vectors.push_back(points[t]);
            out.machine.dual_coeffs.push_back(alpha[t] * yd(t));
        }
    }
    return out;
}

RbfSvm train_rbf_svm(const Dataset& train, const RbfSvmConfig& cfg) {
    if (train.empty()) throw std::invalid_argument("train_rbf_svm: empty dataset");
    std::vector<bool> present(train.n_classes(), false);
    for (const auto& inst : train.instances()) present[static_cast<std::size_t>(inst.label)] = true;
    if (std::count(present.begin(), present.end(), true) < 2)
        throw std::invalid_argument("train_rbf_svm: need at least 2 classes present");
    if (cfg.c <= 0.0) throw std::invalid_argument("train_rbf_svm: c must be positive");

    RbfSvm model;
    model.c_ = cfg.c;
    model.gamma_ = cfg.gamma.value_or(auto_scale_gamma(train));
    if (model.gamma_ <= 0.0) throw std::invalid_argument("train_rbf_svm: gamma must be positive");
    model.dimension_ = train.dimension();
    model.class_names_ = train.class_names();

    std::vector<FeatureVector> points;
    points.reserve(train.size());
    for (const auto& inst : train.instances()) points.push_back(inst.features);

    for (std::size_t l = 0; l < train.n_classes(); ++l) {
        std::vector<int> y(train.size());
        for (std::size_t i = 0; i < train.size(); ++i)
            y[i] = train[i].label == static_cast<int>(l) ? +1 : -1;
        auto trained = train_binary_svm(points, y, cfg.c, model.gamma_,
                                        cfg.kkt_tolerance, cfg.max_passes,
                                        cfg.seed + l);
        model.machines_.push_back(std::move(trained.machine));
    }
    return model;
}

std::vector<double> RbfSvm::decision_values(const FeatureVector& x) const {
    if (x.size() != dimension_)
        throw std::invalid_argument("svm: dimensionality mismatch");
    std::vector<double> d;
    d.reserve(machines_.size());
    for (const auto& m : machines_) d.push_back(m.decision_value(x, gamma_));
    return d;
}

int RbfSvm::predict(const FeatureVector& x) const {
    const std::vector<double> d = decision_values(x);
    int best = 0;
    for (int i = 1; i < static_cast<int>(d.size()); ++i)
        if (d[static_cast<std::size_t>(i)] > d[static_cast<std::size_t>(best)]) best = i;
    return best;
}

ClassScores RbfSvm::class_scores(const FeatureVector& x) const {
    std::vector<double> d = decision_values(x);
    const double m = *std::max_element(d.begin(), d.end());
    double z = 0.0;
    for (double& v : d) {
        v = std::exp(v - m);
        z += v;
    }
    for (double& v : d) v /= z;
    return d;
}

bool RbfSvm::converged() const {
    return std::all_of(machines_.begin(), machines_.end(),
                       [](const BinarySvm& m) { return m.converged; });
}

std::string RbfSvm::to_json() const {
    nlohmann::json j;
    j["kernel"] = "rbf";
    j["gamma"] = gamma_;
    j["c"] = c_;
    j["dimension"] = dimension_;
    j["class_names"] = class_names_;
    j["machines"] = nlohmann::json::array();
    for (const auto& m : machines_) {
        nlohmann::json jm;
        jm["support_vectors"] = m.support_vectors;
        jm["dual_coeffs"] = m.dual_coeffs;
        jm["bias"] = m.bias;
        jm["converged"] = m.converged;
        j["machines"].push_back(std::move(jm));
    }
    return j.dump(2);
}

RbfSvm RbfSvm::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("kernel").get<std::string>() != "rbf")
        throw std::runtime_error("svm: unsupported kernel in model file");
    RbfSvm model;
    model.gamma_ = j.at("gamma").get<double>();
    model.c_ = j.at("c").get<double>();
    model.dimension_ = j.at("dimension").get<std::size_t>();
    model.class_names_ = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& jm : j.at("machines")) {
        BinarySvm m;
        m.support_vectors = jm.at("support_vectors").get<std::vector<FeatureVector>>();
        m.dual_coeffs = jm.at("dual_coeffs").get<std::vector<double>>();
        m.bias = jm.at("bias").get<double>();
        m.converged = jm.value("converged", true);
        model.machines_.push_back(std::move(m));
    }
    return model;
}

}  // namespace cfa
