#include "cfa/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace cfa {

FeatureVector sample_shell(const FeatureVector& center, double r_lo, double r_hi,
                           std::mt19937_64& rng) {
    const std::size_t d = center.size();
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    FeatureVector dir(d);
    double norm = 0.0;
    do {
        norm = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            dir[j] = gauss(rng);
            norm += dir[j] * dir[j];
        }
        norm = std::sqrt(norm);
    } while (norm == 0.0);

    // radius with density proportional to r^(d-1) on [r_lo, r_hi]
    const double dd = static_cast<double>(d);
    const double lo_d = std::pow(r_lo, dd);
    const double hi_d = std::pow(r_hi, dd);
    const double r = std::pow(lo_d + unif(rng) * (hi_d - lo_d), 1.0 / dd);

    FeatureVector out(d);
    for (std::size_t j = 0; j < d; ++j) out[j] = center[j] + r * dir[j] / norm;
    return out;
}

namespace {

CounterfactualResult make_result(const FeatureVector& x, FeatureVector e, int src,
                                 int cf_label, std::string generator,
                                 std::size_t evals) {
    CounterfactualResult r;
    r.distance_l2 = l2_distance(x, e);
    r.counterfactual = std::move(e);
    r.source = x;
    r.source_label = src;
    r.counterfactual_label = cf_label;
    r.generator = std::move(generator);
    r.evaluations = evals;
    return r;
}

}  // namespace

CounterfactualResult growing_spheres(const FeatureVector& x, const Classifier& f,
                                     const GsConfig& cfg) {
    if (cfg.n_per_layer <= 0 || cfg.eta0 <= 0.0 || cfg.layer_width_factor <= 0.0 ||
        !(cfg.shrink_factor > 0.0 && cfg.shrink_factor < 1.0) || cfg.max_radius <= 0.0)
        throw std::invalid_argument("growing_spheres: bad config");

    CountingClassifier probe(f);
    const int src = probe.predict(x);
    std::mt19937_64 rng(cfg.seed);
    const auto n = static_cast<std::size_t>(cfg.n_per_layer);

    // Phase 1: shrink until the ball holds no sampled enemy.
    double eta = cfg.eta0;
    for (int pass = 0; pass < 200 && eta > 1e-12 * cfg.eta0; ++pass) {
        bool enemy_seen = false;
        for (std::size_t i = 0; i < n && !enemy_seen; ++i)
            enemy_seen = probe.predict(sample_shell(x, 0.0, eta, rng)) != src;
        if (!enemy_seen) break;
        eta *= cfg.shrink_factor;
    }

    // Phase 2: grow layers of width layer_width_factor * eta outward.
    const double width = cfg.layer_width_factor * eta;
    for (double a0 = eta; a0 <= cfg.max_radius; a0 += width) {
        const double a1 = a0 + width;
        FeatureVector best;
        double best_dist = std::numeric_limits<double>::infinity();
        int best_label = -1;
        for (std::size_t i = 0; i < n; ++i) {
            FeatureVector z = sample_shell(x, a0, a1, rng);
            const int lz = probe.predict(z);
            if (lz == src) continue;
            const double d = l2_distance(x, z);
            if (d < best_dist) {
                best_dist = d;
                best = std::move(z);
                best_label = lz;
            }
        }
        if (best_label >= 0) {
            if (cfg.sparsify) {
                best = gs_sparsify(x, best, probe);
                best_label = probe.predict(best);
            }
            return make_result(x, std::move(best), src, best_label, "growing_spheres",
                               probe.calls());
        }
    }
    throw NoCounterfactualError("growing_spheres: no counterfactual within max_radius",
                                cfg.max_radius);
}

FeatureVector gs_sparsify(const FeatureVector& x, const FeatureVector& e,
                          const Classifier& f) {
    const int keep = f.predict(e);
    FeatureVector out = e;

    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(e[a] - x[a]) < std::abs(e[b] - x[b]);
    });

    for (std::size_t j : order) {
        if (out[j] == x[j]) continue;
        const double saved = out[j];
        out[j] = x[j];
        if (f.predict(out) != keep) out[j] = saved;
    }
    return out;
}

namespace {

double best_enemy_score(const Classifier& f, const FeatureVector& e, int src) {
    const ClassScores s = f.class_scores(e);
    double best = -1.0;
    for (std::size_t l = 0; l < s.size(); ++l)
        if (static_cast<int>(l) != src) best = std::max(best, s[l]);
    return best;
}

void project_to_ball(FeatureVector& e, const FeatureVector& x, double radius) {
    const double d = l2_distance(x, e);
    if (d <= radius || d == 0.0) return;
    const double scale = radius / d;
    for (std::size_t j = 0; j < e.size(); ++j) e[j] = x[j] + (e[j] - x[j]) * scale;
}

}  // namespace

CounterfactualResult hcls(const FeatureVector& x, const Classifier& f,
                          const HclsConfig& cfg) {
    if (cfg.budget <= 0.0 || cfg.budget_growth <= 1.0 || cfg.max_budget < cfg.budget ||
        cfg.n_candidates <= 0 || cfg.local_steps < 0 || cfg.step_size <= 0.0)
        throw std::invalid_argument("hcls: bad config");

    CountingClassifier probe(f);
    const int src = probe.predict(x);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> coord(0, x.size() - 1);
    std::uniform_int_distribution<int> sign(0, 1);

    double budget = cfg.budget;
    while (true) {
        FeatureVector best;
        double best_obj = -1.0;
        for (int cand = 0; cand < cfg.n_candidates; ++cand) {
            FeatureVector e = sample_shell(x, 0.0, budget, rng);
            double obj = best_enemy_score(probe, e, src);
            for (int step = 0; step < cfg.local_steps; ++step) {
                FeatureVector trial = e;
                trial[coord(rng)] += sign(rng) ? cfg.step_size : -cfg.step_size;
                project_to_ball(trial, x, budget);
                const double trial_obj = best_enemy_score(probe, trial, src);
                if (trial_obj > obj) {
                    obj = trial_obj;
                    e = std::move(trial);
                }
            }
            if (obj > best_obj) {
                best_obj = obj;
                best = std::move(e);
            }
        }
        const int label = probe.predict(best);
        if (label != src)
            return make_result(x, std::move(best), src, label, "hcls", probe.calls());
        if (budget >= cfg.max_budget) break;
        budget = std::min(budget * cfg.budget_growth, cfg.max_budget);
    }
    throw NoCounterfactualError("hcls: no label change within max_budget", cfg.max_budget);
}

CounterfactualResult wachter(const FeatureVector& x, const Classifier& f,
                             const WachterConfig& cfg) {
    if (!(cfg.target_score > 0.0 && cfg.target_score <= 1.0) ||
        cfg.lambda_schedule.empty() || cfg.n_restarts <= 0 || cfg.max_iters <= 0 ||
        cfg.initial_step <= 0.0)
        throw std::invalid_argument("wachter: bad config");
    if (cfg.lambda_schedule.front() <= 0.0 ||
        std::adjacent_find(cfg.lambda_schedule.begin(), cfg.lambda_schedule.end(),
                           [](double a, double b) { return b <= a; }) !=
            cfg.lambda_schedule.end())
        throw std::invalid_argument("wachter: lambda schedule must be strictly increasing");

    CountingClassifier probe(f);
    const int src = probe.predict(x);
    const ClassScores sx = probe.class_scores(x);
    int target = -1;
    double ts = -1.0;
    for (std::size_t l = 0; l < sx.size(); ++l)
        if (static_cast<int>(l) != src && sx[l] > ts) {
            ts = sx[l];
            target = static_cast<int>(l);
        }

    std::mt19937_64 rng(cfg.seed);
    const auto objective = [&](const FeatureVector& e, double lambda) {
        const double s = probe.class_scores(e)[static_cast<std::size_t>(target)];
        const double gap = s - cfg.target_score;
        return lambda * gap * gap + l1_distance(x, e);
    };

    // The descent converges onto the score target, which can sit exactly on the
    // decision boundary where ties resolve to the source class. Cross it with
    // the smallest overshoot that flips the label.
    // binary-search the segment [inside, outside] down to the flip point
    const auto bisect_cross = [&](FeatureVector inside, FeatureVector outside) {
        for (int it = 0; it < 60; ++it) {
            FeatureVector mid(inside.size());
            for (std::size_t j = 0; j < mid.size(); ++j)
                mid[j] = 0.5 * (inside[j] + outside[j]);
            if (probe.predict(mid) != src)
                outside = std::move(mid);
            else
                inside = std::move(mid);
        }
        return outside;
    };
    const auto nudge_across = [&](const FeatureVector& e) -> std::optional<FeatureVector> {
        const bool moved = e != x;
        for (double t = 1e-9; t <= 8.0; t *= 4.0) {
            if (moved) {
                FeatureVector trial(e.size());
                for (std::size_t j = 0; j < e.size(); ++j)
                    trial[j] = x[j] + (e[j] - x[j]) * (1.0 + t);
                if (probe.predict(trial) != src) return bisect_cross(e, std::move(trial));
            }
            const double delta = t * cfg.initial_step;
            for (std::size_t j = 0; j < e.size(); ++j)
                for (double sgn : {1.0, -1.0}) {
                    FeatureVector trial = e;
                    trial[j] += sgn * delta;
                    if (probe.predict(trial) != src) return bisect_cross(e, std::move(trial));
                }
        }
        return std::nullopt;
    };

    FeatureVector best_flip;
    double best_flip_l1 = std::numeric_limits<double>::infinity();
    int best_flip_label = -1;
    for (double lambda : cfg.lambda_schedule) {
        for (int restart = 0; restart < cfg.n_restarts; ++restart) {
            FeatureVector e =
                restart == 0 ? x : sample_shell(x, 0.0, cfg.initial_step * 4.0, rng);
            double obj = objective(e, lambda);
            double step = cfg.initial_step;
            for (int iter = 0; iter < cfg.max_iters && step > 1e-7; ++iter) {
                bool improved = false;
                for (std::size_t j = 0; j < e.size(); ++j) {
                    for (double delta : {step, -step}) {
                        FeatureVector trial = e;
                        trial[j] += delta;
                        const double trial_obj = objective(trial, lambda);
                        if (trial_obj < obj - 1e-12) {
                            obj = trial_obj;
                            e = std::move(trial);
                            improved = true;
                        }
                    }
                }
                if (!improved) step *= 0.5;
            }
            int label = probe.predict(e);
            if (label == src &&
                probe.class_scores(e)[static_cast<std::size_t>(target)] >=
                    cfg.target_score - 0.05) {
                if (auto crossed = nudge_across(e)) {
                    e = std::move(*crossed);
                    label = probe.predict(e);
                }
            }
            if (label != src) {
                const double l1 = l1_distance(x, e);
                if (l1 < best_flip_l1) {
                    best_flip_l1 = l1;
                    best_flip = e;
                    best_flip_label = label;
                }
            }
        }
        if (best_flip_label >= 0)
            return make_result(x, std::move(best_flip), src, best_flip_label, "wachter",
                               probe.calls());
    }
    throw NoCounterfactualError("wachter: no label change over the lambda schedule", 0.0);
}

}  // namespace cfa
