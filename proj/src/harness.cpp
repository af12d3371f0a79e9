#include "cfa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace cfa {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw std::runtime_error("config: unknown key \"" + key + "\" in " + where);
}

DistanceMetric parse_metric(const std::string& s) {
    if (s == "L0") return DistanceMetric::L0;
    if (s == "L1") return DistanceMetric::L1;
    if (s == "L2") return DistanceMetric::L2;
    throw std::runtime_error("config: unknown metric \"" + s + "\"");
}

std::string metric_name(DistanceMetric m) {
    switch (m) {
        case DistanceMetric::L0: return "L0";
        case DistanceMetric::L1: return "L1";
        case DistanceMetric::L2: return "L2";
    }
    return "L2";
}

GeneratorSpec parse_generator(const json& j, std::size_t index) {
    const std::string where = "generators[" + std::to_string(index) + "]";
    GeneratorSpec spec;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "growing_spheres") {
        reject_unknown_keys(j,
                            {"kind", "name", "n_per_layer", "eta0", "layer_width_factor",
                             "shrink_factor", "max_radius", "sparsify"},
                            where);
        spec.kind = GeneratorSpec::Kind::GrowingSpheres;
        spec.gs.n_per_layer = j.value("n_per_layer", 1000);
        spec.gs.eta0 = j.value("eta0", 0.0);  // 0 = auto from data diameter
        spec.gs.layer_width_factor = j.value("layer_width_factor", 1.0);
        spec.gs.shrink_factor = j.value("shrink_factor", 0.5);
        spec.gs.max_radius = j.value("max_radius", 0.0);  // 0 = auto
        spec.gs.sparsify = j.value("sparsify", false);
    } else if (kind == "hcls") {
        reject_unknown_keys(j,
                            {"kind", "name", "budget", "budget_growth", "max_budget",
                             "n_candidates", "local_steps", "step_size"},
                            where);
        spec.kind = GeneratorSpec::Kind::Hcls;
        spec.hcls.budget = j.value("budget", 0.0);  // 0 = auto
        spec.hcls.budget_growth = j.value("budget_growth", 2.0);
        spec.hcls.max_budget = j.value("max_budget", 0.0);  // 0 = auto
        spec.hcls.n_candidates = j.value("n_candidates", 20);
        spec.hcls.local_steps = j.value("local_steps", 100);
        spec.hcls.step_size = j.value("step_size", 0.0);  // 0 = auto
    } else if (kind == "wachter") {
        reject_unknown_keys(j,
                            {"kind", "name", "target_score", "lambda_schedule",
                             "n_restarts", "max_iters", "initial_step"},
                            where);
        spec.kind = GeneratorSpec::Kind::Wachter;
        spec.wachter.target_score = j.value("target_score", 0.5);
        if (j.contains("lambda_schedule"))
            spec.wachter.lambda_schedule = j.at("lambda_schedule").get<std::vector<double>>();
        spec.wachter.n_restarts = j.value("n_restarts", 4);
        spec.wachter.max_iters = j.value("max_iters", 200);
        spec.wachter.initial_step = j.value("initial_step", 0.0);  // 0 = auto
    } else {
        throw std::runtime_error("config: unknown generator kind \"" + kind + "\"");
    }
    spec.name = j.value("name", kind);
    return spec;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    const json j = json::parse(json_text);
    reject_unknown_keys(j,
                        {"dataset", "split", "classifier", "diagnostics", "generators",
                         "output_dir", "master_seed"},
                        "top level");
    ExperimentConfig cfg;

    const json& jd = j.at("dataset");
    reject_unknown_keys(jd, {"path", "label_column", "feature_subset", "scale_features"},
                        "dataset");
    cfg.dataset_path = jd.at("path").get<std::string>();
    cfg.label_column = jd.at("label_column").get<std::string>();
    if (jd.contains("feature_subset"))
        cfg.feature_subset = jd.at("feature_subset").get<std::vector<std::string>>();
    cfg.scale_features = jd.value("scale_features", false);

    if (j.contains("split")) {
        const json& js = j.at("split");
        reject_unknown_keys(js, {"train_fraction", "seed"}, "split");
        cfg.train_fraction = js.value("train_fraction", 0.7);
        cfg.split_seed = js.value("seed", std::uint64_t{42});
    }

    if (j.contains("classifier")) {
        const json& jc = j.at("classifier");
        cfg.classifier = jc.at("kind").get<std::string>();
        if (cfg.classifier == "rbf_svm") {
            reject_unknown_keys(jc, {"kind", "c", "gamma", "kkt_tolerance", "max_passes", "seed"},
                                "classifier");
            cfg.svm.c = jc.value("c", 1.0);
            if (jc.contains("gamma") && !jc.at("gamma").is_null())
                cfg.svm.gamma = jc.at("gamma").get<double>();
            cfg.svm.kkt_tolerance = jc.value("kkt_tolerance", 1e-3);
            cfg.svm.max_passes = jc.value("max_passes", 200);
            cfg.svm.seed = jc.value("seed", std::uint64_t{0});
        } else if (cfg.classifier == "knn") {
            reject_unknown_keys(jc, {"kind", "k", "metric"}, "classifier");
            cfg.knn.k = jc.value("k", 5);
            cfg.knn.metric = parse_metric(jc.value("metric", "L2"));
        } else {
            throw std::runtime_error("config: unknown classifier kind \"" + cfg.classifier + "\"");
        }
    }

    if (j.contains("diagnostics")) {
        const json& jg = j.at("diagnostics");
        reject_unknown_keys(jg, {"eps", "metric", "stability", "stability_eps"},
                            "diagnostics");
        if (jg.contains("eps")) {
            if (jg.at("eps").is_string()) {
                if (jg.at("eps").get<std::string>() != "auto")
                    throw std::runtime_error("config: eps must be \"auto\" or a number");
                cfg.eps_policy.mode = EpsilonPolicy::Mode::AutoPerClass;
            } else {
                cfg.eps_policy.mode = EpsilonPolicy::Mode::Fixed;
                cfg.eps_policy.fixed_value = jg.at("eps").get<double>();
            }
        }
        cfg.metric = parse_metric(jg.value("metric", "L2"));
        cfg.stability_enabled = jg.value("stability", false);
        if (jg.contains("stability_eps"))
            cfg.stability_eps = jg.at("stability_eps").get<double>();
    }

    if (!j.contains("generators") || !j.at("generators").is_array() ||
        j.at("generators").empty())
        throw std::runtime_error("config: at least one generator is required");
    std::set<std::string> names;
    for (std::size_t i = 0; i < j.at("generators").size(); ++i) {
        cfg.generators.push_back(parse_generator(j.at("generators")[i], i));
        if (!names.insert(cfg.generators.back().name).second)
            throw std::runtime_error("config: duplicate generator name \"" +
                                     cfg.generators.back().name + "\"");
    }

    cfg.out_dir = j.value("output_dir", "out");
    cfg.master_seed = j.value("master_seed", std::uint64_t{0});

    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
        throw std::runtime_error("config: train_fraction must be in (0,1)");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["dataset"] = {{"path", cfg.dataset_path},
                    {"label_column", cfg.label_column},
                    {"feature_subset", cfg.feature_subset},
                    {"scale_features", cfg.scale_features}};
    j["split"] = {{"train_fraction", cfg.train_fraction}, {"seed", cfg.split_seed}};
    if (cfg.classifier == "rbf_svm") {
        j["classifier"] = {{"kind", "rbf_svm"},
                           {"c", cfg.svm.c},
                           {"kkt_tolerance", cfg.svm.kkt_tolerance},
                           {"max_passes", cfg.svm.max_passes},
                           {"seed", cfg.svm.seed}};
        if (cfg.svm.gamma) j["classifier"]["gamma"] = *cfg.svm.gamma;
    } else {
        j["classifier"] = {{"kind", "knn"},
                           {"k", cfg.knn.k},
                           {"metric", metric_name(cfg.knn.metric)}};
    }
    json jd;
    if (cfg.eps_policy.mode == EpsilonPolicy::Mode::AutoPerClass)
        jd["eps"] = "auto";
    else
        jd["eps"] = cfg.eps_policy.fixed_value;
    jd["metric"] = metric_name(cfg.metric);
    jd["stability"] = cfg.stability_enabled;
    if (cfg.stability_eps) jd["stability_eps"] = *cfg.stability_eps;
    j["diagnostics"] = jd;
    j["generators"] = json::array();
    for (const auto& g : cfg.generators) {
        json jg;
        jg["name"] = g.name;
        switch (g.kind) {
            case GeneratorSpec::Kind::GrowingSpheres:
                jg["kind"] = "growing_spheres";
                jg["n_per_layer"] = g.gs.n_per_layer;
                jg["eta0"] = g.gs.eta0;
                jg["layer_width_factor"] = g.gs.layer_width_factor;
                jg["shrink_factor"] = g.gs.shrink_factor;
                jg["max_radius"] = g.gs.max_radius;
                jg["sparsify"] = g.gs.sparsify;
                break;
            case GeneratorSpec::Kind::Hcls:
                jg["kind"] = "hcls";
                jg["budget"] = g.hcls.budget;
                jg["budget_growth"] = g.hcls.budget_growth;
                jg["max_budget"] = g.hcls.max_budget;
                jg["n_candidates"] = g.hcls.n_candidates;
                jg["local_steps"] = g.hcls.local_steps;
                jg["step_size"] = g.hcls.step_size;
                break;
            case GeneratorSpec::Kind::Wachter:
                jg["kind"] = "wachter";
                jg["target_score"] = g.wachter.target_score;
                jg["lambda_schedule"] = g.wachter.lambda_schedule;
                jg["n_restarts"] = g.wachter.n_restarts;
                jg["max_iters"] = g.wachter.max_iters;
                jg["initial_step"] = g.wachter.initial_step;
                break;
        }
        j["generators"].push_back(std::move(jg));
    }
    j["output_dir"] = cfg.out_dir;
    j["master_seed"] = cfg.master_seed;
    return j.dump(2);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    // splitmix64 over the mixed words
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (a + 1) +
                      0xBF58476D1CE4E5B9ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t hash_vector(const FeatureVector& v) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the raw doubles
    for (double x : v) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xFF;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

namespace {

GeneratorSpec resolve_scales(GeneratorSpec spec, double diameter) {
    auto auto_val = [&](double v, double factor) { return v > 0.0 ? v : factor * diameter; };
    switch (spec.kind) {
        case GeneratorSpec::Kind::GrowingSpheres:
            spec.gs.eta0 = auto_val(spec.gs.eta0, 0.1);
            spec.gs.max_radius = auto_val(spec.gs.max_radius, 2.0);
            break;
        case GeneratorSpec::Kind::Hcls:
            spec.hcls.budget = auto_val(spec.hcls.budget, 0.4);
            spec.hcls.max_budget = auto_val(spec.hcls.max_budget, 2.0);
            spec.hcls.step_size = auto_val(spec.hcls.step_size, 0.02);
            break;
        case GeneratorSpec::Kind::Wachter:
            spec.wachter.initial_step = auto_val(spec.wachter.initial_step, 0.1);
            break;
    }
    return spec;
}

CounterfactualResult run_generator(const GeneratorSpec& spec, const FeatureVector& x,
                                   const Classifier& f, std::uint64_t seed) {
    switch (spec.kind) {
        case GeneratorSpec::Kind::GrowingSpheres: {
            GsConfig c = spec.gs;
            c.seed = seed;
            return growing_spheres(x, f, c);
        }
        case GeneratorSpec::Kind::Hcls: {
            HclsConfig c = spec.hcls;
            c.seed = seed;
            return hcls(x, f, c);
        }
        case GeneratorSpec::Kind::Wachter: {
            WachterConfig c = spec.wachter;
            c.seed = seed;
            return wachter(x, f, c);
        }
    }
    throw std::logic_error("run_generator: unknown kind");
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

AuditOutput run_audit(const ExperimentConfig& cfg, int workers) {
    if (workers < 1) workers = 1;
    AuditOutput out;

    Dataset data = load_csv(cfg.dataset_path, cfg.label_column, cfg.feature_subset);
    out.split = train_test_split(data, cfg.train_fraction, cfg.split_seed);
    if (cfg.scale_features) {
        const MinMaxScaler scaler = MinMaxScaler::fit(out.split.train);
        out.split.train = scaler.transform(out.split.train);
        out.split.test = scaler.transform(out.split.test);
    }
    const Dataset& train = out.split.train;
    const Dataset& test = out.split.test;

    std::unique_ptr<Classifier> model;
    if (cfg.classifier == "rbf_svm")
        model = std::make_unique<RbfSvm>(train_rbf_svm(train, cfg.svm));
    else if (cfg.classifier == "knn")
        model = std::make_unique<KnnClassifier>(train, cfg.knn);
    else
        throw std::runtime_error("run_audit: unknown classifier " + cfg.classifier);
    const Classifier& f = *model;

    out.aggregate.test_accuracy = accuracy(f, test);

    const double diameter = train.diameter();
    std::vector<GeneratorSpec> gens;
    gens.reserve(cfg.generators.size());
    for (const auto& g : cfg.generators) gens.push_back(resolve_scales(g, diameter));

    // Per-class correctly-predicted subsets X^l and their connectedness eps.
    std::vector<Dataset> class_subsets;
    std::vector<std::optional<double>> class_eps(train.n_classes());
    for (std::size_t l = 0; l < train.n_classes(); ++l) {
        class_subsets.push_back(correctly_predicted_subset(f, train, static_cast<int>(l)));
        if (class_subsets.back().size() >= 2)
            class_eps[l] = cfg.eps_policy.resolve(class_subsets.back(), cfg.metric);
    }

    std::optional<double> stab_eps;
    if (cfg.stability_enabled)
        stab_eps = cfg.stability_eps ? *cfg.stability_eps
                                     : default_epsilon(train, DistanceMetric::L2);

    const std::size_t n_tasks = test.size() * gens.size();
    out.rows.assign(n_tasks, AuditRow{});

    const auto do_task = [&](std::size_t task) {
        const std::size_t i = task / gens.size();
        const std::size_t g = task % gens.size();
        const GeneratorSpec& spec = gens[g];
        const FeatureVector& x = test[i].features;

        AuditRow row;
        row.instance = i;
        row.generator = spec.name;
        row.source_label = f.predict(x);
        try {
            const CounterfactualResult res =
                run_generator(spec, x, f, derive_seed(cfg.master_seed, i, g));
            row.success = true;
            row.counterfactual = res.counterfactual;
            row.counterfactual_label = res.counterfactual_label;
            row.distance_l2 = res.distance_l2;
            row.evaluations = res.evaluations;

            const auto cls = static_cast<std::size_t>(res.counterfactual_label);
            const Dataset& same_class = class_subsets[cls];
            if (same_class.size() >= 2) {
                // a diagnostic that is undefined (e.g. duplicate training
                // points zero the proximity denominator) leaves its column
                // empty without failing the row
                try {
                    row.proximity =
                        proximity(res.counterfactual, same_class, cfg.metric).value;
                } catch (const std::exception&) {
                }
                if (class_eps[cls])
                    row.connected =
                        connectedness(res.counterfactual, same_class, *class_eps[cls],
                                      cfg.metric)
                            .connected;
            }
            if (stab_eps) {
                const Explainer explainer =
                    [&](const FeatureVector& z) -> std::optional<FeatureVector> {
                    try {
                        return run_generator(spec, z, f,
                                             derive_seed(cfg.master_seed, hash_vector(z), g))
                            .counterfactual;
                    } catch (const NoCounterfactualError&) {
                        return std::nullopt;
                    }
                };
                try {
                    row.stability = stability(x, train, explainer, *stab_eps).value;
                } catch (const std::runtime_error&) {
                    // undefined neighborhood; left unset
                }
            }
        } catch (const std::exception& ex) {
            row.success = false;
            row.failure = ex.what();
        }
        out.rows[task] = std::move(row);
    };

    if (workers == 1) {
        for (std::size_t t = 0; t < n_tasks; ++t) do_task(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t t = next.fetch_add(1); t < n_tasks;
                     t = next.fetch_add(1))
                    do_task(t);
            });
        for (auto& th : pool) th.join();
    }

    // Aggregate per generator; rows are already in (instance, generator) order.
    for (const auto& spec : gens) {
        GeneratorAggregate agg;
        agg.proximity_histogram.assign(11, 0);
        std::vector<double> stabilities;
        std::size_t n_prox = 0, n_prox_0_3 = 0, n_conn_known = 0, n_not_conn = 0;
        for (const auto& row : out.rows) {
            if (row.generator != spec.name) continue;
            ++agg.n;
            if (!row.success) continue;
            ++agg.n_success;
            if (row.proximity) {
                ++n_prox;
                const double p = *row.proximity;
                agg.max_proximity = std::max(agg.max_proximity, p);
                if (p <= 3.0) ++n_prox_0_3;
                const auto bin = p < 5.0 ? static_cast<std::size_t>(p / 0.5) : 10u;
                ++agg.proximity_histogram[bin];
            }
            if (row.connected) {
                ++n_conn_known;
                if (!*row.connected) ++n_not_conn;
            }
            if (row.stability) stabilities.push_back(*row.stability);
        }
        agg.success_rate =
            agg.n ? static_cast<double>(agg.n_success) / static_cast<double>(agg.n) : 0.0;
        if (n_prox)
            agg.fraction_proximity_in_0_3 =
                static_cast<double>(n_prox_0_3) / static_cast<double>(n_prox);
        if (n_conn_known)
            agg.fraction_non_connected =
                static_cast<double>(n_not_conn) / static_cast<double>(n_conn_known);
        if (!stabilities.empty()) {
            std::sort(stabilities.begin(), stabilities.end());
            agg.stability_min = stabilities.front();
            agg.stability_max = stabilities.back();
            agg.stability_median = stabilities[stabilities.size() / 2];
        }
        out.aggregate.per_generator[spec.name] = std::move(agg);
    }
    return out;
}

std::string rows_to_csv(const std::vector<AuditRow>& rows,
                        const std::vector<std::string>& feature_names) {
    std::ostringstream os;
    os << "instance,generator,source_label,success,counterfactual_label,distance_l2,"
          "proximity,connected,stability,evaluations,failure";
    for (const auto& name : feature_names) os << ",cf_" << name;
    os << "\n";
    for (const auto& row : rows) {
        os << row.instance << ',' << row.generator << ',' << row.source_label << ','
           << (row.success ? 1 : 0) << ',';
        if (row.success) os << row.counterfactual_label;
        os << ',';
        if (row.success) os << fmt_double(row.distance_l2);
        os << ',';
        if (row.proximity) os << fmt_double(*row.proximity);
        os << ',';
        if (row.connected) os << (*row.connected ? 1 : 0);
        os << ',';
        if (row.stability) os << fmt_double(*row.stability);
        os << ',' << row.evaluations << ',' << sanitize(row.failure);
        for (std::size_t j = 0; j < feature_names.size(); ++j) {
            os << ',';
            if (row.success) os << fmt_double(row.counterfactual[j]);
        }
        os << "\n";
    }
    return os.str();
}

std::string aggregate_to_json(const AggregateReport& report) {
    json j;
    j["test_accuracy"] = report.test_accuracy;
    j["generators"] = json::object();
    for (const auto& [name, agg] : report.per_generator) {
        json ja;
        ja["n"] = agg.n;
        ja["n_success"] = agg.n_success;
        ja["success_rate"] = agg.success_rate;
        ja["proximity_histogram"] = agg.proximity_histogram;
        ja["proximity_bin_width"] = 0.5;
        ja["fraction_proximity_in_0_3"] = agg.fraction_proximity_in_0_3;
        ja["max_proximity"] = agg.max_proximity;
        ja["fraction_non_connected"] = agg.fraction_non_connected;
        if (agg.stability_min) {
            ja["stability"] = {{"min", *agg.stability_min},
                               {"median", *agg.stability_median},
                               {"max", *agg.stability_max}};
        }
        j["generators"][name] = std::move(ja);
    }
    return j.dump(2) + "\n";
}

void write_outputs(const ExperimentConfig& cfg, const AuditOutput& out) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const auto dir = fs::path(cfg.out_dir);

    std::ofstream(dir / "audit_rows.csv", std::ios::binary)
        << rows_to_csv(out.rows, out.split.train.feature_names());
    std::ofstream(dir / "aggregate.json", std::ios::binary)
        << aggregate_to_json(out.aggregate);

    json meta;
    meta["config"] = json::parse(config_to_json(cfg));
    meta["master_seed"] = cfg.master_seed;
    meta["n_train"] = out.split.train.size();
    meta["n_test"] = out.split.test.size();
    meta["version"] = "cf-audit 0.1.0";
    std::ofstream(dir / "run_meta.json", std::ios::binary) << meta.dump(2) << "\n";
}

std::vector<GridPoint> export_decision_grid(const Classifier& f,
                                            const FeatureVector& lo,
                                            const FeatureVector& hi, int resolution) {
    if (f.dimension() != 2 || lo.size() != 2 || hi.size() != 2)
        throw std::invalid_argument("export_decision_grid: 2D feature space required");
    if (resolution < 2)
        throw std::invalid_argument("export_decision_grid: resolution must be >= 2");

    std::vector<GridPoint> grid;
    grid.reserve(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
        const double x1 =
            lo[0] + (hi[0] - lo[0]) * static_cast<double>(i) / (resolution - 1);
        for (int k = 0; k < resolution; ++k) {
            const double x2 =
                lo[1] + (hi[1] - lo[1]) * static_cast<double>(k) / (resolution - 1);
            grid.push_back({x1, x2, f.predict({x1, x2})});
        }
    }
    return grid;
}

std::string grid_to_csv(const std::vector<GridPoint>& grid) {
    std::ostringstream os;
    os << "x1,x2,label\n";
    for (const auto& p : grid)
        os << fmt_double(p.x1) << ',' << fmt_double(p.x2) << ',' << p.label << "\n";
    return os.str();
}

}  // namespace cfa
