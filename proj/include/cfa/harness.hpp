#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfa/classifier.hpp"
#include "cfa/dataset.hpp"
#include "cfa/diagnostics.hpp"
#include "cfa/generators.hpp"
#include "cfa/knn.hpp"
#include "cfa/svm.hpp"

namespace cfa {

/// One configured generator. Scale-dependent fields (radii, budgets, step
/// sizes) left at 0 are resolved against the training data's feature-space
/// diameter when the run starts.
struct GeneratorSpec {
    enum class Kind { GrowingSpheres, Hcls, Wachter };
    Kind kind = Kind::GrowingSpheres;
    std::string name;  // unique within a run; defaults to the kind name
    GsConfig gs;
    HclsConfig hcls;
    WachterConfig wachter;
};

struct ExperimentConfig {
    std::string dataset_path;
    std::string label_column;
    std::vector<std::string> feature_subset;  // empty = all columns
    bool scale_features = false;

    double train_fraction = 0.7;
    std::uint64_t split_seed = 42;

    std::string classifier = "rbf_svm";  // or "knn"
    RbfSvmConfig svm;
    KnnConfig knn;

    EpsilonPolicy eps_policy;
    DistanceMetric metric = DistanceMetric::L2;
    bool stability_enabled = false;  // multiplies generator cost; opt-in
    std::optional<double> stability_eps;

    std::vector<GeneratorSpec> generators;

    std::string out_dir = "out";
    std::uint64_t master_seed = 0;
};

/// Parses the JSON config. Unknown keys anywhere are rejected.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct AuditRow {
    std::size_t instance = 0;  // index into the test split
    std::string generator;
    int source_label = -1;
    bool success = false;
    std::string failure;  // set when success is false
    FeatureVector counterfactual;
    int counterfactual_label = -1;
    double distance_l2 = 0.0;
    std::optional<double> proximity;
    std::optional<bool> connected;
    std::optional<double> stability;
    std::size_t evaluations = 0;
};

struct GeneratorAggregate {
    std::size_t n = 0;
    std::size_t n_success = 0;
    double success_rate = 0.0;
    // width-0.5 bins over [0, 5) plus one overflow bin
    std::vector<std::size_t> proximity_histogram;
    double fraction_proximity_in_0_3 = 0.0;
    double max_proximity = 0.0;
    double fraction_non_connected = 0.0;
    std::optional<double> stability_min, stability_median, stability_max;
};

struct AggregateReport {
    double test_accuracy = 0.0;
    std::map<std::string, GeneratorAggregate> per_generator;
};

struct AuditOutput {
    std::vector<AuditRow> rows;
    AggregateReport aggregate;
    DatasetSplit split;
};

/// Runs the full audit: load, split, train, generate one counterfactual per
/// test instance per generator, attach diagnostics. Deterministic from the
/// master seed for any worker count.
AuditOutput run_audit(const ExperimentConfig& cfg, int workers = 1);

/// Writes audit_rows.csv, aggregate.json and run_meta.json into cfg.out_dir.
void write_outputs(const ExperimentConfig& cfg, const AuditOutput& out);

std::string rows_to_csv(const std::vector<AuditRow>& rows,
                        const std::vector<std::string>& feature_names);
std::string aggregate_to_json(const AggregateReport& report);

struct GridPoint {
    double x1, x2;
    int label;
};

/// Uniform resolution x resolution grid of predictions over the bounds;
/// 2D classifiers only.
std::vector<GridPoint> export_decision_grid(const Classifier& f,
                                            const FeatureVector& lo,
                                            const FeatureVector& hi,
                                            int resolution);
std::string grid_to_csv(const std::vector<GridPoint>& grid);

/// Mixes a master seed with per-instance indices (and, for stability probes,
/// point coordinates) into an independent stream seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);
std::uint64_t hash_vector(const FeatureVector& v);

}  // namespace cfa
