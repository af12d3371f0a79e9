#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cfa/harness.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_override,
                int workers) {
    cfa::ExperimentConfig cfg;
    try {
        cfg = cfa::load_config(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
    } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 1;
    }
    try {
        const cfa::AuditOutput out = cfa::run_audit(cfg, workers);
        cfa::write_outputs(cfg, out);
        std::cout << "test accuracy: " << out.aggregate.test_accuracy << "\n";
        for (const auto& [name, agg] : out.aggregate.per_generator) {
            std::cout << name << ": success " << agg.n_success << "/" << agg.n
                      << ", P in [0,3]: " << agg.fraction_proximity_in_0_3
                      << ", max P: " << agg.max_proximity
                      << ", non-connected: " << agg.fraction_non_connected << "\n";
        }
        std::cout << "outputs written to " << cfg.out_dir << "\n";
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "runtime failure: " << ex.what() << "\n";
        return 2;
    }
}

int grid_command(const std::string& config_path, const std::string& out_override,
                 int resolution) {
    cfa::ExperimentConfig cfg;
    try {
        cfg = cfa::load_config(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
    } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 1;
    }
    try {
        const cfa::Dataset data =
            cfa::load_csv(cfg.dataset_path, cfg.label_column, cfg.feature_subset);
        cfa::DatasetSplit split =
            cfa::train_test_split(data, cfg.train_fraction, cfg.split_seed);
        cfa::Dataset domain = data;
        if (cfg.scale_features) {
            const auto scaler = cfa::MinMaxScaler::fit(split.train);
            split.train = scaler.transform(split.train);
            domain = scaler.transform(domain);  // grid lives in model space
        }
        std::unique_ptr<cfa::Classifier> model;
        if (cfg.classifier == "rbf_svm")
            model = std::make_unique<cfa::RbfSvm>(cfa::train_rbf_svm(split.train, cfg.svm));
        else
            model = std::make_unique<cfa::KnnClassifier>(split.train, cfg.knn);

        cfa::FeatureVector lo, hi;
        domain.bounds(lo, hi);
        // pad 5% so the decision regions at the data fringe stay visible
        for (std::size_t j = 0; j < lo.size(); ++j) {
            const double pad = 0.05 * (hi[j] - lo[j]);
            lo[j] -= pad;
            hi[j] += pad;
        }
        const auto grid = cfa::export_decision_grid(*model, lo, hi, resolution);

        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream(std::filesystem::path(cfg.out_dir) / "grid.csv", std::ios::binary)
            << cfa::grid_to_csv(grid);
        std::cout << "grid written to " << cfg.out_dir << "/grid.csv\n";
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "runtime failure: " << ex.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Counterfactual explanation audit toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int workers = 1;
    int resolution = 100;

    CLI::App* run = app.add_subcommand("run", "Run a full audit from a config file");
    run->add_option("--config", config_path, "Path to the JSON experiment config")
        ->required();
    run->add_option("--out", out_dir, "Override the config's output directory");
    run->add_option("--workers", workers, "Worker thread count")->check(CLI::PositiveNumber);

    CLI::App* grid = app.add_subcommand("grid", "Export a 2D decision grid");
    grid->add_option("--config", config_path, "Path to the JSON experiment config")
        ->required();
    grid->add_option("--out", out_dir, "Override the config's output directory");
    grid->add_option("--resolution", resolution, "Grid resolution per axis")
        ->check(CLI::Range(2, 10000));

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return run_command(config_path, out_dir, workers);
    return grid_command(config_path, out_dir, resolution);
}
