#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "analytic_classifiers.hpp"
#include "cfa/harness.hpp"

using namespace cfa;

namespace {

struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& content) {
        path = std::string("tmp_harness_") + std::to_string(std::rand()) + ".csv";
        std::ofstream(path) << content;
    }
    ~TempCsv() { std::remove(path.c_str()); }
};

std::string two_blob_csv() {
    std::ostringstream os;
    os << "a,b,y\n";
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 0.3);
    for (int i = 0; i < 30; ++i) os << g(rng) << ',' << g(rng) << ",neg\n";
    for (int i = 0; i < 30; ++i) os << 3.0 + g(rng) << ',' << 3.0 + g(rng) << ",pos\n";
    return os.str();
}

std::string base_config(const std::string& csv_path) {
    return R"({
      "dataset": {"path": ")" + csv_path + R"(", "label_column": "y"},
      "split": {"train_fraction": 0.7, "seed": 3},
      "classifier": {"kind": "knn", "k": 3},
      "generators": [{"kind": "growing_spheres", "n_per_layer": 200}],
      "master_seed": 9
    })";
}

}  // namespace

TEST_CASE("config parsing rejects unknown keys everywhere") {
    TempCsv f(two_blob_csv());
    CHECK_THROWS_WITH_AS(parse_config(R"({"datset": {}})"),
                         doctest::Contains("unknown key"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({
          "dataset": {"path": "x.csv", "label_column": "y", "bogus": 1},
          "generators": [{"kind": "hcls"}]
        })"),
        doctest::Contains("bogus"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({
          "dataset": {"path": "x.csv", "label_column": "y"},
          "generators": [{"kind": "growing_spheres", "step_size": 1}]
        })"),
        doctest::Contains("step_size"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"dataset": {"path": "x.csv", "label_column": "y"},
                         "generators": []})"),
        doctest::Contains("at least one generator"), std::runtime_error);
}

TEST_CASE("config round trip keeps the generator list and seeds") {
    TempCsv f(two_blob_csv());
    const ExperimentConfig cfg = parse_config(base_config(f.path));
    const ExperimentConfig cfg2 = parse_config(config_to_json(cfg));
    CHECK(cfg2.dataset_path == cfg.dataset_path);
    CHECK(cfg2.master_seed == 9);
    CHECK(cfg2.generators.size() == 1);
    CHECK(cfg2.generators[0].name == "growing_spheres");
    CHECK(cfg2.split_seed == 3);
}

TEST_CASE("run_audit produces one row per test instance per generator") {
    TempCsv f(two_blob_csv());
    const ExperimentConfig cfg = parse_config(base_config(f.path));
    const AuditOutput out = run_audit(cfg);
    CHECK(out.rows.size() == out.split.test.size());
    CHECK(out.aggregate.test_accuracy == 1.0);  // well-separated blobs
    for (const auto& row : out.rows) {
        REQUIRE(row.success);
        CHECK(row.counterfactual_label != row.source_label);
        CHECK(row.proximity.has_value());
        CHECK(row.connected.has_value());
    }
}

TEST_CASE("audit output is byte-identical across worker counts") {
    TempCsv f(two_blob_csv());
    const ExperimentConfig cfg = parse_config(base_config(f.path));
    const AuditOutput a = run_audit(cfg, 1);
    const AuditOutput b = run_audit(cfg, 4);
    CHECK(rows_to_csv(a.rows, a.split.train.feature_names()) ==
          rows_to_csv(b.rows, b.split.train.feature_names()));
    CHECK(aggregate_to_json(a.aggregate) == aggregate_to_json(b.aggregate));
}

TEST_CASE("aggregate fractions recompute exactly from the rows") {
    TempCsv f(two_blob_csv());
    const ExperimentConfig cfg = parse_config(base_config(f.path));
    const AuditOutput out = run_audit(cfg);
    const auto& agg = out.aggregate.per_generator.at("growing_spheres");

    std::size_t n = 0, ok = 0, prox = 0, in03 = 0, conn_known = 0, not_conn = 0;
    for (const auto& row : out.rows) {
        ++n;
        if (!row.success) continue;
        ++ok;
        if (row.proximity) {
            ++prox;
            if (*row.proximity <= 3.0) ++in03;
        }
        if (row.connected) {
            ++conn_known;
            if (!*row.connected) ++not_conn;
        }
    }
    CHECK(agg.n == n);
    CHECK(agg.n_success == ok);
    CHECK(agg.success_rate == static_cast<double>(ok) / static_cast<double>(n));
    CHECK(agg.fraction_proximity_in_0_3 ==
          static_cast<double>(in03) / static_cast<double>(prox));
    CHECK(agg.fraction_non_connected ==
          static_cast<double>(not_conn) / static_cast<double>(conn_known));
}

TEST_CASE("generator failures are recorded, not fatal") {
    // fixed infeasible hcls budget on a far-apart pair of blobs
    TempCsv f(two_blob_csv());
    std::string cfg_text = R"({
      "dataset": {"path": ")" + f.path + R"(", "label_column": "y"},
      "split": {"train_fraction": 0.7, "seed": 3},
      "classifier": {"kind": "knn", "k": 3},
      "generators": [{"kind": "hcls", "budget": 0.05, "max_budget": 0.05,
                      "n_candidates": 3, "local_steps": 5, "step_size": 0.01}],
      "master_seed": 1
    })";
    const AuditOutput out = run_audit(parse_config(cfg_text));
    for (const auto& row : out.rows) {
        CHECK_FALSE(row.success);
        CHECK_FALSE(row.failure.empty());
        CHECK_FALSE(row.proximity.has_value());
    }
    CHECK(out.aggregate.per_generator.at("hcls").success_rate == 0.0);
}

TEST_CASE("stability column appears when enabled") {
    TempCsv f(two_blob_csv());
    std::string cfg_text = R"({
      "dataset": {"path": ")" + f.path + R"(", "label_column": "y"},
      "split": {"train_fraction": 0.7, "seed": 3},
      "classifier": {"kind": "knn", "k": 3},
      "diagnostics": {"stability": true},
      "generators": [{"kind": "growing_spheres", "n_per_layer": 100}],
      "master_seed": 2
    })";
    const AuditOutput out = run_audit(parse_config(cfg_text));
    bool any = false;
    for (const auto& row : out.rows) any = any || row.stability.has_value();
    CHECK(any);
    CHECK(out.aggregate.per_generator.at("growing_spheres").stability_min.has_value());
}

TEST_CASE("decision grid export") {
    SUBCASE("constant classifier fills the grid with one label") {
        const testing::ConstantClassifier f(2);
        const auto grid = export_decision_grid(f, {0.0, 0.0}, {1.0, 1.0}, 10);
        CHECK(grid.size() == 100);
        for (const auto& p : grid) CHECK(p.label == 0);
    }
    SUBCASE("threshold-in-2D splits the grid at the boundary") {
        const testing::ThresholdClassifier f(0.47, 2);
        const auto grid = export_decision_grid(f, {0.0, 0.0}, {1.0, 1.0}, 21);
        for (const auto& p : grid) {
            const int expect = p.x1 > 0.47 ? 1 : 0;
            CHECK(p.label == expect);
        }
    }
    SUBCASE("non-2D rejected") {
        const testing::ThresholdClassifier f(0.5, 3);
        CHECK_THROWS_AS(export_decision_grid(f, {0, 0, 0}, {1, 1, 1}, 5),
                        std::invalid_argument);
    }
    SUBCASE("csv shape") {
        const testing::ConstantClassifier f(2);
        const auto grid = export_decision_grid(f, {0.0, 0.0}, {1.0, 1.0}, 3);
        std::istringstream is(grid_to_csv(grid));
        std::string line;
        std::getline(is, line);
        CHECK(line == "x1,x2,label");
        int rows = 0;
        while (std::getline(is, line)) ++rows;
        CHECK(rows == 9);
    }
}

TEST_CASE("rows csv revalidates the label-flip contract") {
    TempCsv f(two_blob_csv());
    const AuditOutput out = run_audit(parse_config(base_config(f.path)));
    for (const auto& row : out.rows)
        if (row.success) CHECK(row.counterfactual_label != row.source_label);
    const std::string csv = rows_to_csv(out.rows, out.split.train.feature_names());
    CHECK(csv.rfind("instance,generator,source_label", 0) == 0);
}
