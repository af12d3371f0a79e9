#include "cfa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace cfa {

Dataset::Dataset(std::vector<LabeledInstance> instances,
                 std::vector<std::string> feature_names,
                 std::vector<std::string> class_names)
    : instances_(std::move(instances)),
      feature_names_(std::move(feature_names)),
      class_names_(std::move(class_names)) {
    if (!instances_.empty()) {
        const std::size_t dim = instances_.front().features.size();
        for (const auto& inst : instances_) {
            if (inst.features.size() != dim)
                throw std::invalid_argument("dataset: mixed dimensionality");
            if (inst.label < 0 ||
                static_cast<std::size_t>(inst.label) >= class_names_.size())
                throw std::invalid_argument("dataset: label id out of range");
            for (double v : inst.features)
                if (!std::isfinite(v))
                    throw std::invalid_argument("dataset: non-finite feature value");
        }
    }
}

std::size_t Dataset::dimension() const {
    return instances_.empty() ? 0 : instances_.front().features.size();
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    std::vector<LabeledInstance> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(instances_.at(i));
    return Dataset(std::move(out), feature_names_, class_names_);
}

void Dataset::bounds(FeatureVector& lo, FeatureVector& hi) const {
    if (empty()) throw std::invalid_argument("bounds: empty dataset");
    const std::size_t dim = dimension();
    lo.assign(dim, std::numeric_limits<double>::infinity());
    hi.assign(dim, -std::numeric_limits<double>::infinity());
    for (const auto& inst : instances_) {
        for (std::size_t j = 0; j < dim; ++j) {
            lo[j] = std::min(lo[j], inst.features[j]);
            hi[j] = std::max(hi[j], inst.features[j]);
        }
    }
}

double Dataset::diameter() const {
    FeatureVector lo, hi;
    bounds(lo, hi);
    double s = 0.0;
    for (std::size_t j = 0; j < lo.size(); ++j) s += (hi[j] - lo[j]) * (hi[j] - lo[j]);
    return std::sqrt(s);
}

namespace {

void check_dims(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("distance: dimensionality mismatch");
}

}  // namespace

double l2_distance(const FeatureVector& a, const FeatureVector& b) {
    check_dims(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double l1_distance(const FeatureVector& a, const FeatureVector& b) {
    check_dims(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

double distance(DistanceMetric m, const FeatureVector& a, const FeatureVector& b) {
    switch (m) {
        case DistanceMetric::L2:
            return l2_distance(a, b);
        case DistanceMetric::L1:
            return l1_distance(a, b);
        case DistanceMetric::L0: {
            check_dims(a, b);
            std::size_t n = 0;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (std::abs(a[i] - b[i]) > kL0Tolerance) ++n;
            return static_cast<double>(n);
        }
    }
    throw std::logic_error("distance: unknown metric");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace and a possible trailing \r
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::vector<std::string>& feature_subset) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file: " + path);
    const std::vector<std::string> header = split_line(line);

    std::size_t label_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_col = i;
    if (label_col == header.size())
        throw std::runtime_error("load_csv: unknown label column: " + label_column);

    std::vector<std::size_t> feature_cols;
    std::vector<std::string> feature_names;
    if (feature_subset.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i == label_col) continue;
            feature_cols.push_back(i);
            feature_names.push_back(header[i]);
        }
    } else {
        for (const auto& name : feature_subset) {
            auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end() || name == label_column)
                throw std::runtime_error("load_csv: unknown feature column: " + name);
            feature_cols.push_back(static_cast<std::size_t>(it - header.begin()));
            feature_names.push_back(name);
        }
    }

    std::vector<LabeledInstance> instances;
    std::vector<std::string> class_names;
    std::unordered_map<std::string, int> class_ids;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("load_csv: row " + std::to_string(row) +
                                     " has " + std::to_string(cells.size()) +
                                     " cells, expected " + std::to_string(header.size()));
        LabeledInstance inst;
        inst.features.reserve(feature_cols.size());
        for (std::size_t k = 0; k < feature_cols.size(); ++k) {
            const std::string& cell = cells[feature_cols[k]];
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != cell.size() || cell.empty() || !std::isfinite(v))
                throw std::runtime_error("load_csv: non-numeric cell at row " +
                                         std::to_string(row) + ", column " +
                                         feature_names[k]);
            inst.features.push_back(v);
        }
        const std::string& label = cells[label_col];
        auto [it, inserted] = class_ids.emplace(label, static_cast<int>(class_names.size()));
        if (inserted) class_names.push_back(label);
        inst.label = it->second;
        instances.push_back(std::move(inst));
    }
    if (instances.empty()) throw std::runtime_error("load_csv: empty dataset");
    return Dataset(std::move(instances), std::move(feature_names), std::move(class_names));
}

DatasetSplit train_test_split(const Dataset& d, double train_fraction,
                              std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_test_split: fraction must be in (0,1)");
    const std::size_t n = d.size();
    const auto n_train = static_cast<std::size_t>(
        std::lround(train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train == n)
        throw std::invalid_argument("train_test_split: degenerate split");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Fisher-Yates, explicit so the permutation is stable across platforms.
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = rng() % (i + 1);
        std::swap(idx[i], idx[j]);
    }

    DatasetSplit split;
    split.seed = seed;
    split.train_fraction = train_fraction;
    split.train = d.subset({idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train)});
    split.test = d.subset({idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end()});
    return split;
}

MinMaxScaler MinMaxScaler::fit(const Dataset& train) {
    MinMaxScaler s;
    train.bounds(s.lo, s.hi);
    return s;
}

FeatureVector MinMaxScaler::transform(const FeatureVector& x) const {
    FeatureVector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double range = hi[j] - lo[j];
        out[j] = range > 0.0 ? (x[j] - lo[j]) / range : 0.0;
    }
    return out;
}

Dataset MinMaxScaler::transform(const Dataset& d) const {
    std::vector<LabeledInstance> out;
    out.reserve(d.size());
    for (const auto& inst : d.instances())
        out.push_back({transform(inst.features), inst.label});
    return Dataset(std::move(out), d.feature_names(), d.class_names());
}

}  // namespace cfa
