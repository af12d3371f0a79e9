#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cfa {

/// A point of the ambient feature space. Entries are finite by construction
/// (enforced at ingestion and by generators).
using FeatureVector = std::vector<double>;

/// Class labels are contiguous ids starting at 0 within one dataset.
struct ClassLabel {
    int id = -1;
    std::string name;

    friend bool operator==(const ClassLabel& a, const ClassLabel& b) {
        return a.id == b.id;
    }
};

struct LabeledInstance {
    FeatureVector features;
    int label = -1;
};

/// Ground-truth data X: labeled instances plus the feature/class naming.
/// Immutable after construction by convention; all accessors are const.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<LabeledInstance> instances,
            std::vector<std::string> feature_names,
            std::vector<std::string> class_names);

    const std::vector<LabeledInstance>& instances() const { return instances_; }
    const LabeledInstance& operator[](std::size_t i) const { return instances_[i]; }
    std::size_t size() const { return instances_.size(); }
    bool empty() const { return instances_.empty(); }
    std::size_t dimension() const;
    std::size_t n_classes() const { return class_names_.size(); }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<std::string>& class_names() const { return class_names_; }

    /// Subset by instance indices; keeps feature/class naming.
    Dataset subset(const std::vector<std::size_t>& indices) const;

    /// Smallest axis-aligned bounding box of the instances.
    void bounds(FeatureVector& lo, FeatureVector& hi) const;

    /// L2 diameter of the bounding box (generator default scales derive from it).
    double diameter() const;

private:
    std::vector<LabeledInstance> instances_;
    std::vector<std::string> feature_names_;
    std::vector<std::string> class_names_;
};

struct DatasetSplit {
    Dataset train;
    Dataset test;
    std::uint64_t seed = 0;
    double train_fraction = 0.0;
};

enum class DistanceMetric { L0, L1, L2 };

/// Absolute tolerance below which two coordinates count as equal for L0.
inline constexpr double kL0Tolerance = 1e-9;

double distance(DistanceMetric m, const FeatureVector& a, const FeatureVector& b);
double l2_distance(const FeatureVector& a, const FeatureVector& b);
double l1_distance(const FeatureVector& a, const FeatureVector& b);

/// Parses a CSV file with one header row, numeric feature cells and one text
/// label column. Labels map to contiguous ids in first-appearance order.
/// If feature_subset is nonempty, only those columns are kept (in the given
/// order).
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::vector<std::string>& feature_subset = {});

/// Deterministic split: Fisher-Yates shuffle of the index range driven by
/// std::mt19937_64 seeded with `seed`, first round(train_fraction*n) indices
/// to train.
DatasetSplit train_test_split(const Dataset& d, double train_fraction,
                              std::uint64_t seed);

/// Min-max scaler fit on a training set; off by default everywhere.
struct MinMaxScaler {
    FeatureVector lo, hi;

    static MinMaxScaler fit(const Dataset& train);
    FeatureVector transform(const FeatureVector& x) const;
    Dataset transform(const Dataset& d) const;
};

}  // namespace cfa
