#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "survtree/bitmask.hpp"
#include "survtree/step_function.hpp"

namespace survtree {

// Raw tabular survival data as loaded from CSV. Feature cells are either
// numeric or categorical; a column is numeric only if every retained cell
// parses as a real number.
struct RawColumn {
    std::string name;
    bool numeric = true;
    std::vector<double> numeric_values;      // filled when numeric
    std::vector<std::string> string_values;  // filled when categorical
};

struct RawDataset {
    std::vector<RawColumn> columns;      // feature columns only
    std::vector<double> times;           // y_i > 0
    std::vector<std::uint8_t> events;    // c_i in {0,1}; 1 = observed death
    std::size_t dropped_missing = 0;     // rows removed for missing cells

    std::size_t n() const { return times.size(); }
    std::size_t n_raw_features() const { return columns.size(); }
};

struct CsvSchema {
    std::string time_column;
    std::string event_column;
};

// Parses a CSV file with a header row. Rows containing missing cells
// (empty, NA, NaN, ?) are dropped. Throws DataError for a missing file or
// column, an unparseable time/event cell, zero usable rows, or data with no
// observed death.
RawDataset load_csv(const std::string& path, const CsvSchema& schema);
RawDataset load_csv(std::istream& in, const CsvSchema& schema, const std::string& display_name = "<stream>");

// Binarization strategy for numeric features. Categorical features are always
// dummy-encoded (one column per category beyond the first).
struct BinarizeStrategy {
    enum class Kind { AllThresholds, EqualWidth };
    Kind kind = Kind::AllThresholds;
    int bins = 4;                                   // for EqualWidth
    std::map<std::string, Kind> per_feature;        // optional overrides
    std::map<std::string, int> per_feature_bins;

    static BinarizeStrategy all_thresholds() { return {}; }
    static BinarizeStrategy equal_width(int b) { return {Kind::EqualWidth, b, {}, {}}; }
};

// Partition of the grid into K half-open intervals. Interval k (0-based)
// spans [t_{k-1}, t_k) with t_{-1} = 0; breakpoints are the distinct observed
// times in increasing order, the last one being y_max.
struct TimeGrid {
    std::vector<double> breakpoints;
    std::vector<double> interval_lengths;
    double y_max = 0.0;

    std::size_t size() const { return breakpoints.size(); }
    double interval_start(std::size_t k) const { return k == 0 ? 0.0 : breakpoints[k - 1]; }
};

// Per-sample loss weights, stored in factored form. For sample i with death
// index m_i (position of y_i on the grid):
//   toward_one(k)  = 1/G(interval k)     for k <= m_i, else 0
//   toward_zero(k) = c_i / G(y_i-)       for k >  m_i, else 0
// where G(interval k) is the censoring survival value on [t_{k-1}, t_k).
class WeightVector {
public:
    WeightVector(const std::vector<double>* inv_g, std::size_t death_index, double death_weight)
        : inv_g_(inv_g), death_index_(death_index), death_weight_(death_weight) {}

    double toward_one(std::size_t k) const { return k <= death_index_ ? (*inv_g_)[k] : 0.0; }
    double toward_zero(std::size_t k) const { return k > death_index_ ? death_weight_ : 0.0; }
    std::size_t death_index() const { return death_index_; }
    double death_weight() const { return death_weight_; }

private:
    const std::vector<double>* inv_g_;
    std::size_t death_index_;
    double death_weight_;
};

// Samples sharing a bitwise-identical feature vector. No split can separate
// them, so their pointwise-minimal loss is an unavoidable floor.
struct EquivalentSet {
    std::vector<std::size_t> member_indices;
    std::vector<double> toward_one_sum;   // A_k over members
    std::vector<double> toward_zero_sum;  // B_k over members
    double equivalent_loss = 0.0;
};

struct FeatureProvenance {
    std::string raw_feature;
    std::string column_name;
    std::string kind;       // "threshold", "bin", "category"
    double threshold = 0.0; // for thresholds
    double bin_low = 0.0, bin_high = 0.0;
    std::string category;
};

class BinaryDataset;

namespace detail {
// Builds a dataset from already-binary columns: grid, censoring weights,
// equivalence classes. Used by binarize, row resampling, and the bindings.
BinaryDataset assemble_dataset(std::vector<Bitmask> features,
                               std::vector<std::string> feature_names,
                               std::vector<FeatureProvenance> provenance,
                               std::vector<std::string> dropped_columns,
                               std::vector<double> times,
                               std::vector<std::uint8_t> events);
} // namespace detail

class BinaryDataset {
public:
    std::size_t n() const { return n_; }
    std::size_t m() const { return features_.size(); }

    const Bitmask& feature(std::size_t j) const { return features_[j]; }
    const std::string& feature_name(std::size_t j) const { return feature_names_[j]; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    bool feature_value(std::size_t i, std::size_t j) const { return features_[j].test(i); }

    double time(std::size_t i) const { return times_[i]; }
    std::uint8_t event(std::size_t i) const { return events_[i]; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<std::uint8_t>& events() const { return events_; }

    const TimeGrid& grid() const { return grid_; }
    std::size_t time_index(std::size_t i) const { return time_index_[i]; }
    const StepFunction& censoring_curve() const { return censoring_curve_; }

    // 1/G on grid interval k, 0 where G has been truncated to 0.
    double inv_g(std::size_t k) const { return inv_g_[k]; }
    const std::vector<double>& inv_g() const { return inv_g_; }
    double death_weight(std::size_t i) const { return death_weight_[i]; }
    WeightVector weights(std::size_t i) const {
        return WeightVector(&inv_g_, time_index_[i], death_weight_[i]);
    }

    // Global objective normalizer 1/(y_max * N).
    double normalizer() const { return normalizer_; }

    const std::vector<EquivalentSet>& classes() const { return classes_; }
    std::size_t class_of(std::size_t i) const { return class_of_[i]; }
    // Per-member share of the owning class's equivalent loss; summing over a
    // support that fully captures its classes yields the exact floor.
    double equivalent_floor_share(std::size_t i) const { return equiv_share_[i]; }

    const std::vector<FeatureProvenance>& provenance() const { return provenance_; }
    std::string binarization_report_json() const;

    Bitmask full_support() const { return Bitmask(n_, true); }

    friend BinaryDataset detail::assemble_dataset(std::vector<Bitmask>, std::vector<std::string>,
                                                  std::vector<FeatureProvenance>,
                                                  std::vector<std::string>, std::vector<double>,
                                                  std::vector<std::uint8_t>);

private:
    std::size_t n_ = 0;
    std::vector<Bitmask> features_;
    std::vector<std::string> feature_names_;
    std::vector<FeatureProvenance> provenance_;
    std::vector<std::string> dropped_columns_;
    std::vector<double> times_;
    std::vector<std::uint8_t> events_;
    std::vector<std::size_t> time_index_;
    TimeGrid grid_;
    StepFunction censoring_curve_;
    std::vector<double> inv_g_;
    std::vector<double> death_weight_;
    double normalizer_ = 0.0;
    std::vector<EquivalentSet> classes_;
    std::vector<std::size_t> class_of_;
    std::vector<double> equiv_share_;
};

// Expands raw features into binary columns, drops constant columns, and
// precomputes the grid, censoring weights and equivalence classes.
// Throws DataError::DegenerateFeatures when nothing survives.
BinaryDataset binarize(const RawDataset& raw, const BinarizeStrategy& strategy);

// Partition of {0..n-1} by exact feature-vector equality, ordered by smallest
// member index. `columns` holds one bitmask per binary feature.
std::vector<std::vector<std::size_t>> equivalence_classes(const std::vector<Bitmask>& columns,
                                                          std::size_t n_samples);

} // namespace survtree
