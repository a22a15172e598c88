#pragma once

#include <string>
#include <vector>

#include "survtree/dataset.hpp"
#include "survtree/step_function.hpp"
#include "survtree/tree.hpp"

namespace survtree {

struct EvaluationReport {
    double ibs = 0.0;
    double ibs_ratio = 0.0;
    double harrell_c = 0.0;
    double uno_c = 0.0;
    double mean_auc = 0.0;
    std::size_t leaf_count = 0;
    std::vector<double> auc_times;
    std::vector<double> auc_values;

    std::string to_json() const;
};

// 1 - loss(tree)/loss(single root leaf), both on `ds` with its own censoring
// curve. Throws DataError::DegenerateBaseline when the root loss is 0.
double ibs_ratio(const SurvivalTree& tree, const BinaryDataset& ds);

// Harrell's concordance over pairs (i, j) with c_i = 1 and y_i < y_j,
// comparing predicted survival at y_i; tied predictions count 0.5.
// Throws DataError when no pair is comparable.
double harrell_c(const std::vector<const StepFunction*>& predictions, const BinaryDataset& ds);

// Same pairs weighted by G^{-2}(y_i-); zero-weight terms are dropped.
double uno_c(const std::vector<const StepFunction*>& predictions, const BinaryDataset& ds);

struct AucCurve {
    std::vector<double> times;   // kept evaluation times
    std::vector<double> values;  // AUC(t)
    double mean_auc = 0.0;       // integrated against the pooled KM curve
};

// Cumulative/dynamic AUC at each evaluation time; times without both a case
// and a control are dropped. Defaults to the distinct death times strictly
// inside (y_min, y_max) when `eval_times` is empty.
AucCurve cumulative_dynamic_auc(const std::vector<const StepFunction*>& predictions,
                                const BinaryDataset& ds,
                                std::vector<double> eval_times = {});

EvaluationReport evaluate(const SurvivalTree& tree, const BinaryDataset& ds);

} // namespace survtree
