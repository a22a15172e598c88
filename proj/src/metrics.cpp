#include "survtree/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "survtree/detail/kahan.hpp"
#include "survtree/errors.hpp"
#include "survtree/survival_core.hpp"

namespace survtree {

double ibs_ratio(const SurvivalTree& tree, const BinaryDataset& ds) {
    LeafModel root_leaf = fit_leaf(ds.full_support(), ds);
    if (root_leaf.loss <= 0.0)
        throw DataError(DataError::Kind::DegenerateBaseline,
                        "single-leaf baseline has zero loss");
    return 1.0 - tree.loss(ds) / root_leaf.loss;
}

namespace {

// Shared pair loop for the concordance indices; `weight(i)` supplies the
// per-pair IPCW factor (1 for Harrell).
template <typename WeightFn>
double concordance(const std::vector<const StepFunction*>& predictions, const BinaryDataset& ds,
                   WeightFn&& weight) {
    std::size_t n = ds.n();
    if (predictions.size() != n)
        throw ConfigError("concordance: one prediction per sample required");
    detail::KahanSum num, den;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!ds.event(i)) continue;
        double w = weight(i);
        if (w <= 0.0) continue;
        double y_i = ds.time(i);
        double s_i = (*predictions[i])(y_i);
        for (std::size_t j = 0; j < n; ++j) {
            if (!(y_i < ds.time(j))) continue;
            any = true;
            double s_j = (*predictions[j])(y_i);
            den.add(w);
            if (s_i < s_j) num.add(w);
            else if (s_i == s_j) num.add(0.5 * w);
        }
    }
    if (!any)
        throw DataError(DataError::Kind::NoRows, "concordance: no comparable pairs");
    return num.value() / den.value();
}

} // namespace

double harrell_c(const std::vector<const StepFunction*>& predictions, const BinaryDataset& ds) {
    return concordance(predictions, ds, [](std::size_t) { return 1.0; });
}

double uno_c(const std::vector<const StepFunction*>& predictions, const BinaryDataset& ds) {
    const StepFunction& g = ds.censoring_curve();
    return concordance(predictions, ds, [&](std::size_t i) {
        double gv = g.left_limit(ds.time(i));
        return gv > 0.0 ? 1.0 / (gv * gv) : 0.0;
    });
}

AucCurve cumulative_dynamic_auc(const std::vector<const StepFunction*>& predictions,
                                const BinaryDataset& ds, std::vector<double> eval_times) {
    std::size_t n = ds.n();
    if (predictions.size() != n)
        throw ConfigError("cumulative_dynamic_auc: one prediction per sample required");

    double y_min = *std::min_element(ds.times().begin(), ds.times().end());
    double y_max = ds.grid().y_max;

    if (eval_times.empty()) {
        std::set<double> deaths;
        for (std::size_t i = 0; i < n; ++i)
            if (ds.event(i) && ds.time(i) > y_min && ds.time(i) < y_max) deaths.insert(ds.time(i));
        eval_times.assign(deaths.begin(), deaths.end());
    } else {
        std::sort(eval_times.begin(), eval_times.end());
        for (double t : eval_times)
            if (t <= y_min || t >= y_max)
                throw ConfigError("auc evaluation times must lie strictly inside (y_min, y_max)");
    }

    const StepFunction& g = ds.censoring_curve();
    AucCurve curve;
    for (double t : eval_times) {
        detail::KahanSum num, case_weight;
        std::size_t controls = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (ds.time(j) > t) ++controls;
        if (controls == 0) continue;

        bool any_case = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!ds.event(i) || ds.time(i) > t) continue;
            double gv = g.left_limit(ds.time(i));
            if (gv <= 0.0) continue;
            double w = 1.0 / gv;
            any_case = true;
            case_weight.add(w);
            double s_i = (*predictions[i])(t);
            for (std::size_t j = 0; j < n; ++j) {
                if (ds.time(j) <= t) continue;
                double s_j = (*predictions[j])(t);
                if (s_i < s_j) num.add(w);
                else if (s_i == s_j) num.add(0.5 * w);
            }
        }
        if (!any_case) continue;
        curve.times.push_back(t);
        curve.values.push_back(num.value() / (case_weight.value() * double(controls)));
    }
    if (curve.times.empty())
        throw DataError(DataError::Kind::NoRows, "no valid auc evaluation time");

    // Mean AUC integrates against the drops of the pooled KM curve; times
    // where the curve does not drop carry no mass.
    StepFunction pooled = km_estimator(ds.times(), ds.events());
    detail::KahanSum weighted, mass;
    for (std::size_t k = 0; k < curve.times.size(); ++k) {
        double drop = pooled.left_limit(curve.times[k]) - pooled(curve.times[k]);
        weighted.add(curve.values[k] * drop);
        mass.add(drop);
    }
    if (mass.value() > 0.0) {
        curve.mean_auc = weighted.value() / mass.value();
    } else {
        detail::KahanSum plain;
        for (double v : curve.values) plain.add(v);
        curve.mean_auc = plain.value() / double(curve.values.size());
    }
    return curve;
}

EvaluationReport evaluate(const SurvivalTree& tree, const BinaryDataset& ds) {
    EvaluationReport report;
    LeafModel root_leaf = fit_leaf(ds.full_support(), ds);
    report.ibs = tree.loss(ds);
    if (root_leaf.loss <= 0.0)
        throw DataError(DataError::Kind::DegenerateBaseline,
                        "single-leaf baseline has zero loss");
    report.ibs_ratio = 1.0 - report.ibs / root_leaf.loss;
    report.leaf_count = tree.leaf_count();

    auto predictions = tree.predict_all(ds);
    report.harrell_c = harrell_c(predictions, ds);
    report.uno_c = uno_c(predictions, ds);
    AucCurve auc = cumulative_dynamic_auc(predictions, ds);
    report.mean_auc = auc.mean_auc;
    report.auc_times = std::move(auc.times);
    report.auc_values = std::move(auc.values);
    return report;
}

std::string EvaluationReport::to_json() const {
    nlohmann::json j;
    j["ibs"] = ibs;
    j["ibs_ratio"] = ibs_ratio;
    j["harrell_c"] = harrell_c;
    j["uno_c"] = uno_c;
    j["mean_auc"] = mean_auc;
    j["leaf_count"] = leaf_count;
    j["auc_times"] = auc_times;
    j["auc_values"] = auc_values;
    return j.dump(2);
}

} // namespace survtree
