#include "survtree/step_function.hpp"

#include <algorithm>
#include <cstddef>
#include <map>

#include "survtree/errors.hpp"

namespace survtree {

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> values,
                           double initial_value)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)),
      initial_value_(initial_value) {
    if (breakpoints_.size() != values_.size())
        throw StructureError("step function: breakpoints/values size mismatch");
    for (std::size_t j = 1; j < breakpoints_.size(); ++j)
        if (breakpoints_[j] <= breakpoints_[j - 1])
            throw StructureError("step function: breakpoints not strictly increasing");
}

double StepFunction::operator()(double t) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    if (it == breakpoints_.begin()) return initial_value_;
    return values_[std::size_t(it - breakpoints_.begin()) - 1];
}

double StepFunction::left_limit(double t) const {
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
    if (it == breakpoints_.begin()) return initial_value_;
    return values_[std::size_t(it - breakpoints_.begin()) - 1];
}

StepFunction km_estimator(const std::vector<double>& times,
                          const std::vector<std::uint8_t>& events) {
    if (times.empty() || times.size() != events.size())
        throw ConfigError("km_estimator: empty or mismatched input");

    // deaths per distinct time, ascending
    std::map<double, std::size_t> deaths, total;
    for (std::size_t i = 0; i < times.size(); ++i) {
        ++total[times[i]];
        if (events[i]) ++deaths[times[i]];
    }

    std::vector<double> breakpoints, values;
    double survival = 1.0;
    std::size_t at_risk = times.size();
    for (const auto& [t, n_t] : total) {
        auto it = deaths.find(t);
        if (it != deaths.end() && it->second > 0) {
            survival *= 1.0 - double(it->second) / double(at_risk);
            breakpoints.push_back(t);
            values.push_back(survival);
        }
        at_risk -= n_t;
    }
    return StepFunction(std::move(breakpoints), std::move(values), 1.0);
}

} // namespace survtree
