#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace survtree {

// Right-continuous piecewise-constant function on [0, inf). The function is
// `initial_value` on [0, breakpoints[0]) and `values[j]` on
// [breakpoints[j], breakpoints[j+1]). Survival curves additionally start at 1
// and are nonincreasing.
class StepFunction {
public:
    StepFunction() : initial_value_(1.0) {}

    StepFunction(std::vector<double> breakpoints, std::vector<double> values,
                 double initial_value = 1.0);

    // f(t), right-continuous.
    double operator()(double t) const;

    // f(t-), the left limit. f(0-) is defined as the initial value.
    double left_limit(double t) const;

    double initial_value() const { return initial_value_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return breakpoints_.size(); }

    bool operator==(const StepFunction& other) const = default;

private:
    std::vector<double> breakpoints_;
    std::vector<double> values_;
    double initial_value_;
};

// Product-limit estimator over (times, events): S(y) = prod_{t_j <= y} (1 - d_j/n_j)
// with d_j the deaths at t_j and n_j the at-risk count. Breakpoints appear only
// at event times. Throws ConfigError on empty input.
StepFunction km_estimator(const std::vector<double>& times,
                          const std::vector<std::uint8_t>& events);

} // namespace survtree
