#pragma once

namespace survtree::detail {

// Compensated accumulator; interval sums must stay additive to ~1e-10.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

} // namespace survtree::detail
