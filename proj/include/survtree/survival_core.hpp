#pragma once

#include <vector>

#include "survtree/bitmask.hpp"
#include "survtree/dataset.hpp"
#include "survtree/step_function.hpp"

namespace survtree {

// Censoring survival curve: the product-limit estimator with the event
// indicator flipped.
StepFunction censoring_distribution(const std::vector<double>& times,
                                    const std::vector<std::uint8_t>& events);

// Loss contribution of one sample under prediction `curve`:
//   1/(y_max N) [ int_0^{y} (curve-1)^2/G  +  c * int_y^{y_max} curve^2/G(y-) ]
// integrated exactly; `curve` may have breakpoints off the dataset grid.
double sample_loss(const StepFunction& curve, double y, std::uint8_t event,
                   const BinaryDataset& ds);

// Kaplan-Meier curve and aggregated interval weights for one leaf.
struct LeafModel {
    Bitmask support;
    StepFunction km_curve;
    std::vector<double> toward_one_sum;   // A_k
    std::vector<double> toward_zero_sum;  // B_k
    double loss = 0.0;
    std::size_t sample_count = 0;
};

// Reusable per-call scratch for the aggregated leaf computations.
struct LeafScratch {
    std::vector<std::size_t> count_at, deaths_at;
    std::vector<double> w0_at;
};

LeafModel fit_leaf(const Bitmask& support, const BinaryDataset& ds);

// Leaf loss without materializing the curve; the solver's hot path.
double leaf_loss_value(const Bitmask& support, const BinaryDataset& ds, LeafScratch& scratch);

// Unavoidable loss floor of an equivalent set: per interval the quadratic
// A(S-1)^2 + B S^2 is minimized at S = A/(A+B), leaving A B/(A+B).
double equivalent_loss(const EquivalentSet& set, const BinaryDataset& ds);

// Sum of the equivalent-loss floors of all classes captured by `support`.
// Classes always travel whole through splits, so the per-member shares add up
// exactly.
double equivalent_floor(const Bitmask& support, const BinaryDataset& ds);

} // namespace survtree
