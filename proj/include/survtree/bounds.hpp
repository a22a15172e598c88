#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "survtree/bitmask.hpp"
#include "survtree/dataset.hpp"
#include "survtree/survival_core.hpp"

namespace survtree {

// Comparison slack for lower/upper bound updates. Strictly smaller than any
// practical lambda.
inline constexpr double kBoundSlack = 1e-12;

struct BoundConfig {
    double lambda = 0.01;
    std::size_t max_depth = 0;      // 0 = unlimited (capped at M internally)
    std::size_t min_leaf_size = 7;
    bool use_equivalent_points = true;
    bool use_lookahead = true;      // one-step lookahead: a split costs at least 2 lambda
    bool use_incremental_progress = true;  // close nodes whose leaf loss < lambda
    bool use_leaf_caps = true;
    std::optional<std::vector<double>> reference_losses;  // enables guessing

    void validate(std::size_t n_samples) const;
};

struct BoundsPair {
    double lb = 0.0;
    double ub = 0.0;
    bool solved() const { return lb >= ub - kBoundSlack; }
};

// Objective of leaving the subproblem as a single leaf: leaf loss + lambda.
double initial_upper_bound(const Bitmask& support, const BinaryDataset& ds,
                           const BoundConfig& config, LeafScratch& scratch);

// min(ub, max(equivalent-points floor, guessed floor)). The equivalent-points
// floor is (2 lambda + sum of captured equivalent losses) with lookahead, or
// (lambda + sum) without; the guessed floor is lambda + sum of reference
// losses over the support.
double initial_lower_bound(const Bitmask& support, const BinaryDataset& ds,
                           const BoundConfig& config, double upper_bound);

// True when the subproblem must be closed as a leaf: depth budget exhausted,
// leaf loss below lambda (splitting cannot pay for itself), support too small
// to split feasibly, or bounds already converged.
bool fails_bounds(double leaf_loss, double lb, double ub, std::size_t support_count,
                  std::size_t depth_budget, const BoundConfig& config);

// One-step lookahead on a partial tree: every child tree is suboptimal when
// fixed_loss + lambda*(H_t + 1) exceeds the incumbent (strictly).
bool lookahead_prune(double parent_fixed_loss, std::size_t h_t, double incumbent,
                     const BoundConfig& config);

// A terminal split pair in an optimal tree must reduce loss by at least
// lambda relative to its parent-as-leaf.
bool incremental_progress_check(double parent_loss, double left_loss, double right_loss,
                                const BoundConfig& config);

// Global cap on the number of leaves of any tree beating objective r_c.
std::size_t leaf_count_cap(double r_c, double lambda, std::size_t n_features);

// Parent-specific variant: leaves of any child of a partial tree with
// `fixed_loss` over `h_t` leaves.
std::size_t parent_leaf_count_cap(double r_c, double fixed_loss, std::size_t h_t,
                                  double lambda, std::size_t n_features);

} // namespace survtree
