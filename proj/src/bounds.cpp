#include "survtree/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "survtree/errors.hpp"

namespace survtree {

void BoundConfig::validate(std::size_t n_samples) const {
    if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
    if (min_leaf_size < 1) throw ConfigError("min_leaf_size must be at least 1");
    if (reference_losses) {
        if (reference_losses->size() != n_samples)
            throw ConfigError("reference losses cover " +
                              std::to_string(reference_losses->size()) + " samples, dataset has " +
                              std::to_string(n_samples));
        for (double v : *reference_losses)
            if (!(v >= 0.0)) throw ConfigError("reference losses must be nonnegative");
    }
}

double initial_upper_bound(const Bitmask& support, const BinaryDataset& ds,
                           const BoundConfig& config, LeafScratch& scratch) {
    if (support.count() < config.min_leaf_size)
        throw StructureError("initial_upper_bound: support below min_leaf_size");
    return leaf_loss_value(support, ds, scratch) + config.lambda;
}

double initial_lower_bound(const Bitmask& support, const BinaryDataset& ds,
                           const BoundConfig& config, double upper_bound) {
    // A split yields at least two leaves (one without lookahead) and cannot
    // avoid the equivalent-set floors.
    double floor = config.use_lookahead ? 2.0 * config.lambda : config.lambda;
    if (config.use_equivalent_points) floor += equivalent_floor(support, ds);

    if (config.reference_losses) {
        double guess = config.lambda;
        const std::vector<double>& ref = *config.reference_losses;
        support.for_each([&](std::size_t i) { guess += ref[i]; });
        floor = std::max(floor, guess);
    }
    return std::min(upper_bound, floor);
}

bool fails_bounds(double leaf_loss, double lb, double ub, std::size_t support_count,
                  std::size_t depth_budget, const BoundConfig& config) {
    if (depth_budget == 0) return true;
    if (config.use_incremental_progress && leaf_loss < config.lambda) return true;
    if (support_count < 2 * config.min_leaf_size) return true;
    if (lb >= ub - kBoundSlack) return true;
    return false;
}

bool lookahead_prune(double parent_fixed_loss, std::size_t h_t, double incumbent,
                     const BoundConfig& config) {
    return parent_fixed_loss + config.lambda * double(h_t) + config.lambda > incumbent;
}

bool incremental_progress_check(double parent_loss, double left_loss, double right_loss,
                                const BoundConfig& config) {
    return parent_loss - left_loss - right_loss >= config.lambda;
}

namespace {

std::size_t power_of_two_cap(std::size_t n_features) {
    if (n_features >= 63) return std::size_t(1) << 63;
    return std::size_t(1) << n_features;
}

} // namespace

std::size_t leaf_count_cap(double r_c, double lambda, std::size_t n_features) {
    std::size_t structural = power_of_two_cap(n_features);
    if (lambda <= 0.0) return structural;
    double q = std::floor(r_c / lambda + 1e-9);
    if (q >= double(structural)) return structural;
    return q < 0.0 ? 0 : std::size_t(q);
}

std::size_t parent_leaf_count_cap(double r_c, double fixed_loss, std::size_t h_t, double lambda,
                                  std::size_t n_features) {
    std::size_t structural = power_of_two_cap(n_features);
    if (lambda <= 0.0) return structural;
    double slack = r_c - fixed_loss - lambda * double(h_t);
    if (slack < 0.0) return std::min(h_t, structural);
    double cap = double(h_t) + std::floor(slack / lambda + 1e-9);
    return cap >= double(structural) ? structural : std::size_t(cap);
}

} // namespace survtree
