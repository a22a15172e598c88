#include "survtree/survival_core.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "survtree/detail/kahan.hpp"
#include "survtree/errors.hpp"

namespace survtree {

StepFunction censoring_distribution(const std::vector<double>& times,
                                    const std::vector<std::uint8_t>& events) {
    std::vector<std::uint8_t> flipped(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) flipped[i] = events[i] ? 0 : 1;
    return km_estimator(times, flipped);
}

double sample_loss(const StepFunction& curve, double y, std::uint8_t event,
                   const BinaryDataset& ds) {
    const TimeGrid& grid = ds.grid();
    if (y > grid.y_max + 1e-12)
        throw ConfigError("sample_loss: observation time beyond the grid");

    // Merge the grid with the curve's breakpoints so every segment has
    // constant integrands. y itself is a grid point for in-sample rows but is
    // inserted anyway for foreign curves.
    std::vector<double> cuts;
    cuts.reserve(grid.size() + curve.size() + 1);
    for (double t : grid.breakpoints) cuts.push_back(t);
    for (double t : curve.breakpoints())
        if (t > 0.0 && t < grid.y_max) cuts.push_back(t);
    if (y < grid.y_max) cuts.push_back(y);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const StepFunction& g = ds.censoring_curve();
    double g_at_death = g.left_limit(y);
    double death_w = (event && g_at_death > 0.0) ? 1.0 / g_at_death : 0.0;

    detail::KahanSum acc;
    double start = 0.0;
    for (double end : cuts) {
        double len = end - start;
        if (len > 0.0) {
            double s = curve(start);
            if (end <= y) {
                double gv = g(start);
                if (gv > 0.0) acc.add((s - 1.0) * (s - 1.0) / gv * len);
            } else if (start >= y && death_w > 0.0) {
                acc.add(s * s * death_w * len);
            }
        }
        start = end;
    }
    return acc.value() * ds.normalizer();
}

namespace {

// Buckets the support by grid index; shared by the leaf fit and the fast path.
// count_at[k]: members observed at grid point k; deaths_at[k]: of those, the
// observed deaths; w0_at[k]: their summed death weights.
void bucket_support(const Bitmask& support, const BinaryDataset& ds, LeafScratch& s) {
    std::size_t k_count = ds.grid().size();
    s.count_at.assign(k_count, 0);
    s.deaths_at.assign(k_count, 0);
    s.w0_at.assign(k_count, 0.0);
    support.for_each([&](std::size_t i) {
        std::size_t k = ds.time_index(i);
        ++s.count_at[k];
        if (ds.event(i)) {
            ++s.deaths_at[k];
            s.w0_at[k] += ds.death_weight(i);
        }
    });
}

} // namespace

double leaf_loss_value(const Bitmask& support, const BinaryDataset& ds, LeafScratch& scratch) {
    bucket_support(support, ds, scratch);
    const TimeGrid& grid = ds.grid();
    std::size_t k_count = grid.size();

    detail::KahanSum acc;
    double survival = 1.0;   // leaf KM value on interval k
    double b_sum = 0.0;      // accumulated death weights, B_k
    std::size_t alive = support.count();
    for (std::size_t k = 0; k < k_count; ++k) {
        double a_k = alive > 0 ? ds.inv_g(k) * double(alive) : 0.0;
        double dt = grid.interval_lengths[k];
        acc.add(dt * (a_k * (survival - 1.0) * (survival - 1.0) + b_sum * survival * survival));
        if (scratch.deaths_at[k] > 0)
            survival *= 1.0 - double(scratch.deaths_at[k]) / double(alive);
        b_sum += scratch.w0_at[k];
        alive -= scratch.count_at[k];
    }
    return acc.value() * ds.normalizer();
}

LeafModel fit_leaf(const Bitmask& support, const BinaryDataset& ds) {
    if (support.empty()) throw ConfigError("fit_leaf: empty support");
    LeafModel leaf;
    leaf.support = support;
    leaf.sample_count = support.count();

    LeafScratch scratch;
    bucket_support(support, ds, scratch);
    const TimeGrid& grid = ds.grid();
    std::size_t k_count = grid.size();
    leaf.toward_one_sum.assign(k_count, 0.0);
    leaf.toward_zero_sum.assign(k_count, 0.0);

    std::vector<double> km_breaks, km_values;
    detail::KahanSum acc;
    double survival = 1.0;
    double b_sum = 0.0;
    std::size_t alive = leaf.sample_count;
    for (std::size_t k = 0; k < k_count; ++k) {
        leaf.toward_one_sum[k] = alive > 0 ? ds.inv_g(k) * double(alive) : 0.0;
        leaf.toward_zero_sum[k] = b_sum;
        double dt = grid.interval_lengths[k];
        acc.add(dt * (leaf.toward_one_sum[k] * (survival - 1.0) * (survival - 1.0)
                      + b_sum * survival * survival));
        if (scratch.deaths_at[k] > 0) {
            survival *= 1.0 - double(scratch.deaths_at[k]) / double(alive);
            km_breaks.push_back(grid.breakpoints[k]);
            km_values.push_back(survival);
        }
        b_sum += scratch.w0_at[k];
        alive -= scratch.count_at[k];
    }
    leaf.loss = acc.value() * ds.normalizer();
    leaf.km_curve = StepFunction(std::move(km_breaks), std::move(km_values), 1.0);
    return leaf;
}

double equivalent_loss(const EquivalentSet& set, const BinaryDataset& ds) {
    const TimeGrid& grid = ds.grid();
    detail::KahanSum acc;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double a = set.toward_one_sum[k];
        double b = set.toward_zero_sum[k];
        if (a > 0.0 && b > 0.0)
            acc.add(grid.interval_lengths[k] * a * b / (a + b));
    }
    return acc.value() * ds.normalizer();
}

double equivalent_floor(const Bitmask& support, const BinaryDataset& ds) {
    detail::KahanSum acc;
    support.for_each([&](std::size_t i) { acc.add(ds.equivalent_floor_share(i)); });
    return acc.value();
}

} // namespace survtree
