#pragma once

// Shared fixtures and independent oracles. Every oracle below re-derives its
// value from the defining formulas (pointwise curve lookups, explicit pair
// loops, exhaustive recursion) rather than reusing the aggregated paths it
// checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include "survtree/bitmask.hpp"
#include "survtree/bounds.hpp"
#include "survtree/dataset.hpp"
#include "survtree/solver.hpp"
#include "survtree/step_function.hpp"
#include "survtree/survival_core.hpp"
#include "survtree/tree.hpp"

namespace testutil {

using namespace survtree;

inline BinaryDataset make_dataset(const std::vector<std::vector<int>>& rows,
                                  const std::vector<double>& times,
                                  const std::vector<int>& events) {
    std::size_t n = rows.size(), m = rows.front().size();
    std::vector<Bitmask> columns(m, Bitmask(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (rows[i][j]) columns[j].set(i);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < m; ++j) names.push_back("f" + std::to_string(j));
    std::vector<std::uint8_t> ev(events.begin(), events.end());
    return detail::assemble_dataset(std::move(columns), std::move(names), {}, {}, times,
                                    std::move(ev));
}

// Random binary fixture with no constant columns and at least one death.
inline BinaryDataset random_fixture(std::uint64_t seed, std::size_t n, std::size_t m,
                                    double censor_rate) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution bit(0.5);
    std::bernoulli_distribution censored(censor_rate);
    std::uniform_real_distribution<double> time(0.5, 20.0);

    std::vector<std::vector<int>> rows(n, std::vector<int>(m));
    for (std::size_t j = 0; j < m; ++j) {
        while (true) {
            std::size_t ones = 0;
            for (std::size_t i = 0; i < n; ++i) {
                rows[i][j] = bit(rng) ? 1 : 0;
                ones += std::size_t(rows[i][j]);
            }
            if (ones > 0 && ones < n) break;
        }
    }
    std::vector<double> times(n);
    std::vector<int> events(n);
    for (std::size_t i = 0; i < n; ++i) {
        times[i] = std::round(time(rng) * 4.0) / 4.0 + 0.25;  // coarse grid, some ties
        events[i] = censored(rng) ? 0 : 1;
    }
    events[0] = 1;
    return make_dataset(rows, times, events);
}

// ---- product-limit oracle: direct formula evaluation ----

struct KmOracle {
    std::vector<double> times;
    std::vector<std::uint8_t> events;

    double operator()(double y) const {
        std::set<double> distinct(times.begin(), times.end());
        double s = 1.0;
        for (double t : distinct) {
            if (t > y) break;
            std::size_t deaths = 0, at_risk = 0;
            for (std::size_t i = 0; i < times.size(); ++i) {
                if (times[i] >= t) ++at_risk;
                if (times[i] == t && events[i]) ++deaths;
            }
            if (deaths) s *= 1.0 - double(deaths) / double(at_risk);
        }
        return s;
    }
    double left_limit(double y) const {
        std::set<double> distinct(times.begin(), times.end());
        double s = 1.0;
        for (double t : distinct) {
            if (t >= y) break;
            std::size_t deaths = 0, at_risk = 0;
            for (std::size_t i = 0; i < times.size(); ++i) {
                if (times[i] >= t) ++at_risk;
                if (times[i] == t && events[i]) ++deaths;
            }
            if (deaths) s *= 1.0 - double(deaths) / double(at_risk);
        }
        return s;
    }
};

inline KmOracle censoring_oracle(const BinaryDataset& ds) {
    std::vector<std::uint8_t> flipped(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) flipped[i] = ds.event(i) ? 0 : 1;
    return KmOracle{ds.times(), flipped};
}

// ---- loss oracles ----

// Riemann sum with subintervals nested inside grid intervals, so the
// piecewise-constant integrand is sampled exactly; `total_points` midpoints.
inline double riemann_sample_loss(const StepFunction& curve, double y, bool event,
                                  const BinaryDataset& ds, std::size_t total_points = 10000) {
    const TimeGrid& grid = ds.grid();
    std::size_t per = std::max<std::size_t>(1, total_points / grid.size());
    KmOracle g = censoring_oracle(ds);
    double death_denom = g.left_limit(y);
    double acc = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double a = grid.interval_start(k), b = grid.breakpoints[k];
        double h = (b - a) / double(per);
        for (std::size_t p = 0; p < per; ++p) {
            double mid = a + (double(p) + 0.5) * h;
            double s = curve(mid);
            if (mid < y) {
                double gv = g(mid);
                if (gv > 0) acc += (s - 1.0) * (s - 1.0) / gv * h;
            } else if (event && death_denom > 0) {
                acc += s * s / death_denom * h;
            }
        }
    }
    return acc / (grid.y_max * double(ds.n()));
}

// Outer loop over grid intervals, inner loop over samples, with pointwise
// curve lookups and explicit indicator tests.
inline double double_loop_tree_loss(const std::vector<const StepFunction*>& predictions,
                                    const BinaryDataset& ds) {
    const TimeGrid& grid = ds.grid();
    KmOracle g = censoring_oracle(ds);
    double total = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double a = grid.interval_start(k), b = grid.breakpoints[k];
        double mid = 0.5 * (a + b);
        double bs = 0.0;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            double s = (*predictions[i])(mid);
            if (ds.time(i) <= mid) {
                if (ds.event(i)) {
                    double gi = g.left_limit(ds.time(i));
                    if (gi > 0) bs += s * s / gi;
                }
            } else {
                double gv = g(mid);
                if (gv > 0) bs += (s - 1.0) * (s - 1.0) / gv;
            }
        }
        total += (b - a) * bs / double(ds.n());
    }
    return total / grid.y_max;
}

// Per-interval grid search over step values in {0, 0.01, ..., 1}; A and B are
// rebuilt from the weight definitions.
inline double grid_search_equivalent_loss(const std::vector<std::size_t>& members,
                                          const BinaryDataset& ds) {
    const TimeGrid& grid = ds.grid();
    KmOracle g = censoring_oracle(ds);
    double total = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double a_k = 0.0, b_k = 0.0;
        double start = grid.interval_start(k), end = grid.breakpoints[k];
        double mid = 0.5 * (start + end);
        for (std::size_t i : members) {
            if (end <= ds.time(i)) {
                double gv = g(mid);
                if (gv > 0) a_k += 1.0 / gv;
            } else if (start >= ds.time(i) && ds.event(i)) {
                double gi = g.left_limit(ds.time(i));
                if (gi > 0) b_k += 1.0 / gi;
            }
        }
        double best = std::numeric_limits<double>::infinity();
        for (int step = 0; step <= 100; ++step) {
            double s = double(step) / 100.0;
            best = std::min(best, a_k * (s - 1.0) * (s - 1.0) + b_k * s * s);
        }
        total += (end - start) * best;
    }
    return total / (grid.y_max * double(ds.n()));
}

// ---- exhaustive optimum: memoized recursion over every feasible tree ----

struct BruteForce {
    const BinaryDataset& ds;
    double lambda;
    std::size_t min_leaf;
    std::map<std::pair<std::vector<std::uint64_t>, std::size_t>, double> memo;

    static std::vector<std::uint64_t> key_bits(const Bitmask& support) {
        std::vector<std::uint64_t> k;
        support.for_each([&](std::size_t i) {
            if (k.size() <= i / 64) k.resize(i / 64 + 1, 0);
            k[i / 64] |= std::uint64_t(1) << (i % 64);
        });
        return k;
    }

    double leaf_objective(const Bitmask& support) {
        LeafModel leaf = fit_leaf(support, ds);
        double loss = 0.0;
        support.for_each([&](std::size_t i) {
            loss += sample_loss(leaf.km_curve, ds.time(i), ds.event(i), ds);
        });
        return loss + lambda;
    }

    double optimum(const Bitmask& support, std::size_t depth) {
        auto key = std::make_pair(key_bits(support), depth);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;

        double best = leaf_objective(support);
        std::size_t count = support.count();
        if (depth > 0 && count >= 2 * min_leaf) {
            for (std::size_t j = 0; j < ds.m(); ++j) {
                std::size_t ones = support.count_and(ds.feature(j));
                if (ones < min_leaf || count - ones < min_leaf) continue;
                auto [left, right] = split_support(support, j, ds);
                best = std::min(best, optimum(left, depth - 1) + optimum(right, depth - 1));
            }
        }
        memo.emplace(std::move(key), best);
        return best;
    }

    // Optimal tree under the same tie-breaks as the solver: leaf first, then
    // smallest feature.
    std::unique_ptr<SurvivalTree::Node> best_tree(const Bitmask& support, std::size_t depth) {
        double best = optimum(support, depth);
        double leaf_obj = leaf_objective(support);
        if (leaf_obj <= best + 1e-12) {
            LeafModel leaf = fit_leaf(support, ds);
            return SurvivalTree::Node::make_leaf(std::move(leaf.km_curve), leaf.sample_count);
        }
        std::size_t count = support.count();
        for (std::size_t j = 0; j < ds.m(); ++j) {
            std::size_t ones = support.count_and(ds.feature(j));
            if (ones < min_leaf || count - ones < min_leaf) continue;
            auto [left, right] = split_support(support, j, ds);
            if (optimum(left, depth - 1) + optimum(right, depth - 1) <= best + 1e-12)
                return SurvivalTree::Node::make_split(j, ds.feature_name(j),
                                                      best_tree(left, depth - 1),
                                                      best_tree(right, depth - 1));
        }
        throw std::logic_error("brute force: no achieving split");
    }
};

// ---- random tree structures for loss equivalence checks ----

struct RandomPartition {
    std::vector<Bitmask> leaf_supports;
    std::vector<StepFunction> leaf_curves;
    std::vector<const StepFunction*> predictions;  // per sample
    double aggregated_loss = 0.0;                  // sum of leaf_loss_value
};

inline RandomPartition random_partition(const BinaryDataset& ds, std::uint64_t seed,
                                        std::size_t max_splits = 3) {
    std::mt19937_64 rng(seed);
    RandomPartition out;
    std::vector<Bitmask> open{ds.full_support()};
    std::uniform_int_distribution<std::size_t> feature(0, ds.m() - 1);
    std::size_t splits = 0;
    while (!open.empty()) {
        Bitmask support = std::move(open.back());
        open.pop_back();
        bool try_split = splits < max_splits && support.count() >= 2;
        if (try_split) {
            std::size_t j = feature(rng);
            std::size_t ones = support.count_and(ds.feature(j));
            if (ones > 0 && ones < support.count()) {
                auto [left, right] = split_support(support, j, ds);
                open.push_back(std::move(left));
                open.push_back(std::move(right));
                ++splits;
                continue;
            }
        }
        out.leaf_supports.push_back(std::move(support));
    }
    LeafScratch scratch;
    out.predictions.assign(ds.n(), nullptr);
    out.leaf_curves.reserve(out.leaf_supports.size());
    for (const Bitmask& support : out.leaf_supports) {
        out.aggregated_loss += leaf_loss_value(support, ds, scratch);
        out.leaf_curves.push_back(fit_leaf(support, ds).km_curve);
    }
    for (std::size_t l = 0; l < out.leaf_supports.size(); ++l)
        out.leaf_supports[l].for_each(
            [&](std::size_t i) { out.predictions[i] = &out.leaf_curves[l]; });
    return out;
}

} // namespace testutil
