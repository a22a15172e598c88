#include "survtree/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "survtree/bounds.hpp"
#include "survtree/errors.hpp"
#include "survtree/solver.hpp"
#include "survtree/survival_core.hpp"

namespace survtree {

namespace {

// Dataset over resampled rows of `ds`; leaf curves fitted on the resample
// remain valid predictions for the original feature space.
BinaryDataset resample_rows(const BinaryDataset& ds, const std::vector<std::size_t>& rows) {
    std::vector<Bitmask> features(ds.m());
    for (std::size_t j = 0; j < ds.m(); ++j) {
        Bitmask column(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (ds.feature_value(rows[i], j)) column.set(i);
        features[j] = std::move(column);
    }
    std::vector<double> times(rows.size());
    std::vector<std::uint8_t> events(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        times[i] = ds.time(rows[i]);
        events[i] = ds.event(rows[i]);
    }
    return detail::assemble_dataset(std::move(features),
                                    std::vector<std::string>(ds.feature_names()), {}, {},
                                    std::move(times), std::move(events));
}

std::unique_ptr<SurvivalTree::Node> grow(const Bitmask& support, std::size_t budget,
                                         const BinaryDataset& ds, std::size_t min_leaf,
                                         bool subsample, std::mt19937_64& rng,
                                         LeafScratch& scratch) {
    LeafModel here = fit_leaf(support, ds);
    std::size_t count = here.sample_count;
    if (budget == 0 || count < 2 * min_leaf)
        return SurvivalTree::Node::make_leaf(std::move(here.km_curve), count);

    std::vector<std::size_t> candidates(ds.m());
    for (std::size_t j = 0; j < ds.m(); ++j) candidates[j] = j;
    if (subsample) {
        std::size_t want = std::size_t(std::ceil(std::sqrt(double(ds.m()))));
        std::shuffle(candidates.begin(), candidates.end(), rng);
        candidates.resize(std::min(want, candidates.size()));
        std::sort(candidates.begin(), candidates.end());
    }

    std::size_t best_feature = SIZE_MAX;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t j : candidates) {
        std::size_t ones = support.count_and(ds.feature(j));
        std::size_t zeros = count - ones;
        if (ones < min_leaf || zeros < min_leaf) continue;
        auto [left, right] = split_support(support, j, ds);
        double sum = leaf_loss_value(left, ds, scratch) + leaf_loss_value(right, ds, scratch);
        if (sum < best_sum - kBoundSlack) {
            best_sum = sum;
            best_feature = j;
        }
    }
    if (best_feature == SIZE_MAX || best_sum > here.loss)
        return SurvivalTree::Node::make_leaf(std::move(here.km_curve), count);

    auto [left, right] = split_support(support, best_feature, ds);
    return SurvivalTree::Node::make_split(
        best_feature, ds.feature_name(best_feature),
        grow(left, budget - 1, ds, min_leaf, subsample, rng, scratch),
        grow(right, budget - 1, ds, min_leaf, subsample, rng, scratch));
}

} // namespace

ReferenceModel fit_reference(const BinaryDataset& ds, std::size_t n_trees, std::size_t max_depth,
                             std::uint64_t seed, std::size_t min_leaf_size, bool bootstrap,
                             bool feature_subsampling) {
    if (n_trees < 1) throw ConfigError("fit_reference: need at least one tree");
    ReferenceModel model;
    model.max_depth_ = max_depth;
    model.trees_.reserve(n_trees);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, ds.n() - 1);
    std::size_t budget = max_depth == 0 ? ds.m() : std::min(max_depth, ds.m());
    LeafScratch scratch;
    for (std::size_t t = 0; t < n_trees; ++t) {
        if (bootstrap) {
            std::vector<std::size_t> rows(ds.n());
            for (auto& r : rows) r = pick(rng);
            BinaryDataset sample = resample_rows(ds, rows);
            model.trees_.emplace_back(
                grow(sample.full_support(), budget, sample, min_leaf_size, feature_subsampling,
                     rng, scratch));
        } else {
            model.trees_.emplace_back(
                grow(ds.full_support(), budget, ds, min_leaf_size, feature_subsampling, rng,
                     scratch));
        }
    }
    return model;
}

StepFunction ReferenceModel::predict(const BinaryDataset& ds, std::size_t row) const {
    if (trees_.empty()) throw StructureError("predict on an unfitted reference model");

    std::vector<const StepFunction*> curves;
    curves.reserve(trees_.size());
    std::set<double> cuts;
    for (const SurvivalTree& tree : trees_) {
        const StepFunction& c = tree.predict(ds, row);
        curves.push_back(&c);
        for (double t : c.breakpoints()) cuts.insert(t);
    }

    std::vector<double> breakpoints(cuts.begin(), cuts.end());
    std::vector<double> values;
    values.reserve(breakpoints.size());
    double running = 1.0;
    for (double t : breakpoints) {
        double mean = 0.0;
        for (const StepFunction* c : curves) mean += (*c)(t);
        mean /= double(curves.size());
        // averaging across differing breakpoints is already nonincreasing up
        // to rounding; the running minimum pins it down
        running = std::min(running, std::clamp(mean, 0.0, 1.0));
        values.push_back(running);
    }
    return StepFunction(std::move(breakpoints), std::move(values), 1.0);
}

std::vector<double> reference_losses(const ReferenceModel& model, const BinaryDataset& ds) {
    std::vector<double> losses(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        StepFunction curve = model.predict(ds, i);
        losses[i] = sample_loss(curve, ds.time(i), ds.event(i), ds);
    }
    return losses;
}

std::string ReferenceModel::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const SurvivalTree& tree : trees_)
        arr.push_back(nlohmann::json::parse(tree.to_json(0.0, 0.0, max_depth_, false, 0.0)));
    return arr.dump(2);
}

void export_losses(const std::vector<double>& losses, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError(DataError::Kind::MissingFile, "cannot write " + path);
    out << "index,loss\n";
    char buf[64];
    for (std::size_t i = 0; i < losses.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, losses[i]);
        out << buf;
    }
}

std::vector<double> import_losses(const std::string& path, std::size_t n_samples) {
    std::ifstream in(path);
    if (!in) throw DataError(DataError::Kind::MissingFile, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.find("index") == std::string::npos)
        throw DataError(DataError::Kind::UnparseableCell, path + ": expected 'index,loss' header");

    std::vector<double> losses(n_samples, -1.0);
    std::vector<bool> seen(n_samples, false);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError(DataError::Kind::UnparseableCell, path + ": bad row '" + line + "'");
        std::size_t idx = std::stoul(line.substr(0, comma));
        double loss = std::stod(line.substr(comma + 1));
        if (idx >= n_samples)
            throw DataError(DataError::Kind::DuplicateIndex,
                            path + ": index " + std::to_string(idx) + " out of range");
        if (seen[idx])
            throw DataError(DataError::Kind::DuplicateIndex,
                            path + ": duplicate index " + std::to_string(idx));
        if (loss < 0.0)
            throw DataError(DataError::Kind::NegativeLoss,
                            path + ": negative loss at index " + std::to_string(idx));
        seen[idx] = true;
        losses[idx] = loss;
    }
    for (std::size_t i = 0; i < n_samples; ++i)
        if (!seen[i])
            throw DataError(DataError::Kind::MissingIndex,
                            path + ": missing index " + std::to_string(i));
    return losses;
}

} // namespace survtree
