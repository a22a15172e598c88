#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "survtree/dataset.hpp"
#include "survtree/tree.hpp"

namespace survtree {

// Bagged ensemble of greedy trees used to produce per-sample reference losses
// for the guessed lower bound. Prediction is the pointwise mean of member
// leaf curves with monotonicity re-enforced by a running minimum.
class ReferenceModel {
public:
    ReferenceModel() = default;

    const std::vector<SurvivalTree>& trees() const { return trees_; }
    std::size_t n_trees() const { return trees_.size(); }
    std::size_t max_depth() const { return max_depth_; }

    // Ensemble survival curve for row `i` of `ds`, on the ds grid.
    StepFunction predict(const BinaryDataset& ds, std::size_t row) const;

    std::string to_json() const;

    friend ReferenceModel fit_reference(const BinaryDataset& ds, std::size_t n_trees,
                                        std::size_t max_depth, std::uint64_t seed,
                                        std::size_t min_leaf_size, bool bootstrap,
                                        bool feature_subsampling);

private:
    std::vector<SurvivalTree> trees_;
    std::size_t max_depth_ = 0;
};

// Greedy base learners on N-sample bootstrap resamples, sqrt(M) random
// feature candidates per split. Deterministic for a fixed seed.
ReferenceModel fit_reference(const BinaryDataset& ds, std::size_t n_trees,
                             std::size_t max_depth, std::uint64_t seed,
                             std::size_t min_leaf_size = 1, bool bootstrap = true,
                             bool feature_subsampling = true);

// sample_loss of each sample against the ensemble curve for its feature vector.
std::vector<double> reference_losses(const ReferenceModel& model, const BinaryDataset& ds);

// CSV with header "index,loss", 17 significant digits, 0-based row order.
void export_losses(const std::vector<double>& losses, const std::string& path);
std::vector<double> import_losses(const std::string& path, std::size_t n_samples);

} // namespace survtree
