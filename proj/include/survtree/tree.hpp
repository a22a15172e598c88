#pragma once

#include <memory>
#include <string>
#include <vector>

#include "survtree/dataset.hpp"
#include "survtree/survival_core.hpp"

namespace survtree {

// Recursive survival tree. Internal nodes test one binary feature
// (left = 0, right = 1); leaves carry the Kaplan-Meier curve fitted on their
// training support.
class SurvivalTree {
public:
    struct Node {
        bool is_leaf = true;
        // internal
        std::size_t feature = 0;
        std::string feature_name;
        std::unique_ptr<Node> left, right;
        // leaf
        StepFunction curve;
        std::size_t sample_count = 0;

        static std::unique_ptr<Node> make_leaf(StepFunction curve, std::size_t n);
        static std::unique_ptr<Node> make_split(std::size_t feature, std::string name,
                                                std::unique_ptr<Node> left,
                                                std::unique_ptr<Node> right);
    };

    SurvivalTree() = default;
    explicit SurvivalTree(std::unique_ptr<Node> root) : root_(std::move(root)) {}

    const Node& root() const { return *root_; }
    bool empty() const { return root_ == nullptr; }

    std::size_t leaf_count() const;
    std::size_t depth() const;

    // Leaf curve a feature vector is routed to. The row is looked up in `ds`.
    const StepFunction& predict(const BinaryDataset& ds, std::size_t row) const;

    // Training-style loss on `ds` (its own grid and censoring curve), summed
    // exactly per sample. Throws StructureError if leaf supports recomputed on
    // `ds` do not partition the samples when `check_partition` is set.
    double loss(const BinaryDataset& ds) const;

    double objective(const BinaryDataset& ds, double lambda) const {
        return loss(ds) + lambda * double(leaf_count());
    }

    // Routes every sample of ds and returns its leaf curve pointer.
    std::vector<const StepFunction*> predict_all(const BinaryDataset& ds) const;

    std::string to_json(double objective, double lambda, std::size_t max_depth,
                        bool proven_optimal, double gap) const;
    static SurvivalTree from_json(const std::string& text);
    static SurvivalTree from_json_file(const std::string& path);

    std::string to_dot() const;

private:
    std::unique_ptr<Node> root_;
};

// Fits all leaves of a tree-shaped split structure on a dataset; used when a
// tree read back from JSON needs fresh leaf statistics.
double tree_loss(const SurvivalTree& tree, const BinaryDataset& ds);

} // namespace survtree
