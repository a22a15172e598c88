#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "survtree/bitmask.hpp"
#include "survtree/bounds.hpp"
#include "survtree/dataset.hpp"
#include "survtree/tree.hpp"

namespace survtree {

// Canonical subproblem identity: which samples are captured and how much
// depth remains. Two split sequences reaching the same support and budget
// share one graph node.
struct SupportKey {
    Bitmask bits;
    std::size_t depth_budget = 0;

    bool operator==(const SupportKey& other) const {
        return depth_budget == other.depth_budget && bits == other.bits;
    }
};

enum class Scheduling {
    Priority,   // count(s)/N - lb, largest first
    Fifo,
    Lifo,
    LowerBound, // smallest lb first
};

struct SolveLimits {
    double time_limit_seconds = 0.0;  // 0 = none
    std::size_t max_graph_nodes = 0;  // 0 = none; exceeding raises ResourceLimitError
};

struct SolverStats {
    std::size_t iterations = 0;    // queue pops
    std::size_t graph_size = 0;    // materialized subproblems
    std::size_t queue_pushes = 0;
    std::size_t created_hits = 0;  // find_or_create calls resolved by lookup
    double elapsed_seconds = 0.0;
    bool hit_time_limit = false;
};

struct SolveResult {
    SurvivalTree tree;
    double objective = 0.0;
    double lower_bound = 0.0;
    bool proven_optimal = false;
    double gap = 0.0;  // (ub - lb) / max(ub, eps)
    SolverStats stats;
};

// Graph/queue limit exceeded; carries the partial stats.
class ResourceLimitError : public std::runtime_error {
public:
    ResourceLimitError(std::string message, SolverStats stats)
        : std::runtime_error(std::move(message)), stats(stats) {}
    SolverStats stats;
};

// Dynamic-programming-with-bounds search for the tree minimizing
// loss + lambda * leaves subject to the depth and leaf-size constraints.
// On time limit the incumbent certificate is returned with the honest gap.
SolveResult solve(const BinaryDataset& ds, const BoundConfig& config,
                  const SolveLimits& limits = {}, Scheduling scheduling = Scheduling::Priority);

// left = samples with feature 0, right = samples with feature 1.
std::pair<Bitmask, Bitmask> split_support(const Bitmask& support, std::size_t feature,
                                          const BinaryDataset& ds);

// Top-down baseline: each node takes the feasible split minimizing the sum of
// child leaf losses; stops on depth, leaf-size, or reduction < lambda.
SurvivalTree greedy_tree(const BinaryDataset& ds, const BoundConfig& config);

} // namespace survtree

template <>
struct std::hash<survtree::SupportKey> {
    std::size_t operator()(const survtree::SupportKey& k) const {
        return k.bits.hash() * 1099511628211ull + k.depth_budget;
    }
};
