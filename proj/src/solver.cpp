#include "survtree/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

#include "survtree/errors.hpp"

namespace survtree {

std::pair<Bitmask, Bitmask> split_support(const Bitmask& support, std::size_t feature,
                                          const BinaryDataset& ds) {
    if (feature >= ds.m()) throw ConfigError("split_support: feature index out of range");
    Bitmask left = support, right = support;
    left.and_with(ds.feature(feature), /*negate=*/true);
    right.and_with(ds.feature(feature), /*negate=*/false);
    return {std::move(left), std::move(right)};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ChildPair {
    std::uint32_t feature;
    std::uint32_t left, right;
};

struct Node {
    double lb = 0.0, ub = 0.0;
    double leaf_loss = 0.0;
    double leaf_obj = 0.0;
    std::uint32_t count = 0;
    std::uint32_t depth_budget = 0;
    bool expanded = false;
    std::vector<std::uint32_t> parents;
    std::vector<ChildPair> children;

    bool solved() const { return lb >= ub - kBoundSlack; }
};

struct QueueEntry {
    double priority;
    std::uint64_t seq;
    std::uint32_t node;
};
struct QueueOrder {
    // Largest priority first; FIFO among ties.
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
        if (a.priority != b.priority) return a.priority < b.priority;
        return a.seq > b.seq;
    }
};

class Search {
public:
    Search(const BinaryDataset& ds, const BoundConfig& config, const SolveLimits& limits,
           Scheduling scheduling)
        : ds_(ds), config_(config), limits_(limits), scheduling_(scheduling) {}

    SolveResult run();

private:
    std::uint32_t find_or_create(SupportKey key, std::size_t parent);
    void push(std::uint32_t id);
    void expand(std::uint32_t id);
    std::unique_ptr<SurvivalTree::Node> extract(std::uint32_t id, const Bitmask& support) const;

    const BinaryDataset& ds_;
    const BoundConfig& config_;
    const SolveLimits& limits_;
    Scheduling scheduling_;

    std::unordered_map<SupportKey, std::uint32_t> index_;
    std::vector<Node> nodes_;
    std::vector<const SupportKey*> keys_;  // stable: owned by index_
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueOrder> queue_;
    std::uint64_t seq_ = 0;
    LeafScratch scratch_;
    SolverStats stats_;

    static constexpr std::uint32_t kRoot = 0;
};

void Search::push(std::uint32_t id) {
    const Node& node = nodes_[id];
    double priority = 0.0;
    switch (scheduling_) {
        case Scheduling::Priority:
            priority = double(node.count) / double(ds_.n()) - node.lb;
            break;
        case Scheduling::Fifo: priority = -double(seq_); break;
        case Scheduling::Lifo: priority = double(seq_); break;
        case Scheduling::LowerBound: priority = -node.lb; break;
    }
    queue_.push(QueueEntry{priority, seq_++, id});
    ++stats_.queue_pushes;
}

std::uint32_t Search::find_or_create(SupportKey key, std::size_t parent) {
    auto it = index_.find(key);
    if (it != index_.end()) {
        ++stats_.created_hits;
        Node& node = nodes_[it->second];
        if (parent != SIZE_MAX) {
            auto& ps = node.parents;
            std::uint32_t p = std::uint32_t(parent);
            if (std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(p);
        }
        return it->second;
    }

    if (limits_.max_graph_nodes && nodes_.size() >= limits_.max_graph_nodes) {
        stats_.graph_size = nodes_.size();
        throw ResourceLimitError("dependency graph exceeded " +
                                     std::to_string(limits_.max_graph_nodes) + " nodes",
                                 stats_);
    }

    Node node;
    node.count = std::uint32_t(key.bits.count());
    node.depth_budget = std::uint32_t(key.depth_budget);
    node.leaf_loss = leaf_loss_value(key.bits, ds_, scratch_);
    node.leaf_obj = node.leaf_loss + config_.lambda;
    node.ub = node.leaf_obj;
    node.lb = initial_lower_bound(key.bits, ds_, config_, node.ub);
    if (parent != SIZE_MAX) node.parents.push_back(std::uint32_t(parent));

    if (fails_bounds(node.leaf_loss, node.lb, node.ub, node.count, node.depth_budget, config_)) {
        node.lb = node.ub;  // closed as a leaf
    } else if (config_.use_leaf_caps && config_.lambda > 0.0 && !nodes_.empty()) {
        // Any tree splitting a non-root subproblem carries at least two leaves
        // here plus one elsewhere; with fewer than 3 leaves allowed under the
        // incumbent, the subproblem can only appear as a leaf.
        if (leaf_count_cap(nodes_[kRoot].ub, config_.lambda, ds_.m()) < 3) node.lb = node.ub;
    }

    std::uint32_t id = std::uint32_t(nodes_.size());
    nodes_.push_back(std::move(node));
    auto [pos, inserted] = index_.emplace(std::move(key), id);
    keys_.push_back(&pos->first);
    stats_.graph_size = nodes_.size();
    return id;
}

void Search::expand(std::uint32_t id) {
    const SupportKey& key = *keys_[id];
    std::uint32_t budget = nodes_[id].depth_budget;
    std::vector<ChildPair> children;
    for (std::size_t j = 0; j < ds_.m(); ++j) {
        std::size_t ones = key.bits.count_and(ds_.feature(j));
        std::size_t zeros = nodes_[id].count - ones;
        if (ones < config_.min_leaf_size || zeros < config_.min_leaf_size) continue;
        auto [left, right] = split_support(key.bits, j, ds_);
        std::uint32_t l = find_or_create(SupportKey{std::move(left), budget - 1}, id);
        std::uint32_t r = find_or_create(SupportKey{std::move(right), budget - 1}, id);
        children.push_back(ChildPair{std::uint32_t(j), l, r});
    }
    nodes_[id].children = std::move(children);
    nodes_[id].expanded = true;
}

SolveResult Search::run() {
    using Clock = std::chrono::steady_clock;
    auto started = Clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - started).count(); };

    std::size_t depth0 = config_.max_depth == 0 ? ds_.m()
                                                : std::min(config_.max_depth, ds_.m());
    find_or_create(SupportKey{ds_.full_support(), depth0}, SIZE_MAX);
    push(kRoot);

    while (!queue_.empty()) {
        std::uint32_t id = queue_.top().node;
        queue_.pop();
        ++stats_.iterations;

        if (nodes_[kRoot].solved()) break;
        if (limits_.time_limit_seconds > 0.0 && (stats_.iterations & 1023) == 0 &&
            elapsed() > limits_.time_limit_seconds) {
            stats_.hit_time_limit = true;
            break;
        }
        if (nodes_[id].solved()) continue;  // stale copy

        if (!nodes_[id].expanded) expand(id);

        // Recompute bounds from the current child bounds (Algorithm-style
        // min over per-feature sums), monotonically clamped.
        double lb_split = kInf, ub_split = kInf;
        for (const ChildPair& c : nodes_[id].children) {
            lb_split = std::min(lb_split, nodes_[c.left].lb + nodes_[c.right].lb);
            ub_split = std::min(ub_split, nodes_[c.left].ub + nodes_[c.right].ub);
        }
        Node& node = nodes_[id];
        double new_ub = std::min(node.ub, ub_split);
        double new_lb = std::max(node.lb, std::min(new_ub, lb_split));
        bool changed = new_lb > node.lb + kBoundSlack || new_ub < node.ub - kBoundSlack;
        node.lb = std::max(node.lb, new_lb);
        node.ub = std::min(node.ub, new_ub);

        if (changed)
            for (std::uint32_t parent : nodes_[id].parents) push(parent);

        if (nodes_[id].solved()) continue;

        // Enqueue child pairs that could still improve this node and are not
        // themselves settled. Pairs whose floor exceeds the node's own upper
        // bound can never participate in its certificate.
        double node_ub = nodes_[id].ub;
        for (const ChildPair& c : nodes_[id].children) {
            double pair_lb = nodes_[c.left].lb + nodes_[c.right].lb;
            double pair_ub = nodes_[c.left].ub + nodes_[c.right].ub;
            if (pair_lb < pair_ub - kBoundSlack && pair_lb <= node_ub + kBoundSlack) {
                if (!nodes_[c.left].solved()) push(c.left);
                if (!nodes_[c.right].solved()) push(c.right);
            }
        }
    }

    stats_.elapsed_seconds = elapsed();

    SolveResult result;
    const Node& root = nodes_[kRoot];
    result.tree = SurvivalTree(extract(kRoot, keys_[kRoot]->bits));
    result.lower_bound = root.lb;
    double ub = root.ub;
    result.objective = ub;
    result.gap = (ub - root.lb) / std::max(ub, 1e-300);
    result.proven_optimal = result.gap <= 1e-12;
    result.stats = stats_;
    return result;
}

// Certificate extraction follows upper bounds: the recorded ub of a closed
// node is always realizable, and some feature (or the leaf option) attains it
// with the children's current bounds.
std::unique_ptr<SurvivalTree::Node> Search::extract(std::uint32_t id,
                                                    const Bitmask& support) const {
    const Node& node = nodes_[id];
    if (node.leaf_obj <= node.ub + kBoundSlack || !node.expanded) {
        LeafModel leaf = fit_leaf(support, ds_);
        return SurvivalTree::Node::make_leaf(std::move(leaf.km_curve), leaf.sample_count);
    }
    for (const ChildPair& c : node.children) {
        if (nodes_[c.left].ub + nodes_[c.right].ub <= node.ub + 4 * kBoundSlack) {
            auto [left, right] = split_support(support, c.feature, ds_);
            return SurvivalTree::Node::make_split(c.feature, ds_.feature_name(c.feature),
                                                  extract(c.left, left),
                                                  extract(c.right, right));
        }
    }
    throw StructureError("no certificate at node marked solved");
}

} // namespace

SolveResult solve(const BinaryDataset& ds, const BoundConfig& config, const SolveLimits& limits,
                  Scheduling scheduling) {
    config.validate(ds.n());
    if (ds.n() < config.min_leaf_size)
        throw ConfigError("dataset smaller than min_leaf_size");
    Search search(ds, config, limits, scheduling);
    return search.run();
}

namespace {

std::unique_ptr<SurvivalTree::Node> greedy_build(const Bitmask& support, std::size_t budget,
                                                 const BinaryDataset& ds,
                                                 const BoundConfig& config,
                                                 LeafScratch& scratch) {
    LeafModel here = fit_leaf(support, ds);
    std::size_t count = here.sample_count;
    if (budget == 0 || count < 2 * config.min_leaf_size)
        return SurvivalTree::Node::make_leaf(std::move(here.km_curve), count);

    std::size_t best_feature = SIZE_MAX;
    double best_sum = kInf;
    for (std::size_t j = 0; j < ds.m(); ++j) {
        std::size_t ones = support.count_and(ds.feature(j));
        std::size_t zeros = count - ones;
        if (ones < config.min_leaf_size || zeros < config.min_leaf_size) continue;
        auto [left, right] = split_support(support, j, ds);
        double sum = leaf_loss_value(left, ds, scratch) + leaf_loss_value(right, ds, scratch);
        if (sum < best_sum - kBoundSlack) {
            best_sum = sum;
            best_feature = j;
        }
    }
    if (best_feature == SIZE_MAX || here.loss - best_sum < config.lambda)
        return SurvivalTree::Node::make_leaf(std::move(here.km_curve), count);

    auto [left, right] = split_support(support, best_feature, ds);
    return SurvivalTree::Node::make_split(best_feature, ds.feature_name(best_feature),
                                          greedy_build(left, budget - 1, ds, config, scratch),
                                          greedy_build(right, budget - 1, ds, config, scratch));
}

} // namespace

SurvivalTree greedy_tree(const BinaryDataset& ds, const BoundConfig& config) {
    config.validate(ds.n());
    std::size_t depth0 = config.max_depth == 0 ? ds.m() : std::min(config.max_depth, ds.m());
    LeafScratch scratch;
    return SurvivalTree(greedy_build(ds.full_support(), depth0, ds, config, scratch));
}

} // namespace survtree
