#include "survtree/tree.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "survtree/detail/kahan.hpp"
#include "survtree/errors.hpp"

namespace survtree {

std::unique_ptr<SurvivalTree::Node> SurvivalTree::Node::make_leaf(StepFunction curve,
                                                                  std::size_t n) {
    auto node = std::make_unique<Node>();
    node->is_leaf = true;
    node->curve = std::move(curve);
    node->sample_count = n;
    return node;
}

std::unique_ptr<SurvivalTree::Node> SurvivalTree::Node::make_split(std::size_t feature,
                                                                   std::string name,
                                                                   std::unique_ptr<Node> left,
                                                                   std::unique_ptr<Node> right) {
    auto node = std::make_unique<Node>();
    node->is_leaf = false;
    node->feature = feature;
    node->feature_name = std::move(name);
    node->left = std::move(left);
    node->right = std::move(right);
    return node;
}

namespace {

std::size_t count_leaves(const SurvivalTree::Node& node) {
    if (node.is_leaf) return 1;
    return count_leaves(*node.left) + count_leaves(*node.right);
}

std::size_t node_depth(const SurvivalTree::Node& node) {
    if (node.is_leaf) return 0;
    return 1 + std::max(node_depth(*node.left), node_depth(*node.right));
}

const SurvivalTree::Node& route(const SurvivalTree::Node& node, const BinaryDataset& ds,
                                std::size_t row) {
    if (node.is_leaf) return node;
    if (node.feature >= ds.m())
        throw DataError(DataError::Kind::FeatureMismatch,
                        "tree references feature index beyond the dataset");
    return route(ds.feature_value(row, node.feature) ? *node.right : *node.left, ds, row);
}

} // namespace

std::size_t SurvivalTree::leaf_count() const { return root_ ? count_leaves(*root_) : 0; }
std::size_t SurvivalTree::depth() const { return root_ ? node_depth(*root_) : 0; }

const StepFunction& SurvivalTree::predict(const BinaryDataset& ds, std::size_t row) const {
    if (!root_) throw StructureError("predict on an empty tree");
    return route(*root_, ds, row).curve;
}

std::vector<const StepFunction*> SurvivalTree::predict_all(const BinaryDataset& ds) const {
    std::vector<const StepFunction*> out(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) out[i] = &predict(ds, i);
    return out;
}

double SurvivalTree::loss(const BinaryDataset& ds) const {
    if (!root_) throw StructureError("loss on an empty tree");
    detail::KahanSum acc;
    for (std::size_t i = 0; i < ds.n(); ++i)
        acc.add(sample_loss(predict(ds, i), ds.time(i), ds.event(i), ds));
    return acc.value();
}

double tree_loss(const SurvivalTree& tree, const BinaryDataset& ds) { return tree.loss(ds); }

namespace {

nlohmann::json node_to_json(const SurvivalTree::Node& node) {
    nlohmann::json j;
    if (node.is_leaf) {
        j["n"] = node.sample_count;
        j["times"] = node.curve.breakpoints();
        j["survival"] = node.curve.values();
    } else {
        j["feature"] = node.feature;
        j["name"] = node.feature_name;
        j["left"] = node_to_json(*node.left);
        j["right"] = node_to_json(*node.right);
    }
    return j;
}

std::unique_ptr<SurvivalTree::Node> node_from_json(const nlohmann::json& j) {
    if (j.contains("feature")) {
        return SurvivalTree::Node::make_split(
            j.at("feature").get<std::size_t>(), j.at("name").get<std::string>(),
            node_from_json(j.at("left")), node_from_json(j.at("right")));
    }
    StepFunction curve(j.at("times").get<std::vector<double>>(),
                       j.at("survival").get<std::vector<double>>(), 1.0);
    return SurvivalTree::Node::make_leaf(std::move(curve), j.at("n").get<std::size_t>());
}

} // namespace

std::string SurvivalTree::to_json(double objective, double lambda, std::size_t max_depth,
                                  bool proven_optimal, double gap) const {
    nlohmann::json j;
    j["objective"] = objective;
    j["lambda"] = lambda;
    j["depth"] = max_depth;
    j["proven_optimal"] = proven_optimal;
    j["gap"] = gap;
    j["leaves"] = leaf_count();
    j["tree"] = root_ ? node_to_json(*root_) : nlohmann::json();
    return j.dump(2);
}

SurvivalTree SurvivalTree::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    const nlohmann::json& t = j.contains("tree") ? j.at("tree") : j;
    return SurvivalTree(node_from_json(t));
}

SurvivalTree SurvivalTree::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(DataError::Kind::MissingFile, "cannot open tree file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

// Median survival time: first breakpoint where the curve reaches 0.5.
std::string median_label(const StepFunction& curve) {
    for (std::size_t j = 0; j < curve.size(); ++j)
        if (curve.values()[j] <= 0.5) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%.6g", curve.breakpoints()[j]);
            return buf;
        }
    return "NA";
}

void node_to_dot(const SurvivalTree::Node& node, std::ostream& out, std::size_t& next_id,
                 std::size_t id) {
    if (node.is_leaf) {
        out << "  n" << id << " [shape=box, label=\"n=" << node.sample_count
            << "\\nmedian=" << median_label(node.curve) << "\"];\n";
        return;
    }
    out << "  n" << id << " [label=\"" << dot_escape(node.feature_name) << "\"];\n";
    std::size_t left_id = ++next_id;
    std::size_t right_id = ++next_id;
    out << "  n" << id << " -> n" << left_id << " [label=\"0\"];\n";
    out << "  n" << id << " -> n" << right_id << " [label=\"1\"];\n";
    node_to_dot(*node.left, out, next_id, left_id);
    node_to_dot(*node.right, out, next_id, right_id);
}

} // namespace

std::string SurvivalTree::to_dot() const {
    std::ostringstream out;
    out << "digraph survival_tree {\n";
    if (root_) {
        std::size_t next_id = 0;
        node_to_dot(*root_, out, next_id, 0);
    }
    out << "}\n";
    return out.str();
}

} // namespace survtree
