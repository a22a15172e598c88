#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "survtree/bounds.hpp"
#include "survtree/dataset.hpp"
#include "survtree/errors.hpp"
#include "survtree/metrics.hpp"
#include "survtree/reference.hpp"
#include "survtree/solver.hpp"
#include "survtree/tree.hpp"

namespace py = pybind11;
using namespace survtree;

namespace {

BinarizeStrategy strategy_from_string(const std::string& spec) {
    if (spec == "all") return BinarizeStrategy::all_thresholds();
    if (spec.rfind("width:", 0) == 0)
        return BinarizeStrategy::equal_width(std::stoi(spec.substr(6)));
    throw ConfigError("unknown binarize spec '" + spec + "' (expected all|width:K)");
}

BinaryDataset dataset_from_csv(const std::string& path, const std::string& time_col,
                               const std::string& event_col, const std::string& binarize_spec) {
    RawDataset raw = load_csv(path, CsvSchema{time_col, event_col});
    return binarize(raw, strategy_from_string(binarize_spec));
}

BinaryDataset dataset_from_binary(const std::vector<std::vector<int>>& rows,
                                  const std::vector<double>& times,
                                  const std::vector<int>& events,
                                  std::optional<std::vector<std::string>> names) {
    if (rows.size() != times.size() || rows.size() != events.size())
        throw ConfigError("rows, times and events must have equal length");
    if (rows.empty()) throw ConfigError("empty dataset");
    std::size_t m = rows.front().size();
    std::vector<Bitmask> columns(m, Bitmask(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m) throw ConfigError("ragged feature matrix");
        for (std::size_t j = 0; j < m; ++j)
            if (rows[i][j]) columns[j].set(i);
    }
    std::vector<std::string> feature_names;
    if (names) {
        if (names->size() != m) throw ConfigError("feature_names length mismatch");
        feature_names = *names;
    } else {
        for (std::size_t j = 0; j < m; ++j) feature_names.push_back("f" + std::to_string(j));
    }
    std::vector<std::uint8_t> ev(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i] != 0 && events[i] != 1) throw ConfigError("events must be 0/1");
        ev[i] = std::uint8_t(events[i]);
    }
    return detail::assemble_dataset(std::move(columns), std::move(feature_names), {}, {}, times,
                                    std::move(ev));
}

BoundConfig make_config(double lam, std::size_t max_depth, std::size_t min_leaf,
                        std::optional<std::vector<double>> reference_losses) {
    BoundConfig config;
    config.lambda = lam;
    config.max_depth = max_depth;
    config.min_leaf_size = min_leaf;
    if (reference_losses) config.reference_losses = std::move(reference_losses);
    return config;
}

py::dict result_to_dict(const SolveResult& result, const BinaryDataset& ds, double lam,
                        std::size_t max_depth) {
    py::dict d;
    d["tree_json"] = result.tree.to_json(result.objective, lam, max_depth,
                                         result.proven_optimal, result.gap);
    d["objective"] = result.objective;
    d["lower_bound"] = result.lower_bound;
    d["gap"] = result.gap;
    d["proven_optimal"] = result.proven_optimal;
    d["leaves"] = result.tree.leaf_count();
    d["iterations"] = result.stats.iterations;
    d["graph_size"] = result.stats.graph_size;
    d["time_seconds"] = result.stats.elapsed_seconds;
    d["ibs_ratio"] = ibs_ratio(result.tree, ds);
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Optimal sparse survival trees: IBS-minimizing trees with certificates";

    py::register_exception<DataError>(m, "DataError");
    py::register_exception<ConfigError>(m, "ConfigurationError");

    py::class_<BinaryDataset>(m, "Dataset")
        .def_static("from_csv", &dataset_from_csv, py::arg("path"), py::arg("time_col") = "time",
                    py::arg("event_col") = "event", py::arg("binarize") = "all")
        .def_static("from_binary", &dataset_from_binary, py::arg("rows"), py::arg("times"),
                    py::arg("events"), py::arg("feature_names") = std::nullopt)
        .def_property_readonly("n", &BinaryDataset::n)
        .def_property_readonly("m", &BinaryDataset::m)
        .def_property_readonly("feature_names",
                               [](const BinaryDataset& ds) { return ds.feature_names(); })
        .def("binarization_report", &BinaryDataset::binarization_report_json);

    m.def(
        "train",
        [](const BinaryDataset& ds, double lam, std::size_t max_depth, std::size_t min_leaf,
           double time_limit, std::optional<std::vector<double>> reference_losses,
           const std::string& scheduling) {
            BoundConfig config = make_config(lam, max_depth, min_leaf, std::move(reference_losses));
            SolveLimits limits;
            limits.time_limit_seconds = time_limit;
            Scheduling s = scheduling == "fifo"   ? Scheduling::Fifo
                           : scheduling == "lifo" ? Scheduling::Lifo
                           : scheduling == "lb"   ? Scheduling::LowerBound
                                                  : Scheduling::Priority;
            SolveResult result = solve(ds, config, limits, s);
            return result_to_dict(result, ds, lam, max_depth);
        },
        py::arg("dataset"), py::arg("lam") = 0.01, py::arg("max_depth") = 5,
        py::arg("min_leaf") = 7, py::arg("time_limit") = 0.0,
        py::arg("reference_losses") = std::nullopt, py::arg("scheduling") = "priority",
        "Train a provably optimal survival tree; returns a result dict.");

    m.def(
        "greedy",
        [](const BinaryDataset& ds, double lam, std::size_t max_depth, std::size_t min_leaf) {
            BoundConfig config = make_config(lam, max_depth, min_leaf, std::nullopt);
            SurvivalTree tree = greedy_tree(ds, config);
            double objective = tree.loss(ds) + lam * double(tree.leaf_count());
            py::dict d;
            d["tree_json"] = tree.to_json(objective, lam, max_depth, false, 0.0);
            d["objective"] = objective;
            d["leaves"] = tree.leaf_count();
            d["ibs_ratio"] = ibs_ratio(tree, ds);
            return d;
        },
        py::arg("dataset"), py::arg("lam") = 0.01, py::arg("max_depth") = 5,
        py::arg("min_leaf") = 7, "Greedy top-down baseline with the same objective accounting.");

    m.def(
        "evaluate",
        [](const std::string& tree_json, const BinaryDataset& ds) {
            SurvivalTree tree = SurvivalTree::from_json(tree_json);
            EvaluationReport report = evaluate(tree, ds);
            py::dict d;
            d["ibs"] = report.ibs;
            d["ibs_ratio"] = report.ibs_ratio;
            d["harrell_c"] = report.harrell_c;
            d["uno_c"] = report.uno_c;
            d["mean_auc"] = report.mean_auc;
            d["leaves"] = report.leaf_count;
            return d;
        },
        py::arg("tree_json"), py::arg("dataset"),
        "Evaluate a tree JSON on a dataset (IBS ratio, concordance, AUC).");

    m.def(
        "fit_reference_losses",
        [](const BinaryDataset& ds, std::size_t n_trees, std::size_t max_depth,
           std::uint64_t seed) {
            ReferenceModel model = fit_reference(ds, n_trees, max_depth, seed);
            return reference_losses(model, ds);
        },
        py::arg("dataset"), py::arg("n_trees") = 100, py::arg("max_depth") = 9,
        py::arg("seed") = 2023,
        "Per-sample losses of a bagged greedy ensemble, for guessed lower bounds.");

#ifdef VERSION_INFO
#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
