#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "survtree/bounds.hpp"
#include "survtree/dataset.hpp"
#include "survtree/errors.hpp"
#include "survtree/metrics.hpp"
#include "survtree/reference.hpp"
#include "survtree/solver.hpp"
#include "survtree/tree.hpp"

namespace {

using namespace survtree;

struct RunConfig {
    std::string input;
    std::string time_col = "time";
    std::string event_col = "event";
    std::string binarize_spec = "all";
    double lambda = 0.01;
    std::size_t max_depth = 5;
    std::size_t min_leaf = 7;
    double time_limit = 0.0;
    std::string reference = "none";
    std::string out_tree, out_dot, out_report;
    std::uint64_t seed = 2023;
    std::string scheduling = "priority";
};

const std::map<std::string, int>& known_keys() {
    static const std::map<std::string, int> keys = {
        {"input", 0},     {"time-col", 0},  {"event-col", 0}, {"binarize", 0},
        {"lambda", 0},    {"max-depth", 0}, {"min-leaf", 0},  {"time-limit", 0},
        {"reference", 0}, {"out-tree", 0},  {"out-dot", 0},   {"out-report", 0},
        {"seed", 0},      {"scheduling", 0},
    };
    return keys;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t a = line.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
        auto trim = [](std::string s) {
            std::size_t x = s.find_first_not_of(" \t");
            if (x == std::string::npos) return std::string();
            std::size_t y = s.find_last_not_of(" \t");
            return s.substr(x, y - x + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!known_keys().count(key))
            throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        values[key] = value;
    }
    return values;
}

void apply_config_file(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    if (auto v = get("input")) cfg.input = *v;
    if (auto v = get("time-col")) cfg.time_col = *v;
    if (auto v = get("event-col")) cfg.event_col = *v;
    if (auto v = get("binarize")) cfg.binarize_spec = *v;
    if (auto v = get("lambda")) cfg.lambda = std::stod(*v);
    if (auto v = get("max-depth")) cfg.max_depth = std::stoul(*v);
    if (auto v = get("min-leaf")) cfg.min_leaf = std::stoul(*v);
    if (auto v = get("time-limit")) cfg.time_limit = std::stod(*v);
    if (auto v = get("reference")) cfg.reference = *v;
    if (auto v = get("out-tree")) cfg.out_tree = *v;
    if (auto v = get("out-dot")) cfg.out_dot = *v;
    if (auto v = get("out-report")) cfg.out_report = *v;
    if (auto v = get("seed")) cfg.seed = std::stoull(*v);
    if (auto v = get("scheduling")) cfg.scheduling = *v;
}

BinarizeStrategy parse_binarize(const std::string& spec) {
    if (spec == "all") return BinarizeStrategy::all_thresholds();
    if (spec.rfind("width:", 0) == 0) {
        int bins = std::stoi(spec.substr(6));
        if (bins < 2) throw ConfigError("binarize width needs at least 2 bins");
        return BinarizeStrategy::equal_width(bins);
    }
    throw ConfigError("unknown binarize spec '" + spec + "' (expected all|width:K)");
}

Scheduling parse_scheduling(const std::string& s) {
    if (s == "priority") return Scheduling::Priority;
    if (s == "fifo") return Scheduling::Fifo;
    if (s == "lifo") return Scheduling::Lifo;
    if (s == "lb") return Scheduling::LowerBound;
    throw ConfigError("unknown scheduling '" + s + "' (expected priority|fifo|lifo|lb)");
}

BinaryDataset load_and_binarize(const RunConfig& cfg) {
    if (cfg.input.empty()) throw ConfigError("--input is required");
    RawDataset raw = load_csv(cfg.input, CsvSchema{cfg.time_col, cfg.event_col});
    if (raw.dropped_missing > 0)
        std::cerr << "note: dropped " << raw.dropped_missing << " rows with missing values\n";
    return binarize(raw, parse_binarize(cfg.binarize_spec));
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}

// reference spec: none | fit:N:D | file:PATH
std::optional<std::vector<double>> resolve_reference(const std::string& spec,
                                                     const BinaryDataset& ds,
                                                     std::uint64_t seed) {
    if (spec == "none" || spec.empty()) return std::nullopt;
    if (spec.rfind("fit:", 0) == 0) {
        std::size_t colon = spec.find(':', 4);
        if (colon == std::string::npos)
            throw ConfigError("reference fit spec must be fit:N:D");
        std::size_t n_trees = std::stoul(spec.substr(4, colon - 4));
        std::size_t depth = std::stoul(spec.substr(colon + 1));
        ReferenceModel model = fit_reference(ds, n_trees, depth, seed);
        return reference_losses(model, ds);
    }
    if (spec.rfind("file:", 0) == 0)
        return import_losses(spec.substr(5), ds.n());
    throw ConfigError("unknown reference spec '" + spec + "' (expected none|fit:N:D|file:PATH)");
}

int cmd_train(const RunConfig& cfg) {
    auto started = std::chrono::steady_clock::now();
    BinaryDataset ds = load_and_binarize(cfg);

    BoundConfig bounds;
    bounds.lambda = cfg.lambda;
    bounds.max_depth = cfg.max_depth;
    bounds.min_leaf_size = cfg.min_leaf;
    bounds.reference_losses = resolve_reference(cfg.reference, ds, cfg.seed);

    SolveLimits limits;
    limits.time_limit_seconds = cfg.time_limit;
    SolveResult result = solve(ds, bounds, limits, parse_scheduling(cfg.scheduling));
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    std::string tree_json = result.tree.to_json(result.objective, cfg.lambda, cfg.max_depth,
                                                result.proven_optimal, result.gap);
    if (!cfg.out_tree.empty()) write_file(cfg.out_tree, tree_json);
    if (!cfg.out_dot.empty()) write_file(cfg.out_dot, result.tree.to_dot());

    nlohmann::json stats;
    stats["objective"] = result.objective;
    stats["lower_bound"] = result.lower_bound;
    stats["gap"] = result.gap;
    stats["proven_optimal"] = result.proven_optimal;
    stats["iterations"] = result.stats.iterations;
    stats["graph_size"] = result.stats.graph_size;
    stats["queue_pushes"] = result.stats.queue_pushes;
    stats["wall_time_seconds"] = wall;
    stats["solver_time_seconds"] = result.stats.elapsed_seconds;
    stats["leaves"] = result.tree.leaf_count();
    stats["train_ibs_ratio"] = ibs_ratio(result.tree, ds);
    stats["n"] = ds.n();
    stats["m"] = ds.m();
    if (!cfg.out_report.empty()) write_file(cfg.out_report, stats.dump(2));

    std::cout << stats.dump(2) << "\n";
    return result.proven_optimal ? 0 : 2;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& tree_path) {
    BinaryDataset ds = load_and_binarize(cfg);
    SurvivalTree tree = SurvivalTree::from_json_file(tree_path);

    // feature names referenced by the tree must exist at the same indices
    std::function<void(const SurvivalTree::Node&)> check = [&](const SurvivalTree::Node& node) {
        if (node.is_leaf) return;
        if (node.feature >= ds.m() || ds.feature_name(node.feature) != node.feature_name)
            throw DataError(DataError::Kind::FeatureMismatch,
                            "tree splits on '" + node.feature_name +
                                "' which the evaluation data does not provide at index " +
                                std::to_string(node.feature));
        check(*node.left);
        check(*node.right);
    };
    check(tree.root());

    EvaluationReport report = evaluate(tree, ds);
    if (!cfg.out_report.empty()) write_file(cfg.out_report, report.to_json());
    std::cout << "metric            value\n";
    std::printf("ibs               %.6f\n", report.ibs);
    std::printf("ibs_ratio         %.6f\n", report.ibs_ratio);
    std::printf("harrell_c         %.6f\n", report.harrell_c);
    std::printf("uno_c             %.6f\n", report.uno_c);
    std::printf("mean_auc          %.6f\n", report.mean_auc);
    std::printf("leaves            %zu\n", report.leaf_count);
    return 0;
}

int cmd_export_dot(const std::string& tree_path, const std::string& out_path) {
    SurvivalTree tree = SurvivalTree::from_json_file(tree_path);
    if (out_path.empty()) {
        std::cout << tree.to_dot();
    } else {
        write_file(out_path, tree.to_dot());
    }
    return 0;
}

int cmd_benchmark(const RunConfig& cfg, const std::vector<double>& lambdas,
                  const std::vector<std::size_t>& depths, bool with_greedy,
                  const std::string& out_path) {
    BinaryDataset ds = load_and_binarize(cfg);

    std::ostringstream csv;
    csv << "method,lambda,depth,leaves,train_ibs_ratio,objective,time\n";
    char buf[256];
    for (std::size_t depth : depths) {
        for (double lambda : lambdas) {
            BoundConfig bounds;
            bounds.lambda = lambda;
            bounds.max_depth = depth;
            bounds.min_leaf_size = cfg.min_leaf;

            auto t0 = std::chrono::steady_clock::now();
            SolveLimits limits;
            limits.time_limit_seconds = cfg.time_limit;
            SolveResult result = solve(ds, bounds, limits);
            double optimal_time =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::snprintf(buf, sizeof(buf), "optimal,%.17g,%zu,%zu,%.17g,%.17g,%.6f\n", lambda,
                          depth, result.tree.leaf_count(), ibs_ratio(result.tree, ds),
                          result.objective, optimal_time);
            csv << buf;

            if (with_greedy) {
                t0 = std::chrono::steady_clock::now();
                SurvivalTree greedy = greedy_tree(ds, bounds);
                double greedy_time =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                double objective = greedy.loss(ds) + lambda * double(greedy.leaf_count());
                std::snprintf(buf, sizeof(buf), "greedy,%.17g,%zu,%zu,%.17g,%.17g,%.6f\n", lambda,
                              depth, greedy.leaf_count(), ibs_ratio(greedy, ds), objective,
                              greedy_time);
                csv << buf;
            }
        }
    }
    if (out_path.empty()) std::cout << csv.str();
    else write_file(out_path, csv.str());
    return 0;
}

int cmd_fit_reference(const RunConfig& cfg, std::size_t n_trees, std::size_t depth,
                      const std::string& out_losses, const std::string& out_model) {
    BinaryDataset ds = load_and_binarize(cfg);
    ReferenceModel model = fit_reference(ds, n_trees, depth, cfg.seed);
    std::vector<double> losses = reference_losses(model, ds);
    if (!out_losses.empty()) export_losses(losses, out_losses);
    if (!out_model.empty()) write_file(out_model, model.to_json());
    double total = 0.0;
    for (double v : losses) total += v;
    std::cout << "reference model: " << n_trees << " trees, depth " << depth
              << ", total per-sample loss " << total << "\n";
    return 0;
}

void add_data_options(CLI::App* app, RunConfig& cfg) {
    app->add_option("--input", cfg.input, "input CSV path");
    app->add_option("--time-col", cfg.time_col, "time column name");
    app->add_option("--event-col", cfg.event_col, "event column name (0/1)");
    app->add_option("--binarize", cfg.binarize_spec, "all | width:K");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse survival trees: provably optimal training and evaluation"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path, tree_path, out_path, out_model;
    std::vector<double> lambdas = {0.1, 0.05, 0.01, 0.005, 0.0025, 0.001};
    std::vector<std::size_t> depths = {5};
    bool with_greedy = false;
    std::size_t ref_trees = 100, ref_depth = 9;

    // --config is applied before flag parsing so flags win
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    try {
        if (!config_path.empty()) apply_config_file(cfg, read_config_file(config_path));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App* train = app.add_subcommand("train", "fit a provably optimal survival tree");
    add_data_options(train, cfg);
    train->add_option("--config", config_path, "key=value config file");
    train->add_option("--lambda", cfg.lambda, "per-leaf penalty");
    train->add_option("--max-depth", cfg.max_depth, "depth limit (0 = unlimited)");
    train->add_option("--min-leaf", cfg.min_leaf, "minimum samples per leaf");
    train->add_option("--time-limit", cfg.time_limit, "seconds before returning the incumbent");
    train->add_option("--reference", cfg.reference, "none | fit:N:D | file:PATH");
    train->add_option("--seed", cfg.seed, "rng seed for reference fitting");
    train->add_option("--scheduling", cfg.scheduling, "priority | fifo | lifo | lb");
    train->add_option("--out-tree", cfg.out_tree, "tree JSON output path");
    train->add_option("--out-dot", cfg.out_dot, "DOT output path");
    train->add_option("--out-report", cfg.out_report, "stats JSON output path");

    CLI::App* evaluate = app.add_subcommand("evaluate", "score a tree on a dataset");
    add_data_options(evaluate, cfg);
    evaluate->add_option("--config", config_path, "key=value config file");
    evaluate->add_option("--tree", tree_path, "tree JSON path")->required();
    evaluate->add_option("--out-report", cfg.out_report, "report JSON output path");

    CLI::App* export_dot = app.add_subcommand("export-dot", "render a tree JSON as DOT");
    export_dot->add_option("--tree", tree_path, "tree JSON path")->required();
    export_dot->add_option("--out", out_path, "DOT output path (stdout when omitted)");

    CLI::App* benchmark = app.add_subcommand("benchmark", "sweep lambda/depth, emit frontier CSV");
    add_data_options(benchmark, cfg);
    benchmark->add_option("--config", config_path, "key=value config file");
    benchmark->add_option("--lambdas", lambdas, "lambda sweep")->delimiter(',');
    benchmark->add_option("--depths", depths, "depth sweep")->delimiter(',');
    benchmark->add_option("--min-leaf", cfg.min_leaf, "minimum samples per leaf");
    benchmark->add_option("--time-limit", cfg.time_limit, "per-run time limit");
    benchmark->add_flag("--greedy", with_greedy, "also run the greedy baseline");
    benchmark->add_option("--out", out_path, "frontier CSV path (stdout when omitted)");

    CLI::App* fit_ref = app.add_subcommand("fit-reference", "fit the bagged reference model");
    add_data_options(fit_ref, cfg);
    fit_ref->add_option("--config", config_path, "key=value config file");
    fit_ref->add_option("--trees", ref_trees, "ensemble size");
    fit_ref->add_option("--depth", ref_depth, "member tree depth");
    fit_ref->add_option("--seed", cfg.seed, "rng seed");
    fit_ref->add_option("--out", out_path, "per-sample loss CSV path");
    fit_ref->add_option("--out-model", out_model, "ensemble JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (train->parsed()) return cmd_train(cfg);
        if (evaluate->parsed()) return cmd_evaluate(cfg, tree_path);
        if (export_dot->parsed()) return cmd_export_dot(tree_path, out_path);
        if (benchmark->parsed()) return cmd_benchmark(cfg, lambdas, depths, with_greedy, out_path);
        if (fit_ref->parsed()) return cmd_fit_reference(cfg, ref_trees, ref_depth, out_path, out_model);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ResourceLimitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
