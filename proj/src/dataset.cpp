#include "survtree/dataset.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "survtree/errors.hpp"
#include "survtree/survival_core.hpp"

namespace survtree {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') { cell += '"'; ++i; }
                else quoted = false;
            } else cell += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(cell);
    return cells;
}

std::string trimmed(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

bool is_missing(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan" ||
           cell == "?";
}

bool parse_double(const std::string& cell, double& out) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string format_number(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

RawDataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError(DataError::Kind::MissingFile, "cannot open file: " + path);
    return load_csv(in, schema, path);
}

RawDataset load_csv(std::istream& in, const CsvSchema& schema, const std::string& display_name) {
    std::string line;
    if (!std::getline(in, line))
        throw DataError(DataError::Kind::NoRows, display_name + ": empty file");

    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = trimmed(h);

    auto column_index = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw DataError(DataError::Kind::MissingColumn,
                            display_name + ": missing column '" + name + "'");
        return std::size_t(it - header.begin());
    };
    std::size_t time_col = column_index(schema.time_column);
    std::size_t event_col = column_index(schema.event_column);
    if (time_col == event_col)
        throw DataError(DataError::Kind::MissingColumn,
                        display_name + ": time and event map to the same column");

    std::vector<std::size_t> feature_cols;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != time_col && j != event_col) feature_cols.push_back(j);

    // First pass: collect retained rows as strings, dropping rows with any
    // missing cell.
    std::vector<std::vector<std::string>> rows;
    std::size_t dropped = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError(DataError::Kind::UnparseableCell,
                            display_name + ": row " + std::to_string(line_no) + " has " +
                                std::to_string(cells.size()) + " cells, expected " +
                                std::to_string(header.size()));
        for (auto& c : cells) c = trimmed(c);
        bool missing = false;
        for (const auto& c : cells)
            if (is_missing(c)) { missing = true; break; }
        if (missing) { ++dropped; continue; }

        double t;
        if (!parse_double(cells[time_col], t) || t <= 0.0)
            throw DataError(DataError::Kind::UnparseableTime,
                            display_name + ": row " + std::to_string(line_no) +
                                ": time '" + cells[time_col] + "' is not a positive real");
        double e;
        if (!parse_double(cells[event_col], e) || (e != 0.0 && e != 1.0))
            throw DataError(DataError::Kind::UnparseableEvent,
                            display_name + ": row " + std::to_string(line_no) +
                                ": event '" + cells[event_col] + "' is not 0/1");
        rows.push_back(std::move(cells));
    }
    if (rows.empty())
        throw DataError(DataError::Kind::NoRows, display_name + ": no usable rows");

    RawDataset raw;
    raw.dropped_missing = dropped;
    raw.times.reserve(rows.size());
    raw.events.reserve(rows.size());
    for (const auto& cells : rows) {
        double t, e;
        parse_double(cells[time_col], t);
        parse_double(cells[event_col], e);
        raw.times.push_back(t);
        raw.events.push_back(std::uint8_t(e));
    }
    if (std::find(raw.events.begin(), raw.events.end(), std::uint8_t(1)) == raw.events.end())
        throw DataError(DataError::Kind::NoUncensoredSample,
                        display_name + ": every sample is censored");

    // Column typing: numeric only when every cell parses.
    for (std::size_t j : feature_cols) {
        RawColumn col;
        col.name = header[j];
        col.numeric = true;
        for (const auto& cells : rows) {
            double v;
            if (!parse_double(cells[j], v)) { col.numeric = false; break; }
        }
        if (col.numeric) {
            col.numeric_values.reserve(rows.size());
            for (const auto& cells : rows) {
                double v;
                parse_double(cells[j], v);
                col.numeric_values.push_back(v);
            }
        } else {
            col.string_values.reserve(rows.size());
            for (const auto& cells : rows) col.string_values.push_back(cells[j]);
        }
        raw.columns.push_back(std::move(col));
    }
    return raw;
}

std::vector<std::vector<std::size_t>> equivalence_classes(const std::vector<Bitmask>& columns,
                                                          std::size_t n_samples) {
    std::unordered_map<Bitmask, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n_samples; ++i) {
        Bitmask row(columns.size());
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (columns[j].test(i)) row.set(j);
        groups[row].push_back(i);
    }
    std::vector<std::vector<std::size_t>> classes;
    classes.reserve(groups.size());
    for (auto& [key, members] : groups) classes.push_back(std::move(members));
    std::sort(classes.begin(), classes.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return classes;
}

namespace detail {

// Final assembly shared by binarize(), the row-resampling used for bagging,
// and the python bindings: grid, censoring weights and equivalence classes
// from already-binary columns.
BinaryDataset assemble_dataset(std::vector<Bitmask> features,
                               std::vector<std::string> feature_names,
                               std::vector<FeatureProvenance> provenance,
                               std::vector<std::string> dropped_columns,
                               std::vector<double> times,
                               std::vector<std::uint8_t> events) {
    BinaryDataset ds;
    ds.n_ = times.size();
    ds.features_ = std::move(features);
    ds.feature_names_ = std::move(feature_names);
    ds.provenance_ = std::move(provenance);
    ds.dropped_columns_ = std::move(dropped_columns);
    ds.times_ = std::move(times);
    ds.events_ = std::move(events);

    // Time grid over the distinct observed times.
    std::set<double> distinct(ds.times_.begin(), ds.times_.end());
    ds.grid_.breakpoints.assign(distinct.begin(), distinct.end());
    ds.grid_.y_max = ds.grid_.breakpoints.back();
    ds.grid_.interval_lengths.resize(ds.grid_.breakpoints.size());
    for (std::size_t k = 0; k < ds.grid_.breakpoints.size(); ++k)
        ds.grid_.interval_lengths[k] = ds.grid_.breakpoints[k] - ds.grid_.interval_start(k);

    ds.time_index_.resize(ds.n_);
    for (std::size_t i = 0; i < ds.n_; ++i) {
        auto it = std::lower_bound(ds.grid_.breakpoints.begin(), ds.grid_.breakpoints.end(),
                                   ds.times_[i]);
        ds.time_index_[i] = std::size_t(it - ds.grid_.breakpoints.begin());
    }

    ds.censoring_curve_ = censoring_distribution(ds.times_, ds.events_);
    ds.normalizer_ = 1.0 / (ds.grid_.y_max * double(ds.n_));

    // 1/G on each interval; G is evaluated at the interval start,
    // right-continuously. Intervals where G has fallen to 0 get weight 0.
    ds.inv_g_.resize(ds.grid_.size());
    for (std::size_t k = 0; k < ds.grid_.size(); ++k) {
        double g = ds.censoring_curve_(ds.grid_.interval_start(k));
        ds.inv_g_[k] = g > 0.0 ? 1.0 / g : 0.0;
    }
    ds.death_weight_.resize(ds.n_);
    for (std::size_t i = 0; i < ds.n_; ++i) {
        if (!ds.events_[i]) { ds.death_weight_[i] = 0.0; continue; }
        double g = ds.censoring_curve_.left_limit(ds.times_[i]);
        ds.death_weight_[i] = g > 0.0 ? 1.0 / g : 0.0;
    }

    // Equivalence classes with aggregated weights and their loss floors.
    auto classes = equivalence_classes(ds.features_, ds.n_);
    ds.class_of_.resize(ds.n_);
    ds.equiv_share_.resize(ds.n_);
    ds.classes_.reserve(classes.size());
    for (std::size_t c = 0; c < classes.size(); ++c) {
        EquivalentSet set;
        set.member_indices = std::move(classes[c]);
        set.toward_one_sum.assign(ds.grid_.size(), 0.0);
        set.toward_zero_sum.assign(ds.grid_.size(), 0.0);
        for (std::size_t i : set.member_indices) {
            ds.class_of_[i] = c;
            WeightVector w = ds.weights(i);
            for (std::size_t k = 0; k < ds.grid_.size(); ++k) {
                set.toward_one_sum[k] += w.toward_one(k);
                set.toward_zero_sum[k] += w.toward_zero(k);
            }
        }
        set.equivalent_loss = equivalent_loss(set, ds);
        double share = set.equivalent_loss / double(set.member_indices.size());
        for (std::size_t i : set.member_indices) ds.equiv_share_[i] = share;
        ds.classes_.push_back(std::move(set));
    }
    return ds;
}

} // namespace detail

BinaryDataset binarize(const RawDataset& raw, const BinarizeStrategy& strategy) {
    if (raw.n() == 0) throw DataError(DataError::Kind::NoRows, "binarize: empty dataset");

    std::vector<Bitmask> features;
    std::vector<std::string> names;
    std::vector<FeatureProvenance> provenance;
    std::vector<std::string> dropped;

    auto add_column = [&](Bitmask column, std::string name, FeatureProvenance prov) {
        std::size_t ones = column.count();
        if (ones == 0 || ones == raw.n()) {  // constant, carries no split
            dropped.push_back(name);
            return;
        }
        features.push_back(std::move(column));
        names.push_back(std::move(name));
        prov.column_name = names.back();
        provenance.push_back(std::move(prov));
    };

    for (const RawColumn& col : raw.columns) {
        if (col.numeric) {
            std::vector<double> sorted(col.numeric_values);
            std::sort(sorted.begin(), sorted.end());
            sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
            if (sorted.size() < 2) {
                dropped.push_back(col.name);
                continue;
            }
            auto kind = strategy.kind;
            if (auto it = strategy.per_feature.find(col.name); it != strategy.per_feature.end())
                kind = it->second;

            if (kind == BinarizeStrategy::Kind::AllThresholds) {
                // one column per midpoint between consecutive distinct values
                for (std::size_t v = 0; v + 1 < sorted.size(); ++v) {
                    double theta = 0.5 * (sorted[v] + sorted[v + 1]);
                    Bitmask column(raw.n());
                    for (std::size_t i = 0; i < raw.n(); ++i)
                        if (col.numeric_values[i] <= theta) column.set(i);
                    FeatureProvenance prov;
                    prov.raw_feature = col.name;
                    prov.kind = "threshold";
                    prov.threshold = theta;
                    add_column(std::move(column), col.name + "<=" + format_number(theta),
                               std::move(prov));
                }
            } else {
                int bins = strategy.bins;
                if (auto it = strategy.per_feature_bins.find(col.name);
                    it != strategy.per_feature_bins.end())
                    bins = it->second;
                if (bins < 2) throw ConfigError("equal_width needs at least 2 bins");
                double lo = sorted.front(), hi = sorted.back();
                double width = (hi - lo) / double(bins);
                // ordered bins keep their order: one threshold column per
                // interior bin edge (b-1 columns for b bins)
                for (int b = 1; b < bins; ++b) {
                    double edge = lo + width * double(b);
                    Bitmask column(raw.n());
                    for (std::size_t i = 0; i < raw.n(); ++i)
                        if (col.numeric_values[i] < edge) column.set(i);
                    FeatureProvenance prov;
                    prov.raw_feature = col.name;
                    prov.kind = "bin";
                    prov.bin_low = lo;
                    prov.bin_high = edge;
                    add_column(std::move(column), col.name + "<" + format_number(edge),
                               std::move(prov));
                }
            }
        } else {
            std::set<std::string> categories(col.string_values.begin(), col.string_values.end());
            if (categories.size() < 2) {
                dropped.push_back(col.name);
                continue;
            }
            // dummy column per category beyond the first (binary features get
            // a single column; the complement carries the same split)
            bool first = true;
            for (const std::string& cat : categories) {
                if (first) { first = false; continue; }
                Bitmask column(raw.n());
                for (std::size_t i = 0; i < raw.n(); ++i)
                    if (col.string_values[i] == cat) column.set(i);
                FeatureProvenance prov;
                prov.raw_feature = col.name;
                prov.kind = "category";
                prov.category = cat;
                add_column(std::move(column), col.name + "=" + cat, std::move(prov));
            }
        }
    }

    if (features.empty())
        throw DataError(DataError::Kind::DegenerateFeatures,
                        "binarize: no usable binary features remain");

    return detail::assemble_dataset(std::move(features), std::move(names), std::move(provenance),
                                    std::move(dropped), raw.times, raw.events);
}

std::string BinaryDataset::binarization_report_json() const {
    nlohmann::json report;
    report["n"] = n_;
    report["m"] = m();
    report["y_max"] = grid_.y_max;
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& p : provenance_) {
        nlohmann::json c;
        c["column"] = p.column_name;
        c["source"] = p.raw_feature;
        c["kind"] = p.kind;
        if (p.kind == "threshold") c["threshold"] = p.threshold;
        if (p.kind == "bin") { c["low"] = p.bin_low; c["high"] = p.bin_high; }
        if (p.kind == "category") c["category"] = p.category;
        cols.push_back(c);
    }
    report["columns"] = cols;
    report["dropped"] = dropped_columns_;
    // G can legitimately be truncated to 0 past the last censoring time.
    bool truncated = false;
    for (double v : inv_g_) truncated |= (v == 0.0);
    report["censoring_weight_truncated"] = truncated;
    return report.dump(2);
}

} // namespace survtree
