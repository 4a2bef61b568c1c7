#pragma once

#include "micg/error.hpp"
#include "micg/expr.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace micg {

/// One indicator: a named cut-off rule over one or more source columns.
struct IndicatorDef {
    std::string id;
    std::vector<std::string> source_columns;
    Expr rule;
    std::string description;
};

struct DimensionDef {
    std::string name;
    std::vector<IndicatorDef> indicators;
};

/// Ordered dimension/indicator schema with cut-off rules.
///
/// Catalog text is JSON:
/// {
///   "parameters": {"domestic_hours_threshold": null},     // optional named constants
///   "categorical_columns": ["health_vs_peers"],           // optional; others are numeric
///   "dimensions": [
///     {"name": "Life and physical health",
///      "indicators": [{"id": "stunting", "source_column": "haz",
///                      "rule": "haz < -2", "description": "..."}]}
///   ]
/// }
class IndicatorCatalog {
public:
    const std::vector<DimensionDef> &dimensions() const { return dimensions_; }
    std::size_t dimension_count() const { return dimensions_.size(); }
    std::size_t indicator_count() const {
        std::size_t n = 0;
        for (const auto &d : dimensions_) {
            n += d.indicators.size();
        }
        return n;
    }

    /// Indicator ids in declaration order (the column order of every deprivation matrix).
    std::vector<std::string> indicator_ids() const {
        std::vector<std::string> ids;
        for (const auto &d : dimensions_) {
            for (const auto &ind : d.indicators) {
                ids.push_back(ind.id);
            }
        }
        return ids;
    }

    std::vector<std::string> dimension_names() const {
        std::vector<std::string> names;
        for (const auto &d : dimensions_) {
            names.push_back(d.name);
        }
        return names;
    }

    /// Dimension index of every indicator, in indicator order.
    std::vector<std::size_t> dimension_of_indicator() const {
        std::vector<std::size_t> out;
        for (std::size_t d = 0; d < dimensions_.size(); ++d) {
            out.insert(out.end(), dimensions_[d].indicators.size(), d);
        }
        return out;
    }

    /// Union of source columns, first-use order.
    std::vector<std::string> source_columns() const {
        std::vector<std::string> cols;
        for (const auto &d : dimensions_) {
            for (const auto &ind : d.indicators) {
                for (const auto &c : ind.source_columns) {
                    if (std::find(cols.begin(), cols.end(), c) == cols.end()) {
                        cols.push_back(c);
                    }
                }
            }
        }
        return cols;
    }

    bool is_categorical(const std::string &column) const { return categorical_.count(column) > 0; }
    const std::set<std::string> &categorical_columns() const { return categorical_; }

    const std::map<std::string, std::optional<double>> &parameters() const { return parameters_; }

    void set_parameter(const std::string &name, double value) {
        auto it = parameters_.find(name);
        if (it == parameters_.end()) {
            throw ValidationError("catalog has no parameter named '" + name + "'");
        }
        it->second = value;
    }

    friend IndicatorCatalog parse_catalog(std::string_view text);

private:
    std::vector<DimensionDef> dimensions_;
    std::set<std::string> categorical_;
    std::map<std::string, std::optional<double>> parameters_;
};

inline IndicatorCatalog parse_catalog(std::string_view text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ValidationError(std::string("catalog is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("dimensions") || !doc["dimensions"].is_array()) {
        throw ValidationError("catalog needs a top-level 'dimensions' array");
    }

    IndicatorCatalog cat;
    if (doc.contains("parameters")) {
        for (const auto &[name, value] : doc["parameters"].items()) {
            if (value.is_null()) {
                cat.parameters_[name] = std::nullopt;
            } else if (value.is_number()) {
                cat.parameters_[name] = value.get<double>();
            } else {
                throw ValidationError("parameter '" + name + "' must be a number or null");
            }
        }
    }
    if (doc.contains("categorical_columns")) {
        for (const auto &c : doc["categorical_columns"]) {
            cat.categorical_.insert(c.get<std::string>());
        }
    }

    std::set<std::string> dim_names;
    std::set<std::string> ids;
    for (const auto &jd : doc["dimensions"]) {
        DimensionDef dim;
        dim.name = jd.value("name", "");
        if (dim.name.empty()) {
            throw ValidationError("dimension without a name");
        }
        if (!dim_names.insert(dim.name).second) {
            throw ValidationError("duplicate dimension '" + dim.name + "'");
        }
        if (!jd.contains("indicators") || jd["indicators"].empty()) {
            throw ValidationError("dimension '" + dim.name + "' has no indicators");
        }
        for (const auto &ji : jd["indicators"]) {
            IndicatorDef ind;
            ind.id = ji.value("id", "");
            if (ind.id.empty()) {
                throw ValidationError("indicator without an id in dimension '" + dim.name + "'");
            }
            if (!ids.insert(ind.id).second) {
                throw ValidationError("duplicate indicator id '" + ind.id + "'");
            }
            ind.description = ji.value("description", "");
            const std::string rule_text = ji.value("rule", "");
            try {
                ind.rule = Expr::parse(rule_text);
            } catch (const SyntaxError &e) {
                throw SyntaxError("indicator '" + ind.id + "' rule '" + rule_text + "'", e.token(),
                                  e.offset());
            }
            if (!ind.rule.is_boolean()) {
                throw ValidationError("indicator '" + ind.id + "' rule '" + rule_text +
                                      "' is not a comparison");
            }

            std::vector<std::string> referenced;
            for (auto &name : ind.rule.names()) {
                if (!cat.parameters_.count(name)) {
                    referenced.push_back(name);
                }
            }
            if (ji.contains("source_column")) {
                const auto &sc = ji["source_column"];
                if (sc.is_string()) {
                    ind.source_columns.push_back(sc.get<std::string>());
                } else {
                    for (const auto &c : sc) {
                        ind.source_columns.push_back(c.get<std::string>());
                    }
                }
                for (const auto &name : referenced) {
                    if (std::find(ind.source_columns.begin(), ind.source_columns.end(), name) ==
                        ind.source_columns.end()) {
                        throw ValidationError("indicator '" + ind.id + "' rule references '" + name +
                                              "', which is not a declared source column");
                    }
                }
            } else {
                ind.source_columns = referenced;
            }
            dim.indicators.push_back(std::move(ind));
        }
        cat.dimensions_.push_back(std::move(dim));
    }
    if (cat.dimensions_.empty()) {
        throw ValidationError("catalog declares no dimensions");
    }
    return cat;
}

inline std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline IndicatorCatalog load_catalog(const std::string &path) { return parse_catalog(read_text_file(path)); }

} // namespace micg
