#pragma once

#include "micg/catalog.hpp"
#include "micg/csv.hpp"
#include "micg/dataset.hpp"
#include "micg/error.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace micg {

enum class Cell : std::int8_t { missing = -1, no = 0, yes = 1 };

enum class MissingPolicy { exclude_child, treat_nondeprived, renormalize };

inline std::string_view to_string(MissingPolicy p) {
    switch (p) {
    case MissingPolicy::exclude_child: return "exclude_child";
    case MissingPolicy::treat_nondeprived: return "treat_nondeprived";
    case MissingPolicy::renormalize: return "renormalize";
    }
    return "exclude_child";
}

inline MissingPolicy parse_missing_policy(std::string_view s) {
    if (s == "exclude_child") return MissingPolicy::exclude_child;
    if (s == "treat_nondeprived") return MissingPolicy::treat_nondeprived;
    if (s == "renormalize") return MissingPolicy::renormalize;
    throw ValidationError("unknown missing policy '" + std::string(s) +
                          "' (expected exclude_child, treat_nondeprived or renormalize)");
}

/// Children x indicators cells in {0, 1, missing}; columns follow catalog order.
struct DeprivationMatrix {
    std::vector<ChildInfo> children;
    std::vector<std::string> indicators;
    std::vector<Cell> cells; // row-major
    MissingPolicy policy = MissingPolicy::exclude_child;

    std::size_t rows() const { return children.size(); }
    std::size_t cols() const { return indicators.size(); }
    Cell at(std::size_t i, std::size_t j) const { return cells[i * cols() + j]; }
    Cell &at(std::size_t i, std::size_t j) { return cells[i * cols() + j]; }
    std::span<const Cell> row(std::size_t i) const { return {cells.data() + i * cols(), cols()}; }

    bool has_missing() const {
        return std::find(cells.begin(), cells.end(), Cell::missing) != cells.end();
    }

    int column(std::string_view id) const {
        for (std::size_t j = 0; j < indicators.size(); ++j) {
            if (indicators[j] == id) {
                return static_cast<int>(j);
            }
        }
        return -1;
    }
};

inline Cell to_cell(const Value &v) {
    if (is_missing(v)) {
        return Cell::missing;
    }
    return std::get<bool>(v) ? Cell::yes : Cell::no;
}

/// Evaluate every indicator rule for every child and apply the missing-data policy.
inline DeprivationMatrix code_deprivations(const ChildDataset &dataset, const IndicatorCatalog &catalog,
                                           MissingPolicy policy = MissingPolicy::exclude_child) {
    std::vector<std::string> names = dataset.columns;
    std::vector<Value> params;
    for (const auto &[name, value] : catalog.parameters()) {
        names.push_back(name);
        params.push_back(value ? Value{*value} : Value{Missing{}});
    }

    std::vector<Expr> rules;
    for (const auto &dim : catalog.dimensions()) {
        for (const auto &ind : dim.indicators) {
            for (const auto &name : ind.rule.names()) {
                auto it = catalog.parameters().find(name);
                if (it != catalog.parameters().end() && !it->second) {
                    throw ValidationError("indicator '" + ind.id + "' needs parameter '" + name +
                                          "', which has no value");
                }
            }
            Expr rule = ind.rule;
            rule.bind(names);
            rules.push_back(std::move(rule));
        }
    }

    DeprivationMatrix m;
    m.indicators = catalog.indicator_ids();
    m.policy = policy;
    std::vector<Value> vars;
    std::vector<Cell> row(rules.size());
    for (const auto &rec : dataset.records) {
        vars = rec.values;
        vars.insert(vars.end(), params.begin(), params.end());
        bool any_missing = false;
        for (std::size_t j = 0; j < rules.size(); ++j) {
            row[j] = to_cell(rules[j].evaluate(vars));
            any_missing |= row[j] == Cell::missing;
        }
        if (any_missing) {
            if (policy == MissingPolicy::exclude_child) {
                continue;
            }
            if (policy == MissingPolicy::treat_nondeprived) {
                for (auto &c : row) {
                    if (c == Cell::missing) {
                        c = Cell::no;
                    }
                }
            }
        }
        m.children.push_back(rec.info);
        m.cells.insert(m.cells.end(), row.begin(), row.end());
    }
    if (m.children.empty()) {
        throw ValidationError("no children left after coding deprivations (policy " +
                              std::string(to_string(policy)) + ")");
    }
    return m;
}

inline std::string write_matrix_csv(const DeprivationMatrix &m) {
    std::string out = "# missing_policy=" + std::string(to_string(m.policy)) + "\n";
    out += "child_id,sex,area,country";
    for (const auto &id : m.indicators) {
        out += ',' + csv_escape(id);
    }
    out += '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto &c = m.children[i];
        out += csv_escape(c.child_id) + ',' + (c.sex ? std::string(to_string(*c.sex)) : "") + ',' +
               (c.area ? std::string(to_string(*c.area)) : "") + ',' + csv_escape(c.country);
        for (Cell cell : m.row(i)) {
            out += cell == Cell::missing ? ",NA" : (cell == Cell::yes ? ",1" : ",0");
        }
        out += '\n';
    }
    return out;
}

inline DeprivationMatrix read_matrix_csv(std::string_view text) {
    const CsvTable t = parse_csv(text);
    DeprivationMatrix m;
    for (const auto &c : t.comments) {
        const auto at = c.find("missing_policy=");
        if (at != std::string::npos) {
            std::string_view rest = std::string_view(c).substr(at + 15);
            rest = rest.substr(0, rest.find_first_of(" \t"));
            m.policy = parse_missing_policy(rest);
        }
    }
    const std::size_t id_col = t.require_column("child_id");
    const int sex_col = t.column("sex");
    const int area_col = t.column("area");
    const int country_col = t.column("country");
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < t.header.size(); ++j) {
        const auto &h = t.header[j];
        if (h != "child_id" && h != "sex" && h != "area" && h != "country") {
            m.indicators.push_back(h);
            cols.push_back(j);
        }
    }
    for (const auto &row : t.rows) {
        ChildInfo info;
        info.child_id = row[id_col];
        if (sex_col >= 0) info.sex = parse_sex(row[sex_col]);
        if (area_col >= 0) info.area = parse_area(row[area_col]);
        if (country_col >= 0) info.country = row[country_col];
        m.children.push_back(std::move(info));
        for (std::size_t j : cols) {
            const std::string &v = row[j];
            if (v == "1") {
                m.cells.push_back(Cell::yes);
            } else if (v == "0") {
                m.cells.push_back(Cell::no);
            } else if (v == "NA" || v.empty()) {
                m.cells.push_back(Cell::missing);
            } else {
                throw ValidationError("matrix cell '" + v + "' is not 0, 1 or NA");
            }
        }
    }
    return m;
}

} // namespace micg
