#pragma once

#include "micg/csv.hpp"
#include "micg/error.hpp"

#include <Eigen/Dense>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace micg {

/// Inner join on `key`, keeping the row order of the first table. Later tables only add
/// columns the earlier ones do not have.
inline CsvTable join_tables(const std::vector<CsvTable> &tables, const std::string &key = "child_id") {
    if (tables.empty()) {
        throw ValidationError("nothing to join");
    }
    CsvTable out;
    out.header = tables.front().header;
    const std::size_t key0 = tables.front().require_column(key);

    std::vector<std::map<std::string, std::size_t>> index(tables.size());
    std::vector<std::vector<std::size_t>> extra(tables.size());
    for (std::size_t t = 1; t < tables.size(); ++t) {
        const std::size_t kc = tables[t].require_column(key);
        for (std::size_t r = 0; r < tables[t].rows.size(); ++r) {
            index[t][tables[t].rows[r][kc]] = r;
        }
        for (std::size_t c = 0; c < tables[t].header.size(); ++c) {
            const auto &name = tables[t].header[c];
            if (out.column(name) < 0) {
                out.header.push_back(name);
                extra[t].push_back(c);
            }
        }
    }
    for (const auto &row : tables.front().rows) {
        std::vector<std::string> joined = row;
        bool complete = true;
        for (std::size_t t = 1; t < tables.size() && complete; ++t) {
            auto it = index[t].find(row[key0]);
            if (it == index[t].end()) {
                complete = false;
                break;
            }
            for (std::size_t c : extra[t]) {
                joined.push_back(tables[t].rows[it->second][c]);
            }
        }
        if (complete) {
            out.rows.push_back(std::move(joined));
        }
    }
    return out;
}

/// Response vector and design matrix assembled from table columns.
struct Design {
    std::vector<std::string> row_ids;
    std::vector<std::string> terms;
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    std::size_t dropped_rows = 0; // rows with a missing response or covariate
};

/// Intercept first, then each covariate: numeric when every non-empty cell parses, otherwise
/// categorical with dummies `name=level` against the alphabetically first level.
inline Design build_design(const CsvTable &table, const std::string &response,
                           const std::vector<std::string> &covariates, const std::string &id_column = "child_id") {
    const int id_col = table.column(id_column);
    const std::size_t y_col = table.require_column(response);

    struct Term {
        std::size_t column;
        bool numeric;
        std::string level; // for dummies
    };
    std::vector<Term> terms;
    Design d;
    d.terms.push_back("(intercept)");
    auto is_missing_cell = [](const std::string &s) { return s.empty() || s == "NA"; };
    for (const auto &name : covariates) {
        const std::size_t c = table.require_column(name);
        bool numeric = true;
        std::set<std::string> levels;
        for (const auto &row : table.rows) {
            if (is_missing_cell(row[c])) {
                continue;
            }
            levels.insert(row[c]);
            numeric &= parse_number(row[c]).has_value();
        }
        if (numeric) {
            terms.push_back({c, true, {}});
            d.terms.push_back(name);
        } else {
            if (levels.size() < 2) {
                throw ValidationError("categorical covariate '" + name + "' has fewer than 2 levels");
            }
            for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
                terms.push_back({c, false, *it});
                d.terms.push_back(name + "=" + *it);
            }
        }
    }

    std::vector<std::vector<double>> rows;
    std::vector<double> ys;
    for (const auto &row : table.rows) {
        auto yv = parse_number(row[y_col]);
        bool ok = yv.has_value();
        std::vector<double> xr{1.0};
        for (const auto &t : terms) {
            if (!ok) {
                break;
            }
            const auto &cell = row[t.column];
            if (is_missing_cell(cell)) {
                ok = false;
            } else if (t.numeric) {
                xr.push_back(*parse_number(cell));
            } else {
                xr.push_back(cell == t.level ? 1.0 : 0.0);
            }
        }
        if (!ok) {
            ++d.dropped_rows;
            continue;
        }
        d.row_ids.push_back(id_col >= 0 ? row[id_col] : std::to_string(rows.size() + 1));
        ys.push_back(*yv);
        rows.push_back(std::move(xr));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(d.terms.size());
    d.y.resize(n);
    d.x.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        d.y(i) = ys[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < p; ++j) {
            d.x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    return d;
}

} // namespace micg
