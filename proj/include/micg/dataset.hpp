#pragma once

#include "micg/catalog.hpp"
#include "micg/csv.hpp"
#include "micg/error.hpp"
#include "micg/expr.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace micg {

enum class Sex { male, female };
enum class Area { urban, rural };

inline std::string_view to_string(Sex s) { return s == Sex::male ? "male" : "female"; }
inline std::string_view to_string(Area a) { return a == Area::urban ? "urban" : "rural"; }

/// Identity and grouping covariates of one child.
struct ChildInfo {
    std::string child_id;
    std::optional<Sex> sex;
    std::optional<Area> area;
    std::string country;
};

struct ChildRecord {
    ChildInfo info;
    std::vector<Value> values; // aligned with ChildDataset::columns
};

struct ChildDataset {
    std::vector<std::string> columns;
    std::vector<ChildRecord> records;
    std::size_t warning_count = 0;
    std::vector<std::string> warnings;

    std::size_t size() const { return records.size(); }

    std::vector<ChildInfo> children() const {
        std::vector<ChildInfo> out;
        out.reserve(records.size());
        for (const auto &r : records) {
            out.push_back(r.info);
        }
        return out;
    }
};

namespace detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto &c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

inline std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return std::string(s);
}

} // namespace detail

inline std::optional<Sex> parse_sex(std::string_view text) {
    const auto v = detail::lower(detail::trim(text));
    if (v.empty()) {
        return std::nullopt;
    }
    if (v == "male") {
        return Sex::male;
    }
    if (v == "female") {
        return Sex::female;
    }
    throw ValidationError("sex must be 'male' or 'female', got '" + std::string(text) + "'");
}

inline std::optional<Area> parse_area(std::string_view text) {
    const auto v = detail::lower(detail::trim(text));
    if (v.empty()) {
        return std::nullopt;
    }
    if (v == "urban") {
        return Area::urban;
    }
    if (v == "rural") {
        return Area::rural;
    }
    throw ValidationError("area must be 'urban' or 'rural', got '" + std::string(text) + "'");
}

/// Parse child-level CSV. Requires child_id, sex, area, country and every catalog source column.
/// Empty cells are missing; numeric cells that do not parse become missing and bump the warning count.
inline ChildDataset ingest_records(std::string_view csv_text, const IndicatorCatalog &catalog) {
    const CsvTable table = parse_csv(csv_text);
    const std::size_t id_col = table.require_column("child_id");
    const std::size_t sex_col = table.require_column("sex");
    const std::size_t area_col = table.require_column("area");
    const std::size_t country_col = table.require_column("country");

    ChildDataset ds;
    ds.columns = catalog.source_columns();
    std::vector<std::size_t> positions;
    for (const auto &c : ds.columns) {
        positions.push_back(table.require_column(c));
    }

    std::set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto &row = table.rows[r];
        ChildRecord rec;
        rec.info.child_id = detail::trim(row[id_col]);
        if (rec.info.child_id.empty()) {
            throw ValidationError("row " + std::to_string(r + 1) + " has an empty child_id");
        }
        if (!seen.insert(rec.info.child_id).second) {
            throw ValidationError("duplicate child_id '" + rec.info.child_id + "'");
        }
        rec.info.sex = parse_sex(row[sex_col]);
        rec.info.area = parse_area(row[area_col]);
        rec.info.country = detail::trim(row[country_col]);

        rec.values.reserve(ds.columns.size());
        for (std::size_t c = 0; c < ds.columns.size(); ++c) {
            const std::string cell = detail::trim(row[positions[c]]);
            if (cell.empty()) {
                rec.values.emplace_back(Missing{});
            } else if (catalog.is_categorical(ds.columns[c])) {
                rec.values.emplace_back(cell);
            } else if (auto v = parse_number(cell)) {
                rec.values.emplace_back(*v);
            } else {
                rec.values.emplace_back(Missing{});
                ++ds.warning_count;
                ds.warnings.push_back("child '" + rec.info.child_id + "', column '" + ds.columns[c] +
                                      "': '" + cell + "' is not a number; treated as missing");
            }
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

/// CSV in the layout `ingest_records` reads.
inline std::string write_dataset_csv(const ChildDataset &ds) {
    std::string out = "child_id,sex,area,country";
    for (const auto &c : ds.columns) {
        out += ',' + csv_escape(c);
    }
    out += '\n';
    for (const auto &r : ds.records) {
        out += csv_escape(r.info.child_id);
        out += ',';
        if (r.info.sex) {
            out += to_string(*r.info.sex);
        }
        out += ',';
        if (r.info.area) {
            out += to_string(*r.info.area);
        }
        out += ',' + csv_escape(r.info.country);
        for (const auto &v : r.values) {
            out += ',';
            if (const double *d = std::get_if<double>(&v)) {
                out += format_number(*d);
            } else if (const auto *s = std::get_if<std::string>(&v)) {
                out += csv_escape(*s);
            }
        }
        out += '\n';
    }
    return out;
}

} // namespace micg
