#pragma once

#include "micg/catalog.hpp"
#include "micg/csv.hpp"
#include "micg/dataset.hpp"
#include "micg/deprivation.hpp"
#include "micg/error.hpp"
#include "micg/weighting.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace micg {

struct ChildScore {
    std::string child_id;
    double deprivation = 0.0; // D
    double achievement = 1.0; // A = 1 - D
    bool deprived = false;    // D >= k
};

struct MicgResult {
    double k = 1.0 / 3.0;
    std::vector<ChildScore> children;

    /// Share of children identified as deprived (H).
    double headcount_ratio() const {
        if (children.empty()) {
            return 0.0;
        }
        std::size_t q = 0;
        for (const auto &c : children) {
            q += c.deprived;
        }
        return static_cast<double>(q) / static_cast<double>(children.size());
    }

    /// Mean deprivation score among the deprived; zero when nobody is deprived.
    double intensity() const {
        double sum = 0.0;
        std::size_t q = 0;
        for (const auto &c : children) {
            if (c.deprived) {
                sum += c.deprivation;
                ++q;
            }
        }
        return q == 0 ? 0.0 : sum / static_cast<double>(q);
    }

    double adjusted_headcount() const { return headcount_ratio() * intensity(); }

    std::vector<double> achievements() const {
        std::vector<double> a;
        a.reserve(children.size());
        for (const auto &c : children) {
            a.push_back(c.achievement);
        }
        return a;
    }
};

namespace detail {

/// Matrix column index of every weighted indicator.
inline std::vector<std::size_t> weight_columns(const DeprivationMatrix &m, const WeightVector &w) {
    std::vector<std::size_t> cols;
    for (const auto &id : w.ids) {
        const int c = m.column(id);
        if (c < 0) {
            throw ValidationError("weighted indicator '" + id + "' is not a matrix column");
        }
        cols.push_back(static_cast<std::size_t>(c));
    }
    return cols;
}

inline void check_missing_allowed(const DeprivationMatrix &m) {
    if (m.policy != MissingPolicy::renormalize && m.has_missing()) {
        throw ValidationError("matrix has missing cells but its policy is " +
                              std::string(to_string(m.policy)));
    }
}

} // namespace detail

/// D_i = sum_j w_j * cell_ij over observed cells, divided by the observed weight mass
/// (exactly the total weight unless the policy is renormalize).
inline MicgResult deprivation_scores(const DeprivationMatrix &matrix, const WeightVector &weights,
                                     double k = 1.0 / 3.0) {
    if (!(k > 0.0 && k <= 1.0)) {
        throw ValidationError("identification cutoff k must lie in (0, 1]");
    }
    detail::check_missing_allowed(matrix);
    const auto cols = detail::weight_columns(matrix, weights);

    MicgResult result;
    result.k = k;
    result.children.reserve(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        double deprived_mass = 0.0;
        double observed_mass = 0.0;
        for (std::size_t t = 0; t < cols.size(); ++t) {
            const Cell c = matrix.at(i, cols[t]);
            if (c == Cell::missing) {
                continue;
            }
            observed_mass += weights.weights[t];
            deprived_mass += c == Cell::yes ? weights.weights[t] : 0.0;
        }
        if (observed_mass <= 0.0) {
            throw ValidationError("child '" + matrix.children[i].child_id +
                                  "' has no observed weighted indicator");
        }
        ChildScore s;
        s.child_id = matrix.children[i].child_id;
        s.deprivation = deprived_mass / observed_mass;
        s.achievement = 1.0 - s.deprivation;
        s.deprived = s.deprivation >= k;
        result.children.push_back(std::move(s));
    }
    return result;
}

enum class DimensionMode {
    graded, // 1 - weighted share of deprived indicators in the dimension
    binary  // 1 when the child is deprived in none of the dimension's indicators
};

struct DimensionScores {
    std::vector<std::string> dimensions;
    std::vector<double> dimension_weights; // normalised weight mass of each dimension
    std::vector<std::string> child_ids;
    std::vector<std::vector<double>> scores; // child x dimension, NaN when nothing observed
};

inline DimensionScores dimension_achievements(const DeprivationMatrix &matrix, const IndicatorCatalog &catalog,
                                              const WeightVector &weights,
                                              DimensionMode mode = DimensionMode::graded) {
    if (matrix.indicators != catalog.indicator_ids()) {
        throw ValidationError("matrix columns do not match the catalog indicators");
    }
    detail::check_missing_allowed(matrix);
    const auto dim_of = catalog.dimension_of_indicator();
    const std::size_t n_dim = catalog.dimension_count();

    std::vector<double> w(matrix.cols(), 0.0);
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
        w[j] = weights.weight_of(matrix.indicators[j]);
    }

    DimensionScores out;
    out.dimensions = catalog.dimension_names();
    out.dimension_weights.assign(n_dim, 0.0);
    double total = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        out.dimension_weights[dim_of[j]] += w[j];
        total += w[j];
    }
    for (auto &dw : out.dimension_weights) {
        dw /= total;
    }

    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        std::vector<double> mass(n_dim, 0.0), deprived(n_dim, 0.0);
        std::vector<std::size_t> observed(n_dim, 0), hits(n_dim, 0);
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            const Cell c = matrix.at(i, j);
            if (c == Cell::missing) {
                continue;
            }
            const std::size_t d = dim_of[j];
            ++observed[d];
            mass[d] += w[j];
            if (c == Cell::yes) {
                ++hits[d];
                deprived[d] += w[j];
            }
        }
        std::vector<double> row(n_dim);
        for (std::size_t d = 0; d < n_dim; ++d) {
            if (observed[d] == 0) {
                row[d] = std::numeric_limits<double>::quiet_NaN();
            } else if (mode == DimensionMode::binary) {
                row[d] = hits[d] == 0 ? 1.0 : 0.0;
            } else if (mass[d] > 0.0) {
                row[d] = 1.0 - deprived[d] / mass[d];
            } else {
                // Zero-weight dimension: fall back to equal shares.
                row[d] = 1.0 - static_cast<double>(hits[d]) / static_cast<double>(observed[d]);
            }
        }
        out.child_ids.push_back(matrix.children[i].child_id);
        out.scores.push_back(std::move(row));
    }
    return out;
}

/// Group label per child built from the named keys ("country", "sex", "area"), joined by '|'.
inline std::vector<std::string> group_labels(const std::vector<ChildInfo> &children,
                                             const std::vector<std::string> &keys) {
    std::vector<std::string> labels;
    labels.reserve(children.size());
    for (const auto &c : children) {
        std::string label;
        for (std::size_t k = 0; k < keys.size(); ++k) {
            std::string part;
            if (keys[k] == "sex") {
                if (!c.sex) throw ValidationError("child '" + c.child_id + "' has no sex for grouping");
                part = to_string(*c.sex);
            } else if (keys[k] == "area") {
                if (!c.area) throw ValidationError("child '" + c.child_id + "' has no area for grouping");
                part = to_string(*c.area);
            } else if (keys[k] == "country") {
                if (c.country.empty()) {
                    throw ValidationError("child '" + c.child_id + "' has no country for grouping");
                }
                part = c.country;
            } else {
                throw ValidationError("unknown grouping key '" + keys[k] + "' (use country, sex, area)");
            }
            label += (k ? "|" : "") + part;
        }
        labels.push_back(label.empty() ? "all" : label);
    }
    return labels;
}

/// Per-group mean dimension achievement as a percentage.
struct DimensionProfile {
    std::vector<std::string> dimensions;
    std::vector<std::string> groups; // sorted
    std::vector<std::size_t> sizes;
    std::vector<std::vector<double>> percent; // group x dimension, in [0, 100]
};

inline DimensionProfile group_profile(const DimensionScores &scores, const std::vector<std::string> &labels) {
    if (labels.size() != scores.scores.size()) {
        throw ValidationError("one group label per child is required");
    }
    const std::size_t n_dim = scores.dimensions.size();
    std::map<std::string, std::pair<std::vector<double>, std::vector<std::size_t>>> acc;
    std::map<std::string, std::size_t> sizes;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto &[sum, count] = acc[labels[i]];
        if (sum.empty()) {
            sum.assign(n_dim, 0.0);
            count.assign(n_dim, 0);
        }
        ++sizes[labels[i]];
        for (std::size_t d = 0; d < n_dim; ++d) {
            const double v = scores.scores[i][d];
            if (!std::isnan(v)) {
                sum[d] += v;
                ++count[d];
            }
        }
    }
    if (acc.empty()) {
        throw ValidationError("group profile of an empty set of children");
    }
    DimensionProfile p;
    p.dimensions = scores.dimensions;
    for (const auto &[label, sc] : acc) {
        p.groups.push_back(label);
        p.sizes.push_back(sizes[label]);
        std::vector<double> row(n_dim);
        for (std::size_t d = 0; d < n_dim; ++d) {
            row[d] = sc.second[d] == 0 ? std::numeric_limits<double>::quiet_NaN()
                                       : 100.0 * sc.first[d] / static_cast<double>(sc.second[d]);
        }
        p.percent.push_back(std::move(row));
    }
    return p;
}

/// Counts by country x area x sex, with percentages of each country's total.
struct FrequencyTable {
    struct Row {
        std::string country;
        std::size_t urban_male = 0, urban_female = 0, rural_male = 0, rural_female = 0;

        std::size_t total() const { return urban_male + urban_female + rural_male + rural_female; }
        std::size_t urban() const { return urban_male + urban_female; }
        std::size_t rural() const { return rural_male + rural_female; }
        std::size_t male() const { return urban_male + rural_male; }
        std::size_t female() const { return urban_female + rural_female; }
        double percent(std::size_t count) const {
            return total() == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(total());
        }
    };
    std::vector<Row> rows; // sorted by country
};

inline FrequencyTable frequency_table(const std::vector<ChildInfo> &children) {
    std::map<std::string, FrequencyTable::Row> by_country;
    for (const auto &c : children) {
        if (!c.sex || !c.area) {
            throw ValidationError("child '" + c.child_id + "' lacks sex or area for the frequency table");
        }
        auto &row = by_country[c.country];
        row.country = c.country;
        const bool male = *c.sex == Sex::male;
        if (*c.area == Area::urban) {
            ++(male ? row.urban_male : row.urban_female);
        } else {
            ++(male ? row.rural_male : row.rural_female);
        }
    }
    FrequencyTable t;
    for (auto &[_, row] : by_country) {
        t.rows.push_back(row);
    }
    return t;
}

// --- CSV exports -----------------------------------------------------------

inline std::string write_results_csv(const MicgResult &result, const DimensionScores *dims = nullptr) {
    std::string out = "child_id,D,A,deprived";
    if (dims) {
        for (const auto &d : dims->dimensions) {
            out += ',' + csv_escape(d);
        }
    }
    out += '\n';
    for (std::size_t i = 0; i < result.children.size(); ++i) {
        const auto &c = result.children[i];
        out += csv_escape(c.child_id) + ',' + format_number(c.deprivation) + ',' +
               format_number(c.achievement) + ',' + (c.deprived ? "1" : "0");
        if (dims) {
            for (double v : dims->scores[i]) {
                out += ',' + format_number(v);
            }
        }
        out += '\n';
    }
    return out;
}

inline std::string write_profile_csv(const DimensionProfile &p) {
    std::string out = "group,n";
    for (const auto &d : p.dimensions) {
        out += ',' + csv_escape(d);
    }
    out += '\n';
    for (std::size_t g = 0; g < p.groups.size(); ++g) {
        out += csv_escape(p.groups[g]) + ',' + std::to_string(p.sizes[g]);
        for (double v : p.percent[g]) {
            out += ',' + format_number(v);
        }
        out += '\n';
    }
    return out;
}

inline DimensionProfile read_profile_csv(std::string_view text) {
    const CsvTable t = parse_csv(text);
    const std::size_t g = t.require_column("group");
    const int n_col = t.column("n");
    DimensionProfile p;
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < t.header.size(); ++j) {
        if (j != g && static_cast<int>(j) != n_col) {
            p.dimensions.push_back(t.header[j]);
            cols.push_back(j);
        }
    }
    for (const auto &row : t.rows) {
        p.groups.push_back(row[g]);
        p.sizes.push_back(n_col >= 0 ? static_cast<std::size_t>(parse_number(row[n_col]).value_or(0)) : 0);
        std::vector<double> v;
        for (std::size_t j : cols) {
            v.push_back(parse_number(row[j]).value_or(std::numeric_limits<double>::quiet_NaN()));
        }
        p.percent.push_back(std::move(v));
    }
    return p;
}

inline std::string format_percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string write_frequency_csv(const FrequencyTable &t) {
    std::string out =
        "country,urban_male,urban_female,rural_male,rural_female,urban,rural,male,female,total\n";
    for (const auto &r : t.rows) {
        const std::size_t counts[] = {r.urban_male, r.urban_female, r.rural_male, r.rural_female,
                                      r.urban(),    r.rural(),      r.male(),     r.female()};
        out += csv_escape(r.country);
        for (auto c : counts) {
            out += ',' + std::to_string(c);
        }
        out += ',' + std::to_string(r.total()) + '\n';
        out += csv_escape(r.country) + " (%)";
        for (auto c : counts) {
            out += ',' + format_percent(r.percent(c));
        }
        out += ",100.00\n";
    }
    return out;
}

} // namespace micg
