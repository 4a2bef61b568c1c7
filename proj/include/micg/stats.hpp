#pragma once

#include "micg/csv.hpp"
#include "micg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace micg {

/// Ranks starting at 1; tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) {
            ++j;
        }
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            ranks[order[t]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    const auto n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
        throw ValidationError("correlation undefined for a constant vector");
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("spearman needs vectors of equal length");
    }
    if (a.size() < 3) {
        throw ValidationError("spearman needs at least 3 observations");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
            throw ValidationError("spearman input contains missing or non-finite values");
        }
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    return pearson(ra, rb);
}

struct ConcordanceMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rho; // symmetric, unit diagonal
};

inline ConcordanceMatrix concordance(const std::vector<std::pair<std::string, std::vector<double>>> &schemes) {
    ConcordanceMatrix m;
    const std::size_t k = schemes.size();
    m.rho.assign(k, std::vector<double>(k, 1.0));
    for (const auto &[label, _] : schemes) {
        m.labels.push_back(label);
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            if (schemes[a].second.size() != schemes[b].second.size()) {
                throw ValidationError("schemes '" + schemes[a].first + "' and '" + schemes[b].first +
                                      "' score different numbers of children");
            }
            m.rho[a][b] = m.rho[b][a] = spearman(schemes[a].second, schemes[b].second);
        }
    }
    return m;
}

inline std::string write_concordance_csv(const ConcordanceMatrix &m) {
    std::string out = "scheme";
    for (const auto &l : m.labels) {
        out += ',' + csv_escape(l);
    }
    out += '\n';
    for (std::size_t a = 0; a < m.labels.size(); ++a) {
        out += csv_escape(m.labels[a]);
        for (double r : m.rho[a]) {
            out += ',' + format_number(r);
        }
        out += '\n';
    }
    return out;
}

/// Sample quantile with linear interpolation between order statistics (Hyndman-Fan type 7).
inline double quantile(std::vector<double> x, double p) {
    if (x.empty()) {
        throw ValidationError("quantile of an empty sample");
    }
    std::sort(x.begin(), x.end());
    const double h = (static_cast<double>(x.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

/// Density estimate tabulated on a uniform grid over [0, 1]; zero outside.
struct DensityCurve {
    std::vector<double> grid;
    std::vector<double> heights;
    double bandwidth = 0.0;
    double median = 0.0; // sample median of the estimated values

    double integral() const {
        double s = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            s += 0.5 * (heights[i] + heights[i - 1]) * (grid[i] - grid[i - 1]);
        }
        return s;
    }

    double evaluate(double x) const {
        if (grid.empty() || x < grid.front() || x > grid.back()) {
            return 0.0;
        }
        auto it = std::upper_bound(grid.begin(), grid.end(), x);
        if (it == grid.end()) {
            return heights.back();
        }
        const auto hi = static_cast<std::size_t>(it - grid.begin());
        const std::size_t lo = hi - 1;
        const double t = (x - grid[lo]) / (grid[hi] - grid[lo]);
        return heights[lo] + t * (heights[hi] - heights[lo]);
    }
};

/// Silverman's rule of thumb 0.9 * min(sd, IQR / 1.34) * n^(-1/5); falls back to sd when IQR is 0.
inline double silverman_bandwidth(std::span<const double> values) {
    const auto n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    std::vector<double> copy(values.begin(), values.end());
    const double iqr = quantile(copy, 0.75) - quantile(copy, 0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    return 0.9 * spread * std::pow(n, -0.2);
}

/// Gaussian kernel density on [0, 1] with reflection at both boundaries, renormalised so the
/// trapezoid integral over the grid is one.
inline DensityCurve kde(std::span<const double> values, std::optional<double> bandwidth = std::nullopt,
                        std::size_t grid_points = 512) {
    if (values.size() < 2) {
        throw ValidationError("kernel density needs at least 2 values");
    }
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError("kernel density values must lie in [0, 1]");
        }
    }
    const double h = bandwidth ? *bandwidth : silverman_bandwidth(values);
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw ValidationError("kernel density bandwidth is zero (all values identical?)");
    }

    DensityCurve curve;
    curve.bandwidth = h;
    curve.median = quantile(std::vector<double>(values.begin(), values.end()), 0.5);
    curve.grid.resize(grid_points);
    curve.heights.assign(grid_points, 0.0);
    const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    auto phi = [](double z) { return std::exp(-0.5 * z * z); };
    for (std::size_t k = 0; k < grid_points; ++k) {
        const double x = static_cast<double>(k) / static_cast<double>(grid_points - 1);
        curve.grid[k] = x;
        double s = 0.0;
        for (double v : values) {
            s += phi((x - v) / h) + phi((x + v) / h) + phi((x - (2.0 - v)) / h);
        }
        curve.heights[k] = s * norm;
    }
    const double mass = curve.integral();
    for (auto &y : curve.heights) {
        y /= mass;
    }
    return curve;
}

inline std::string write_density_csv(const std::vector<std::pair<std::string, DensityCurve>> &curves) {
    std::string out = "curve,x,density,bandwidth,median\n";
    for (const auto &[label, c] : curves) {
        const std::string tail = ',' + format_number(c.bandwidth) + ',' + format_number(c.median) + '\n';
        for (std::size_t i = 0; i < c.grid.size(); ++i) {
            out += csv_escape(label) + ',' + format_number(c.grid[i]) + ',' + format_number(c.heights[i]) + tail;
        }
    }
    return out;
}

/// Inverse of write_density_csv; curves keep their order of first appearance.
inline std::vector<std::pair<std::string, DensityCurve>> read_density_csv(std::string_view text) {
    const CsvTable t = parse_csv(text);
    const std::size_t cl = t.require_column("curve"), cx = t.require_column("x"), cd = t.require_column("density");
    const int cb = t.column("bandwidth"), cm = t.column("median");
    std::vector<std::pair<std::string, DensityCurve>> out;
    for (const auto &row : t.rows) {
        if (out.empty() || out.back().first != row[cl]) {
            out.emplace_back(row[cl], DensityCurve{});
        }
        auto &c = out.back().second;
        auto x = parse_number(row[cx]);
        auto y = parse_number(row[cd]);
        if (!x || !y) {
            throw ValidationError("density file has a non-numeric cell in curve '" + row[cl] + "'");
        }
        c.grid.push_back(*x);
        c.heights.push_back(*y);
        if (cb >= 0) c.bandwidth = parse_number(row[static_cast<std::size_t>(cb)]).value_or(0.0);
        if (cm >= 0) c.median = parse_number(row[static_cast<std::size_t>(cm)]).value_or(0.0);
    }
    return out;
}

} // namespace micg
