#pragma once

// Static SVG 1.1 figures: spiderweb profiles, density overlays and left-behind scatter panels.
// Output depends only on the inputs, so repeated emission is byte-identical.

#include "micg/csv.hpp"
#include "micg/error.hpp"
#include "micg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace micg::charts {

inline const std::vector<std::string> &default_palette() {
    static const std::vector<std::string> p{"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                            "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
    return p;
}

/// Two-decimal coordinate text; never "-0.00".
inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") {
        s = "0.00";
    }
    return s;
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

namespace detail {

inline std::string open_svg(int width, int height) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(width) + "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
           std::to_string(width) + ' ' + std::to_string(height) + "\">\n" + "<rect x=\"0\" y=\"0\" width=\"" +
           std::to_string(width) + "\" height=\"" + std::to_string(height) + "\" fill=\"#ffffff\"/>\n";
}

inline std::string text(double x, double y, std::string_view s, std::string_view anchor = "middle",
                        int size = 12) {
    return "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-family=\"sans-serif\" font-size=\"" +
           std::to_string(size) + "\" text-anchor=\"" + std::string(anchor) + "\">" + xml_escape(s) + "</text>\n";
}

inline std::string line(double x1, double y1, double x2, double y2, std::string_view stroke,
                        std::string_view extra = "") {
    return "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) + "\" y2=\"" + fmt(y2) +
           "\" stroke=\"" + std::string(stroke) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) + "/>\n";
}

inline const std::string &color(const std::vector<std::string> &palette, std::size_t i) {
    const auto &p = palette.empty() ? default_palette() : palette;
    return p[i % p.size()];
}

} // namespace detail

// --- Spiderweb --------------------------------------------------------------------------

struct SpiderwebSpec {
    std::vector<std::string> axes;
    std::vector<std::pair<std::string, std::vector<double>>> series; // label -> percent per axis
    std::vector<std::string> colors;                                // empty: default palette
    double grid_step = 20.0;
    std::string title;
};

struct SpiderwebGeometry {
    static constexpr int width = 800;
    static constexpr int height = 800;
    static constexpr double cx = 400.0;
    static constexpr double cy = 400.0;
    static constexpr double radius = 300.0;
};

/// Axis k of n points at 12 o'clock and proceeds clockwise.
inline std::pair<double, double> spiderweb_point(std::size_t k, std::size_t n, double percent) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    const double r = SpiderwebGeometry::radius * percent / 100.0;
    return {SpiderwebGeometry::cx + r * std::sin(angle), SpiderwebGeometry::cy - r * std::cos(angle)};
}

inline std::string polygon_points(const std::vector<double> &values) {
    std::string pts;
    for (std::size_t k = 0; k < values.size(); ++k) {
        auto [x, y] = spiderweb_point(k, values.size(), values[k]);
        pts += (k ? " " : "") + fmt(x) + ',' + fmt(y);
    }
    return pts;
}

inline std::string spiderweb_svg(const SpiderwebSpec &spec) {
    const std::size_t n = spec.axes.size();
    if (n < 3) {
        throw ValidationError("spiderweb needs at least 3 axes");
    }
    if (spec.series.empty()) {
        throw ValidationError("spiderweb needs at least one series");
    }
    if (!(spec.grid_step > 0.0 && spec.grid_step <= 100.0)) {
        throw ValidationError("gridline step must lie in (0, 100]");
    }
    for (const auto &[label, values] : spec.series) {
        if (values.size() != n) {
            throw ValidationError("series '" + label + "' has " + std::to_string(values.size()) + " values for " +
                                  std::to_string(n) + " axes");
        }
        for (double v : values) {
            if (!(v >= 0.0 && v <= 100.0)) {
                throw ValidationError("series '" + label + "' has a value outside [0, 100]");
            }
        }
    }

    using G = SpiderwebGeometry;
    std::string svg = detail::open_svg(G::width, G::height);
    if (!spec.title.empty()) {
        svg += detail::text(G::cx, 30.0, spec.title, "middle", 16);
    }
    svg += "<g id=\"grid\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\">\n";
    const int levels = static_cast<int>(std::floor(100.0 / spec.grid_step + 1e-9));
    for (int l = 1; l <= levels; ++l) {
        svg += "<polygon points=\"" + polygon_points(std::vector<double>(n, spec.grid_step * l)) + "\"/>\n";
    }
    svg += "</g>\n<g id=\"axes\">\n";
    for (std::size_t k = 0; k < n; ++k) {
        auto [x, y] = spiderweb_point(k, n, 100.0);
        svg += detail::line(G::cx, G::cy, x, y, "#999999");
        auto [lx, ly] = spiderweb_point(k, n, 112.0);
        const char *anchor = std::fabs(lx - G::cx) < 1.0 ? "middle" : (lx > G::cx ? "start" : "end");
        svg += detail::text(lx, ly + 4.0, spec.axes[k], anchor, 11);
    }
    for (int l = 1; l <= levels; ++l) {
        auto [x, y] = spiderweb_point(0, n, spec.grid_step * l);
        svg += detail::text(x + 4.0, y - 2.0, format_number(spec.grid_step * l) + "%", "start", 9);
    }
    svg += "</g>\n<g id=\"series\">\n";
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        const auto &c = detail::color(spec.colors, s);
        svg += "<polygon class=\"series\" data-label=\"" + xml_escape(spec.series[s].first) + "\" points=\"" +
               polygon_points(spec.series[s].second) + "\" fill=\"" + c + "\" fill-opacity=\"0.15\" stroke=\"" + c +
               "\" stroke-width=\"2\"/>\n";
    }
    svg += "</g>\n<g id=\"legend\">\n";
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        const double y = 40.0 + 20.0 * static_cast<double>(s);
        svg += "<rect class=\"legend-entry\" x=\"20.00\" y=\"" + fmt(y - 10.0) +
               "\" width=\"12.00\" height=\"12.00\" fill=\"" + detail::color(spec.colors, s) + "\"/>\n";
        svg += detail::text(38.0, y, spec.series[s].first, "start", 12);
    }
    svg += "</g>\n</svg>\n";
    return svg;
}

// --- Density overlay --------------------------------------------------------------------

struct DensityChartOptions {
    std::vector<std::string> colors;
    bool show_median = true;
    std::string title;
    std::string x_label = "MICG";
};

inline std::string density_svg(const std::vector<std::pair<std::string, DensityCurve>> &curves,
                               const DensityChartOptions &opt = {}) {
    if (curves.empty()) {
        throw ValidationError("density chart needs at least one curve");
    }
    double y_max = 0.0;
    for (const auto &[label, c] : curves) {
        if (c.grid.size() < 2 || c.grid.size() != c.heights.size()) {
            throw ValidationError("density curve '" + label + "' is empty");
        }
        y_max = std::max(y_max, *std::max_element(c.heights.begin(), c.heights.end()));
    }
    if (!(y_max > 0.0)) {
        y_max = 1.0;
    }
    constexpr double left = 70.0, right = 860.0, top = 50.0, bottom = 540.0;
    auto px = [&](double x) { return left + x * (right - left); };
    auto py = [&](double y) { return bottom - y / (1.05 * y_max) * (bottom - top); };

    std::string svg = detail::open_svg(900, 600);
    if (!opt.title.empty()) {
        svg += detail::text(450.0, 30.0, opt.title, "middle", 16);
    }
    svg += "<g id=\"axes\">\n";
    svg += detail::line(left, bottom, right, bottom, "#000000");
    svg += detail::line(left, bottom, left, top, "#000000");
    for (int t = 0; t <= 10; ++t) {
        const double x = px(t / 10.0);
        svg += detail::line(x, bottom, x, bottom + 5.0, "#000000");
        svg += detail::text(x, bottom + 20.0, fmt(t / 10.0).substr(0, 3));
    }
    svg += detail::text(450.0, bottom + 45.0, opt.x_label);
    svg += detail::text(20.0, (top + bottom) / 2.0, "Density");
    svg += "</g>\n<g id=\"curves\" fill=\"none\">\n";
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto &[label, c] = curves[i];
        const auto &col = detail::color(opt.colors, i);
        std::string pts;
        for (std::size_t g = 0; g < c.grid.size(); ++g) {
            pts += (g ? " " : "") + fmt(px(c.grid[g])) + ',' + fmt(py(c.heights[g]));
        }
        svg += "<polyline class=\"curve\" data-label=\"" + xml_escape(label) + "\" points=\"" + pts + "\" stroke=\"" +
               col + "\" stroke-width=\"2\"/>\n";
        if (opt.show_median) {
            const double x = px(std::clamp(c.median, 0.0, 1.0));
            svg += "<line class=\"median\" data-label=\"" + xml_escape(label) + "\" x1=\"" + fmt(x) + "\" y1=\"" +
                   fmt(bottom) + "\" x2=\"" + fmt(x) + "\" y2=\"" + fmt(top) + "\" stroke=\"" + col +
                   "\" stroke-dasharray=\"2,3\"/>\n";
        }
    }
    svg += "</g>\n<g id=\"legend\">\n";
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const double y = top + 10.0 + 20.0 * static_cast<double>(i);
        svg += "<rect class=\"legend-entry\" x=\"" + fmt(right - 170.0) + "\" y=\"" + fmt(y - 10.0) +
               "\" width=\"12.00\" height=\"12.00\" fill=\"" + detail::color(opt.colors, i) + "\"/>\n";
        svg += detail::text(right - 152.0, y, curves[i].first, "start");
    }
    svg += "</g>\n</svg>\n";
    return svg;
}

// --- Left-behind scatter ----------------------------------------------------------------

/// Children in the bottom q percent: ceil(q n / 100).
inline std::size_t bottom_q_count(std::size_t n, double q) {
    if (!(q > 0.0 && q < 100.0)) {
        throw ValidationError("highlight percentage must lie in (0, 100)");
    }
    return static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) / 100.0 - 1e-9));
}

struct Highlight {
    std::size_t count = 0;
    double low = 0.0;  // opportunity range of the highlighted children
    double high = 0.0;
    std::vector<std::size_t> members; // input indices, lowest opportunity first
};

/// Lowest-opportunity children; ties in opportunity keep input order.
inline Highlight bottom_q(const std::vector<double> &opportunity, double q) {
    Highlight h;
    h.count = bottom_q_count(opportunity.size(), q);
    std::vector<std::size_t> order(opportunity.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return opportunity[a] < opportunity[b]; });
    h.members.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(h.count));
    if (h.count > 0) {
        h.low = opportunity[h.members.front()];
        h.high = opportunity[h.members.back()];
    }
    return h;
}

struct ScatterOptions {
    std::vector<std::string> colors;
    std::string highlight_color = "#6a0dad";
    std::string title;
};

/// Panel (a): achievements; panel (b): posterior mean opportunity. Children sit at the same
/// abscissa in both panels, ordered by opportunity. Groups differ by colour, and alternate
/// between circles and triangles in sorted label order.
inline std::string scatter_lnb_svg(const std::vector<double> &achievements, const std::vector<double> &opportunity,
                                   const std::vector<std::string> &groups, double q, const ScatterOptions &opt = {}) {
    const std::size_t n = achievements.size();
    if (n == 0 || opportunity.size() != n || groups.size() != n) {
        throw ValidationError("scatter inputs must be non-empty and aligned");
    }
    const Highlight hl = bottom_q(opportunity, q);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return opportunity[a] < opportunity[b]; });
    std::map<std::string, std::size_t> group_index;
    for (const auto &g : groups) {
        group_index.emplace(g, 0);
    }
    std::size_t gi = 0;
    for (auto &[g, idx] : group_index) {
        idx = gi++;
    }

    constexpr double top = 60.0, bottom = 520.0;
    const double panel_left[2] = {60.0, 500.0};
    constexpr double panel_width = 360.0;
    auto px = [&](int panel, std::size_t rank) {
        const double f = n == 1 ? 0.5 : static_cast<double>(rank) / static_cast<double>(n - 1);
        return panel_left[panel] + 10.0 + f * (panel_width - 20.0);
    };
    auto py = [&](double v) { return bottom - std::clamp(v, 0.0, 1.0) * (bottom - top); };

    std::string svg = detail::open_svg(900, 600);
    if (!opt.title.empty()) {
        svg += detail::text(450.0, 25.0, opt.title, "middle", 16);
    }
    const char *panel_titles[2] = {"(a) Achievements", "(b) Opportunity"};
    for (int p = 0; p < 2; ++p) {
        const double l = panel_left[p];
        svg += "<g class=\"panel\">\n";
        svg += detail::text(l + panel_width / 2.0, top - 15.0, panel_titles[p], "middle", 13);
        svg += detail::line(l, bottom, l + panel_width, bottom, "#000000");
        svg += detail::line(l, bottom, l, top, "#000000");
        for (int t = 0; t <= 5; ++t) {
            const double y = py(t / 5.0);
            svg += detail::line(l - 5.0, y, l, y, "#000000");
            svg += detail::text(l - 8.0, y + 4.0, fmt(t / 5.0).substr(0, 3), "end", 10);
        }
        svg += detail::text(l + panel_width / 2.0, bottom + 30.0, "Children ordered by opportunity", "middle", 11);
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t i = order[r];
            const double v = p == 0 ? achievements[i] : opportunity[i];
            const std::size_t g = group_index[groups[i]];
            const auto &col = detail::color(opt.colors, g);
            const double x = px(p, r), y = py(v);
            if (g % 2 == 0) {
                svg += "<circle class=\"point\" cx=\"" + fmt(x) + "\" cy=\"" + fmt(y) + "\" r=\"3.00\" fill=\"" + col +
                       "\"/>\n";
            } else {
                svg += "<polygon class=\"point\" points=\"" + fmt(x) + ',' + fmt(y - 3.5) + ' ' + fmt(x - 3.0) + ',' +
                       fmt(y + 2.5) + ' ' + fmt(x + 3.0) + ',' + fmt(y + 2.5) + "\" fill=\"" + col + "\"/>\n";
            }
        }
        svg += "</g>\n";
    }
    if (hl.count > 0) {
        const double x0 = px(1, 0) - 6.0;
        const double x1 = px(1, hl.count - 1) + 6.0;
        const double y0 = py(hl.high) - 6.0;
        const double y1 = py(hl.low) + 6.0;
        svg += "<rect class=\"highlight\" data-count=\"" + std::to_string(hl.count) + "\" data-low=\"" +
               format_number(hl.low) + "\" data-high=\"" + format_number(hl.high) + "\" x=\"" + fmt(x0) +
               "\" y=\"" + fmt(y0) + "\" width=\"" + fmt(x1 - x0) + "\" height=\"" + fmt(y1 - y0) +
               "\" fill=\"none\" stroke=\"" + opt.highlight_color + "\" stroke-width=\"2\"/>\n";
    }
    svg += "<g id=\"legend\">\n";
    for (const auto &[g, idx] : group_index) {
        const double y = 575.0;
        const double x = 60.0 + 160.0 * static_cast<double>(idx);
        svg += "<rect class=\"legend-entry\" x=\"" + fmt(x) + "\" y=\"" + fmt(y - 10.0) +
               "\" width=\"10.00\" height=\"10.00\" fill=\"" + detail::color(opt.colors, idx) + "\"/>\n";
        svg += detail::text(x + 15.0, y, g, "start", 11);
    }
    svg += "</g>\n</svg>\n";
    return svg;
}

} // namespace micg::charts
