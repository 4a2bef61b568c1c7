#pragma once

#include "micg/catalog.hpp"
#include "micg/deprivation.hpp"
#include "micg/error.hpp"
#include "micg/jacobi.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace micg {

enum class WeightProvenance { equal, custom, pca };

inline std::string_view to_string(WeightProvenance p) {
    switch (p) {
    case WeightProvenance::equal: return "equal";
    case WeightProvenance::custom: return "custom";
    case WeightProvenance::pca: return "pca";
    }
    return "equal";
}

/// Per-indicator weights summing to one.
struct WeightVector {
    std::vector<std::string> ids;
    std::vector<double> weights;
    WeightProvenance provenance = WeightProvenance::equal;
    std::vector<std::string> dropped_indicators;

    /// Weight of `id`; zero for indicators not in the vector (e.g. dropped).
    double weight_of(std::string_view id) const {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (ids[i] == id) {
                return weights[i];
            }
        }
        return 0.0;
    }

    bool contains(std::string_view id) const {
        return std::find(ids.begin(), ids.end(), id) != ids.end();
    }

    double sum() const {
        double s = 0.0;
        for (double w : weights) {
            s += w;
        }
        return s;
    }
};

/// Equal weight per dimension, split equally among the dimension's indicators.
inline WeightVector equal_nested_weights(const IndicatorCatalog &catalog) {
    WeightVector wv;
    wv.provenance = WeightProvenance::equal;
    const double per_dim = 1.0 / static_cast<double>(catalog.dimension_count());
    for (const auto &dim : catalog.dimensions()) {
        const double w = per_dim / static_cast<double>(dim.indicators.size());
        for (const auto &ind : dim.indicators) {
            wv.ids.push_back(ind.id);
            wv.weights.push_back(w);
        }
    }
    return wv;
}

/// Normalised dimension weights, each split equally among the dimension's indicators.
inline WeightVector custom_weights(const std::map<std::string, double> &dimension_weights,
                                   const IndicatorCatalog &catalog) {
    for (const auto &[name, w] : dimension_weights) {
        bool known = false;
        for (const auto &dim : catalog.dimensions()) {
            known |= dim.name == name;
        }
        if (!known) {
            throw ValidationError("unknown dimension '" + name + "' in custom weights");
        }
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ValidationError("weight for dimension '" + name + "' must be a finite non-negative number");
        }
    }
    double total = 0.0;
    for (const auto &dim : catalog.dimensions()) {
        auto it = dimension_weights.find(dim.name);
        if (it == dimension_weights.end()) {
            throw ValidationError("custom weights do not name dimension '" + dim.name + "'");
        }
        total += it->second;
    }
    if (total <= 0.0) {
        throw ValidationError("custom dimension weights are all zero");
    }

    WeightVector wv;
    wv.provenance = WeightProvenance::custom;
    for (const auto &dim : catalog.dimensions()) {
        const double per_dim = dimension_weights.at(dim.name) / total;
        const double w = per_dim / static_cast<double>(dim.indicators.size());
        for (const auto &ind : dim.indicators) {
            wv.ids.push_back(ind.id);
            wv.weights.push_back(w);
        }
    }
    return wv;
}

struct PcaOptions {
    double tolerance = 1e-10;
    int max_sweeps = 10'000;
};

/// Endogenous weights from the dominant eigenvector of the indicators' correlation matrix.
///
/// Constant columns are dropped. The eigenvector sign is fixed so that its entries sum to a
/// non-negative value (first non-zero entry positive on an exact tie); weights are the absolute
/// loadings normalised to one.
inline WeightVector pca_weights(const DeprivationMatrix &matrix, const PcaOptions &opts = {}) {
    if (matrix.has_missing()) {
        throw ValidationError("pca weights need a matrix without missing cells");
    }
    const std::size_t n = matrix.rows();
    if (n < 2) {
        throw ValidationError("pca weights need at least 2 children");
    }

    WeightVector wv;
    wv.provenance = WeightProvenance::pca;
    std::vector<std::size_t> kept;
    std::vector<double> mean;
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
        std::size_t ones = 0;
        for (std::size_t i = 0; i < n; ++i) {
            ones += matrix.at(i, j) == Cell::yes;
        }
        if (ones == 0 || ones == n) {
            wv.dropped_indicators.push_back(matrix.indicators[j]);
        } else {
            kept.push_back(j);
            mean.push_back(static_cast<double>(ones) / static_cast<double>(n));
        }
    }
    const auto p = static_cast<Eigen::Index>(kept.size());
    if (p < 2) {
        throw ValidationError("pca weights need at least 2 non-constant indicators, found " +
                              std::to_string(p));
    }

    Eigen::MatrixXd centered(static_cast<Eigen::Index>(n), p);
    for (Eigen::Index c = 0; c < p; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = matrix.at(i, kept[c]) == Cell::yes ? 1.0 : 0.0;
            centered(static_cast<Eigen::Index>(i), c) = x - mean[c];
        }
    }
    Eigen::MatrixXd corr = centered.transpose() * centered;
    const Eigen::VectorXd sd = corr.diagonal().cwiseSqrt();
    for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index b = 0; b < p; ++b) {
            corr(a, b) = a == b ? 1.0 : corr(a, b) / (sd(a) * sd(b));
        }
    }

    const SymmetricEigen eig = jacobi_eigen(corr, opts.tolerance, opts.max_sweeps);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < p; ++k) {
        if (eig.values(k) > eig.values(best)) {
            best = k;
        }
    }
    Eigen::VectorXd v = eig.vectors.col(best);
    const double s = v.sum();
    bool flip = s < 0.0;
    if (s == 0.0) {
        for (Eigen::Index k = 0; k < p; ++k) {
            if (v(k) != 0.0) {
                flip = v(k) < 0.0;
                break;
            }
        }
    }
    if (flip) {
        v = -v;
    }
    const Eigen::VectorXd loadings = v.cwiseAbs();
    const double total = loadings.sum();
    for (Eigen::Index c = 0; c < p; ++c) {
        wv.ids.push_back(matrix.indicators[kept[c]]);
        wv.weights.push_back(loadings(c) / total);
    }
    return wv;
}

/// Audit form: {"provenance": ..., "weights": {id: w, ...}, "dropped_indicators": [...]}.
inline std::string weights_to_json(const WeightVector &wv) {
    nlohmann::ordered_json doc;
    doc["provenance"] = std::string(to_string(wv.provenance));
    nlohmann::ordered_json w = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < wv.ids.size(); ++i) {
        w[wv.ids[i]] = wv.weights[i];
    }
    doc["weights"] = w;
    doc["dropped_indicators"] = wv.dropped_indicators;
    return doc.dump(2) + "\n";
}

/// Reads {"dimension name": weight, ...}.
inline std::map<std::string, double> parse_dimension_weights(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError(std::string("dimension weights are not valid JSON: ") + e.what());
    }
    std::map<std::string, double> out;
    for (const auto &[name, value] : doc.items()) {
        if (!value.is_number()) {
            throw ValidationError("weight for '" + name + "' is not a number");
        }
        out[name] = value.get<double>();
    }
    return out;
}

} // namespace micg
