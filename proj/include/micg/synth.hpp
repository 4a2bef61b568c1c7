#pragma once

// Synthetic children for tests and demos.
//
// Deprivations follow a latent single-factor threshold model:
//   z_ij = sqrt(rho) F_i + sqrt(1 - rho) e_ij + shift_i,   deprived when z_ij > Phi^-1(1 - p_j),
// with shift_i = rural_shift [rural] + female_shift [female]. Raw column values are then chosen so
// that each indicator rule reproduces the drawn deprivation status.

#include "micg/catalog.hpp"
#include "micg/dataset.hpp"
#include "micg/error.hpp"
#include "micg/random.hpp"
#include "micg/weighting.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace micg::synth {

struct GeneratorSpec {
    std::size_t n = 100;
    std::vector<double> probabilities; // one per indicator, or a single value for all; empty means 0.5
    double rho = 0.0;
    double rural_shift = 0.0;  // latent shift for rural children
    double female_shift = 0.0; // latent shift for girls
    double rural_share = 0.5;
    double female_share = 0.5;
    std::string country = "Synthland";
    std::uint64_t seed = 1;

    void validate() const {
        if (n < 1) {
            throw ValidationError("generator needs n >= 1");
        }
        for (double p : probabilities) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw ValidationError("deprivation probabilities must lie in [0, 1]");
            }
        }
        if (!(rho >= 0.0 && rho <= 1.0)) {
            throw ValidationError("latent correlation rho must lie in [0, 1]");
        }
        if (!(rural_share >= 0.0 && rural_share <= 1.0) || !(female_share >= 0.0 && female_share <= 1.0)) {
            throw ValidationError("group shares must lie in [0, 1]");
        }
    }
};

struct GroundTruth {
    std::vector<std::string> indicators;
    std::vector<double> thresholds;                // tau_j
    std::vector<std::vector<double>> probability;  // P(deprived) per child and indicator
    std::vector<std::vector<int>> deprived;        // drawn status per child and indicator
};

struct SyntheticData {
    ChildDataset dataset;
    GroundTruth truth;
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_quantile(double p) {
    if (p <= 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    if (p >= 1.0) {
        return std::numeric_limits<double>::infinity();
    }
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// Expected deprivation score of every child: sum_j w_j p_ij.
inline std::vector<double> expected_scores(const GroundTruth &truth, const WeightVector &weights) {
    std::vector<double> w;
    for (const auto &id : truth.indicators) {
        w.push_back(weights.weight_of(id));
    }
    std::vector<double> out;
    for (const auto &row : truth.probability) {
        double s = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            s += w[j] * row[j];
        }
        out.push_back(s);
    }
    return out;
}

/// Pre-computed column assignments that make an indicator rule true or false.
class Realizer {
public:
    explicit Realizer(const IndicatorCatalog &catalog) : columns_(catalog.source_columns()) {
        std::set<std::string> seen;
        std::vector<std::string> names = columns_;
        std::vector<Value> params;
        for (const auto &[name, value] : catalog.parameters()) {
            names.push_back(name);
            params.push_back(value ? Value{*value} : Value{Missing{}});
        }
        for (const auto &dim : catalog.dimensions()) {
            for (const auto &ind : dim.indicators) {
                for (const auto &c : ind.source_columns) {
                    if (!seen.insert(c).second) {
                        throw ValidationError("synthetic generation needs disjoint source columns; '" + c +
                                              "' is shared");
                    }
                }
                plans_.push_back(plan(catalog, ind, names, params));
            }
        }
    }

    const std::vector<std::string> &columns() const { return columns_; }

    /// Write the values for indicator j into a row aligned with columns().
    void apply(std::size_t j, bool deprived, std::vector<Value> &row) const {
        const auto &p = plans_[j];
        const auto &values = deprived ? p.yes : p.no;
        for (std::size_t c = 0; c < p.slots.size(); ++c) {
            row[p.slots[c]] = values[c];
        }
    }

private:
    struct Plan {
        std::vector<std::size_t> slots;
        std::vector<Value> yes;
        std::vector<Value> no;
    };

    Plan plan(const IndicatorCatalog &catalog, const IndicatorDef &ind, const std::vector<std::string> &names,
              const std::vector<Value> &params) const {
        std::vector<double> numbers{0.0, 1.0, 2.0};
        std::vector<std::string> texts;
        for (const auto &tok : micg::detail::tokenize(ind.rule.source())) {
            if (tok.kind == micg::detail::Token::Kind::number) {
                numbers.insert(numbers.end(), {tok.number - 1.0, tok.number, tok.number + 1.0, -tok.number - 1.0,
                                                -tok.number, 1.0 - tok.number});
            } else if (tok.kind == micg::detail::Token::Kind::text) {
                texts.push_back(tok.lexeme);
            } else if (tok.kind == micg::detail::Token::Kind::name) {
                auto it = catalog.parameters().find(tok.lexeme);
                if (it != catalog.parameters().end()) {
                    if (!it->second) {
                        throw ValidationError("indicator '" + ind.id + "' needs parameter '" + tok.lexeme +
                                              "', which has no value");
                    }
                    numbers.insert(numbers.end(), {*it->second - 1.0, *it->second, *it->second + 1.0});
                }
            }
        }
        texts.push_back("other");

        Plan p;
        std::vector<std::vector<Value>> candidates;
        for (const auto &c : ind.source_columns) {
            p.slots.push_back(static_cast<std::size_t>(std::find(columns_.begin(), columns_.end(), c) - columns_.begin()));
            std::vector<Value> cand;
            if (catalog.is_categorical(c)) {
                cand.assign(texts.begin(), texts.end());
            } else {
                cand.assign(numbers.begin(), numbers.end());
            }
            candidates.push_back(std::move(cand));
        }

        Expr rule = ind.rule;
        rule.bind(names);
        std::vector<Value> vars(names.size(), Value{Missing{}});
        std::copy(params.begin(), params.end(), vars.begin() + static_cast<std::ptrdiff_t>(columns_.size()));
        std::vector<std::size_t> pick(candidates.size(), 0);
        bool have_yes = false, have_no = false;
        while (!(have_yes && have_no)) {
            std::vector<Value> assignment;
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                assignment.push_back(candidates[c][pick[c]]);
                vars[p.slots[c]] = assignment.back();
            }
            const Value v = rule.evaluate(vars);
            if (std::holds_alternative<bool>(v)) {
                if (std::get<bool>(v) && !have_yes) {
                    p.yes = assignment;
                    have_yes = true;
                } else if (!std::get<bool>(v) && !have_no) {
                    p.no = assignment;
                    have_no = true;
                }
            }
            std::size_t c = 0;
            while (c < pick.size() && ++pick[c] == candidates[c].size()) {
                pick[c++] = 0;
            }
            if (c == pick.size()) {
                break;
            }
        }
        if (!(have_yes && have_no)) {
            throw ValidationError("cannot find column values realising both outcomes of indicator '" + ind.id + "'");
        }
        return p;
    }

    std::vector<std::string> columns_;
    std::vector<Plan> plans_;
};

/// Children with covariates, raw indicator columns and the generating probabilities.
inline SyntheticData generate(const IndicatorCatalog &catalog, const GeneratorSpec &spec) {
    spec.validate();
    const std::size_t m = catalog.indicator_count();
    std::vector<double> p = spec.probabilities;
    if (p.empty()) {
        p.assign(m, 0.5);
    } else if (p.size() == 1) {
        p.assign(m, p.front());
    } else if (p.size() != m) {
        throw ValidationError("expected " + std::to_string(m) + " deprivation probabilities, got " +
                              std::to_string(p.size()));
    }

    const Realizer realizer(catalog);
    SyntheticData out;
    out.dataset.columns = realizer.columns();
    out.truth.indicators = catalog.indicator_ids();
    for (double pj : p) {
        out.truth.thresholds.push_back(normal_quantile(1.0 - pj));
    }

    Rng rng = make_rng(spec.seed, 0);
    const double load = std::sqrt(spec.rho);
    const double unique = std::sqrt(1.0 - spec.rho);
    const int width = static_cast<int>(std::to_string(spec.n).size());
    for (std::size_t i = 0; i < spec.n; ++i) {
        ChildRecord rec;
        std::string num = std::to_string(i + 1);
        rec.info.child_id = "C" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
        rec.info.sex = uniform01(rng) < spec.female_share ? Sex::female : Sex::male;
        rec.info.area = uniform01(rng) < spec.rural_share ? Area::rural : Area::urban;
        rec.info.country = spec.country;
        const double shift = (*rec.info.area == Area::rural ? spec.rural_shift : 0.0) +
                             (*rec.info.sex == Sex::female ? spec.female_shift : 0.0);
        const double f = standard_normal(rng);
        rec.values.assign(realizer.columns().size(), Value{Missing{}});
        std::vector<double> prob;
        std::vector<int> dep;
        for (std::size_t j = 0; j < m; ++j) {
            const double z = load * f + unique * standard_normal(rng) + shift;
            const bool d = z > out.truth.thresholds[j];
            realizer.apply(j, d, rec.values);
            prob.push_back(1.0 - normal_cdf(out.truth.thresholds[j] - shift));
            dep.push_back(d ? 1 : 0);
        }
        out.dataset.records.push_back(std::move(rec));
        out.truth.probability.push_back(std::move(prob));
        out.truth.deprived.push_back(std::move(dep));
    }
    return out;
}

// --- Frontier data ----------------------------------------------------------------------

/// logit(A_i) = x_i' beta + v_i - u_i with x_i = (1, rural_i), v ~ N(0, sigma_v^2), u ~ Exp(lambda).
struct FrontierSpec {
    std::size_t n = 500;
    std::vector<double> beta{2.0, -0.5};
    double sigma_v = 0.1;
    double lambda = 5.0;
    double rural_share = 0.5;
    double female_share = 0.5;
    bool noise_free = false; // u = v = 0
    std::uint64_t seed = 1;
};

struct FrontierData {
    std::vector<std::string> child_ids;
    std::vector<std::string> terms{"(intercept)", "rural"};
    std::vector<ChildInfo> children;
    Eigen::MatrixXd x;
    std::vector<double> achievements;
    std::vector<double> u;
    std::vector<double> v;
};

inline FrontierData generate_frontier(const FrontierSpec &spec) {
    if (spec.n < 1 || spec.beta.size() != 2) {
        throw ValidationError("frontier generator needs n >= 1 and two coefficients");
    }
    if (!(spec.sigma_v >= 0.0) || !(spec.lambda > 0.0)) {
        throw ValidationError("frontier generator needs sigma_v >= 0 and lambda > 0");
    }
    FrontierData out;
    out.x.resize(static_cast<Eigen::Index>(spec.n), 2);
    Rng rng = make_rng(spec.seed, 1);
    std::exponential_distribution<double> expo(spec.lambda);
    const int width = static_cast<int>(std::to_string(spec.n).size());
    for (std::size_t i = 0; i < spec.n; ++i) {
        ChildInfo info;
        std::string num = std::to_string(i + 1);
        info.child_id = "C" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
        info.sex = uniform01(rng) < spec.female_share ? Sex::female : Sex::male;
        info.area = uniform01(rng) < spec.rural_share ? Area::rural : Area::urban;
        info.country = "Synthland";
        const double rural = *info.area == Area::rural ? 1.0 : 0.0;
        const double v = spec.noise_free ? 0.0 : spec.sigma_v * standard_normal(rng);
        const double u = spec.noise_free ? 0.0 : expo(rng);
        const auto r = static_cast<Eigen::Index>(i);
        out.x(r, 0) = 1.0;
        out.x(r, 1) = rural;
        out.achievements.push_back(inv_logit(spec.beta[0] + spec.beta[1] * rural + v - u));
        out.u.push_back(u);
        out.v.push_back(v);
        out.child_ids.push_back(info.child_id);
        out.children.push_back(std::move(info));
    }
    return out;
}

} // namespace micg::synth
