#pragma once

// Bayesian normal-exponential stochastic frontier on logit-transformed achievements:
//
//   y_i = logit(clamp(A_i)) = x_i' beta + v_i - u_i,   v_i ~ N(0, sigma_v^2),  u_i ~ Exp(lambda)
//
// sampled by Gibbs with the shortfalls u_i as augmented data. The frontier x_i' beta + v is
// read as the child's opportunity level; u_i is the shortfall from it.

#include "micg/csv.hpp"
#include "micg/error.hpp"
#include "micg/random.hpp"
#include "micg/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace micg {

struct FrontierPriors {
    double beta_sd = 10.0;     // beta ~ N(0, beta_sd^2 I)
    double sigma_shape = 2.0;  // sigma_v^2 ~ InverseGamma(shape, scale)
    double sigma_scale = 0.1;
    double lambda_shape = 2.0; // lambda ~ Gamma(shape, rate)
    double lambda_rate = 2.0;
};

struct McmcConfig {
    int chains = 4;
    int iterations = 5'000; // per chain, burn-in included
    int burn_in = 2'000;
    int thinning = 1;
    std::uint64_t seed = 1;
    double rhat_threshold = 1.05;
    double clamp_epsilon = 1e-3;
    bool keep_shortfall_draws = false;
    bool parallel = true;

    void validate() const {
        if (chains < 1) throw ValidationError("MCMC needs at least one chain");
        if (burn_in < 0) throw ValidationError("burn-in must be non-negative");
        if (iterations <= burn_in) throw ValidationError("iterations must exceed burn-in");
        if (thinning < 1) throw ValidationError("thinning must be at least 1");
        if (!(clamp_epsilon > 0.0 && clamp_epsilon < 0.5)) throw ValidationError("clamp epsilon must be in (0, 0.5)");
    }

    int draws_per_chain() const { return (iterations - burn_in) / thinning; }
};

struct ParameterDiagnostic {
    std::string parameter;
    double rhat = 1.0;
};

struct PosteriorDraws {
    std::vector<std::string> child_ids;
    std::vector<std::string> terms;
    Eigen::MatrixXd x;
    Eigen::VectorXd y; // logit response after clamping
    int chains = 0;
    int draws_per_chain = 0;
    std::vector<int> iteration; // sampler iteration of each retained draw, per chain

    // Flattened chain-major: draw s of chain c sits at c * draws_per_chain + s.
    Eigen::MatrixXd beta;          // total_draws x p
    std::vector<double> sigma2;    // sigma_v^2
    std::vector<double> lambda;    // exponential rate of the shortfall
    std::vector<double> noise;     // shared N(0, 1) per draw used for opportunity draws
    Eigen::VectorXd shortfall_mean; // posterior mean of u_i
    Eigen::MatrixXd shortfall;     // total_draws x n when kept, else empty

    std::vector<ParameterDiagnostic> diagnostics;
    double max_rhat = 1.0;
    bool converged = true;

    std::size_t total_draws() const { return sigma2.size(); }
    std::size_t children() const { return child_ids.size(); }

    std::size_t child_index(const std::string &id) const {
        for (std::size_t i = 0; i < child_ids.size(); ++i) {
            if (child_ids[i] == id) {
                return i;
            }
        }
        throw ValidationError("child '" + id + "' is not in the fitted set");
    }
};

/// Split-chain potential scale reduction for one scalar, draws laid out chain-major.
inline double split_rhat(const std::vector<double> &draws, int chains, int per_chain) {
    const int half = per_chain / 2;
    if (half < 2) {
        throw ValidationError("split R-hat needs at least 4 draws per chain");
    }
    std::vector<double> means, vars;
    for (int c = 0; c < chains; ++c) {
        for (int part = 0; part < 2; ++part) {
            const std::size_t start = static_cast<std::size_t>(c) * per_chain + (part == 0 ? 0 : per_chain - half);
            double m = 0.0;
            for (int s = 0; s < half; ++s) {
                m += draws[start + s];
            }
            m /= half;
            double v = 0.0;
            for (int s = 0; s < half; ++s) {
                v += (draws[start + s] - m) * (draws[start + s] - m);
            }
            means.push_back(m);
            vars.push_back(v / (half - 1));
        }
    }
    const auto seqs = static_cast<double>(means.size());
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / seqs;
    double b = 0.0;
    for (double m : means) {
        b += (m - grand) * (m - grand);
    }
    b *= static_cast<double>(half) / (seqs - 1.0);
    const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / seqs;
    if (w <= 0.0) {
        return b > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    const double var_plus = (half - 1.0) / half * w + b / half;
    return std::sqrt(var_plus / w);
}

namespace detail {

struct ChainOutput {
    Eigen::MatrixXd beta;
    std::vector<double> sigma2, lambda;
    std::vector<int> iteration;
    Eigen::VectorXd shortfall_sum;
    Eigen::MatrixXd shortfall;
};

inline ChainOutput run_chain(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const FrontierPriors &pr,
                             const McmcConfig &cfg, int chain) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(chain) + 1);

    const Eigen::MatrixXd xtx = x.transpose() * x;
    const Eigen::VectorXd ols = x.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd res = y - x * ols;
    const double res_sd = std::max(std::sqrt(res.squaredNorm() / static_cast<double>(n)), 1e-3);

    // Dispersed starting points: jittered OLS, shortfalls from the OLS residuals.
    Eigen::VectorXd beta = ols;
    for (Eigen::Index j = 0; j < p; ++j) {
        beta(j) += 0.5 * res_sd * standard_normal(rng);
    }
    double sigma2 = res_sd * res_sd * (0.5 + uniform01(rng));
    double lambda = (0.5 + uniform01(rng)) / res_sd;
    Eigen::VectorXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        u(i) = std::max(0.0, -res(i)) + 1e-3;
    }

    const int keep = cfg.draws_per_chain();
    ChainOutput out;
    out.beta.resize(keep, p);
    out.sigma2.reserve(keep);
    out.lambda.reserve(keep);
    out.shortfall_sum = Eigen::VectorXd::Zero(n);
    if (cfg.keep_shortfall_draws) {
        out.shortfall.resize(keep, n);
    }

    const double prior_precision = 1.0 / (pr.beta_sd * pr.beta_sd);
    Eigen::VectorXd z(p);
    int kept = 0;
    for (int it = 0; it < cfg.iterations; ++it) {
        // beta | u, sigma2: Gaussian with precision X'X / sigma2 + I / beta_sd^2.
        const Eigen::VectorXd ytilde = y + u;
        Eigen::MatrixXd precision = xtx / sigma2;
        precision.diagonal().array() += prior_precision;
        const Eigen::LLT<Eigen::MatrixXd> llt(precision);
        const Eigen::VectorXd mean = llt.solve(x.transpose() * ytilde / sigma2);
        for (Eigen::Index j = 0; j < p; ++j) {
            z(j) = standard_normal(rng);
        }
        beta = mean + llt.matrixU().solve(z);

        // sigma2 | beta, u: inverse gamma.
        const Eigen::VectorXd e = ytilde - x * beta;
        const double shape = pr.sigma_shape + 0.5 * static_cast<double>(n);
        const double scale = pr.sigma_scale + 0.5 * e.squaredNorm();
        sigma2 = scale / gamma_rate(rng, shape, 1.0);

        // u_i | rest: N(x_i'beta - y_i - lambda sigma2, sigma2) truncated at zero.
        const double sd = std::sqrt(sigma2);
        const Eigen::VectorXd fitted = x * beta;
        for (Eigen::Index i = 0; i < n; ++i) {
            u(i) = truncated_normal_positive(rng, fitted(i) - y(i) - lambda * sigma2, sd);
        }

        // lambda | u: conjugate gamma.
        lambda = gamma_rate(rng, pr.lambda_shape + static_cast<double>(n), pr.lambda_rate + u.sum());

        if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thinning == 0 && kept < keep) {
            out.beta.row(kept) = beta.transpose();
            out.sigma2.push_back(sigma2);
            out.lambda.push_back(lambda);
            out.iteration.push_back(it);
            out.shortfall_sum += u;
            if (cfg.keep_shortfall_draws) {
                out.shortfall.row(kept) = u.transpose();
            }
            ++kept;
        }
    }
    return out;
}

} // namespace detail

/// Gibbs sampler for the frontier model. Deterministic for a given seed; chains use
/// independent sub-streams and may run on separate threads.
inline PosteriorDraws fit_frontier(const std::vector<double> &achievements, const Eigen::MatrixXd &x,
                                   const McmcConfig &cfg = {}, const FrontierPriors &priors = {},
                                   std::vector<std::string> child_ids = {}, std::vector<std::string> terms = {}) {
    cfg.validate();
    const auto n = static_cast<Eigen::Index>(achievements.size());
    if (n < 10) {
        throw ValidationError("frontier fit needs at least 10 children, got " + std::to_string(n));
    }
    if (x.rows() != n) {
        throw ValidationError("covariate rows do not match the number of achievements");
    }
    if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(x).rank() < x.cols()) {
        throw ValidationError("frontier design matrix is rank deficient");
    }
    if (cfg.draws_per_chain() < 4) {
        throw ValidationError("frontier fit keeps fewer than 4 draws per chain");
    }

    PosteriorDraws d;
    d.x = x;
    d.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = achievements[static_cast<std::size_t>(i)];
        if (!(a >= 0.0 && a <= 1.0)) {
            throw ValidationError("achievements must lie in [0, 1]");
        }
        d.y(i) = logit(std::clamp(a, cfg.clamp_epsilon, 1.0 - cfg.clamp_epsilon));
    }
    if (child_ids.empty()) {
        for (Eigen::Index i = 0; i < n; ++i) {
            child_ids.push_back(std::to_string(i + 1));
        }
    }
    if (terms.empty()) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            terms.push_back("x" + std::to_string(j));
        }
    }
    d.child_ids = std::move(child_ids);
    d.terms = std::move(terms);
    d.chains = cfg.chains;
    d.draws_per_chain = cfg.draws_per_chain();

    std::vector<detail::ChainOutput> outputs(static_cast<std::size_t>(cfg.chains));
    if (cfg.parallel && cfg.chains > 1) {
        std::vector<std::thread> workers;
        for (int c = 0; c < cfg.chains; ++c) {
            workers.emplace_back([&, c] { outputs[c] = detail::run_chain(d.y, x, priors, cfg, c); });
        }
        for (auto &w : workers) {
            w.join();
        }
    } else {
        for (int c = 0; c < cfg.chains; ++c) {
            outputs[c] = detail::run_chain(d.y, x, priors, cfg, c);
        }
    }

    const Eigen::Index total = static_cast<Eigen::Index>(cfg.chains) * d.draws_per_chain;
    d.beta.resize(total, x.cols());
    d.shortfall_mean = Eigen::VectorXd::Zero(n);
    if (cfg.keep_shortfall_draws) {
        d.shortfall.resize(total, n);
    }
    for (int c = 0; c < cfg.chains; ++c) {
        const auto &o = outputs[c];
        d.beta.middleRows(static_cast<Eigen::Index>(c) * d.draws_per_chain, d.draws_per_chain) = o.beta;
        if (cfg.keep_shortfall_draws) {
            d.shortfall.middleRows(static_cast<Eigen::Index>(c) * d.draws_per_chain, d.draws_per_chain) =
                o.shortfall;
        }
        d.sigma2.insert(d.sigma2.end(), o.sigma2.begin(), o.sigma2.end());
        d.lambda.insert(d.lambda.end(), o.lambda.begin(), o.lambda.end());
        d.iteration.insert(d.iteration.end(), o.iteration.begin(), o.iteration.end());
        d.shortfall_mean += o.shortfall_sum;
    }
    d.shortfall_mean /= static_cast<double>(total);

    Rng noise_rng = make_rng(cfg.seed, 0);
    d.noise.resize(static_cast<std::size_t>(total));
    for (auto &z : d.noise) {
        z = standard_normal(noise_rng);
    }

    auto diagnose = [&](const std::string &name, const std::vector<double> &v) {
        const double r = split_rhat(v, d.chains, d.draws_per_chain);
        d.diagnostics.push_back({name, r});
        d.max_rhat = std::max(d.max_rhat, r);
    };
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        std::vector<double> col(d.beta.col(j).data(), d.beta.col(j).data() + total);
        diagnose("beta[" + d.terms[static_cast<std::size_t>(j)] + "]", col);
    }
    diagnose("sigma_v2", d.sigma2);
    diagnose("lambda", d.lambda);
    d.converged = d.max_rhat <= cfg.rhat_threshold;
    return d;
}

enum class OpportunityMode {
    frontier,  // inverse-logit(x'beta + v)
    predictive // inverse-logit(x'beta + v - u_i), needs kept shortfall draws
};

/// Posterior opportunity draws for one child.
inline std::vector<double> opportunity_draws(const PosteriorDraws &d, std::size_t child,
                                             OpportunityMode mode = OpportunityMode::frontier) {
    if (child >= d.children()) {
        throw ValidationError("child index out of range");
    }
    if (mode == OpportunityMode::predictive && d.shortfall.rows() == 0) {
        throw ValidationError("predictive opportunities need shortfall draws (keep_shortfall_draws)");
    }
    const auto ci = static_cast<Eigen::Index>(child);
    const Eigen::VectorXd frontier = d.beta * d.x.row(ci).transpose();
    std::vector<double> o(d.total_draws());
    for (std::size_t s = 0; s < o.size(); ++s) {
        const auto si = static_cast<Eigen::Index>(s);
        double eta = frontier(si) + std::sqrt(d.sigma2[s]) * d.noise[s];
        if (mode == OpportunityMode::predictive) {
            eta -= d.shortfall(si, ci);
        }
        o[s] = inv_logit(eta);
    }
    return o;
}

/// Kernel density of a child's opportunity draws on [0, 1].
inline DensityCurve opportunity_distribution(const PosteriorDraws &d, const std::string &child_id,
                                             OpportunityMode mode = OpportunityMode::frontier) {
    return kde(opportunity_draws(d, d.child_index(child_id), mode));
}

struct OpportunityProfile {
    std::string child_id;
    double achievement = 0.0;
    double mean = 0.0;
    double q05 = 0.0;
    double q95 = 0.0;
    double expected_shortfall = 0.0;
    std::size_t rank = 0; // 1 = highest risk of being left behind
};

/// Children ranked by ascending posterior mean opportunity; ties go to the larger expected
/// shortfall, then to the smaller child id.
inline std::vector<OpportunityProfile> left_behind(const PosteriorDraws &d, const std::vector<double> &achievements,
                                                   OpportunityMode mode = OpportunityMode::frontier) {
    if (achievements.size() != d.children()) {
        throw ValidationError("one achievement per fitted child is required");
    }
    std::vector<OpportunityProfile> out;
    out.reserve(d.children());
    for (std::size_t i = 0; i < d.children(); ++i) {
        auto o = opportunity_draws(d, i, mode);
        OpportunityProfile prof;
        prof.child_id = d.child_ids[i];
        prof.achievement = achievements[i];
        prof.mean = std::accumulate(o.begin(), o.end(), 0.0) / static_cast<double>(o.size());
        prof.q05 = quantile(o, 0.05);
        prof.q95 = quantile(std::move(o), 0.95);
        prof.expected_shortfall = d.shortfall_mean(static_cast<Eigen::Index>(i));
        out.push_back(std::move(prof));
    }
    std::sort(out.begin(), out.end(), [](const OpportunityProfile &a, const OpportunityProfile &b) {
        if (a.mean != b.mean) return a.mean < b.mean;
        if (a.expected_shortfall != b.expected_shortfall) return a.expected_shortfall > b.expected_shortfall;
        return a.child_id < b.child_id;
    });
    for (std::size_t r = 0; r < out.size(); ++r) {
        out[r].rank = r + 1;
    }
    return out;
}

/// iteration,chain,parameter,value; shortfall draws appear as u[child_id] when kept.
inline std::string write_draws_csv(const PosteriorDraws &d, bool include_shortfall = false) {
    std::string out = "iteration,chain,parameter,value\n";
    for (int c = 0; c < d.chains; ++c) {
        for (int s = 0; s < d.draws_per_chain; ++s) {
            const std::size_t k = static_cast<std::size_t>(c) * d.draws_per_chain + s;
            const std::string prefix = std::to_string(d.iteration[k]) + ',' + std::to_string(c + 1) + ',';
            for (std::size_t j = 0; j < d.terms.size(); ++j) {
                out += prefix + csv_escape("beta[" + d.terms[j] + "]") + ',' +
                       format_number(d.beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j))) + '\n';
            }
            out += prefix + "sigma_v2," + format_number(d.sigma2[k]) + '\n';
            out += prefix + "lambda," + format_number(d.lambda[k]) + '\n';
            if (include_shortfall && d.shortfall.rows() > 0) {
                for (std::size_t i = 0; i < d.children(); ++i) {
                    out += prefix + csv_escape("u[" + d.child_ids[i] + "]") + ',' +
                           format_number(d.shortfall(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i))) +
                           '\n';
                }
            }
        }
    }
    return out;
}

inline std::string write_profiles_csv(const std::vector<OpportunityProfile> &profiles) {
    std::string out = "child_id,mean,q05,q95,Eu,rank\n";
    for (const auto &p : profiles) {
        out += csv_escape(p.child_id) + ',' + format_number(p.mean) + ',' + format_number(p.q05) + ',' +
               format_number(p.q95) + ',' + format_number(p.expected_shortfall) + ',' + std::to_string(p.rank) + '\n';
    }
    return out;
}

} // namespace micg
