#pragma once

#include "micg/csv.hpp"
#include "micg/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace micg {

struct RegressionFit {
    std::vector<std::string> terms;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;
    // OLS only.
    std::optional<Eigen::VectorXd> standard_errors;
    double residual_variance = 0.0;
    // Quantile only.
    std::optional<double> tau;
    double objective = 0.0; // total pinball loss at the solution
    std::vector<std::size_t> basis; // observations interpolated by the vertex solution
    int iterations = 0;
};

/// Check (pinball) loss rho_tau(r) = r * (tau - 1[r < 0]).
inline double pinball(double r, double tau) { return r * (tau - (r < 0.0 ? 1.0 : 0.0)); }

inline double pinball_objective(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const Eigen::VectorXd &b,
                                double tau) {
    const Eigen::VectorXd r = y - x * b;
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        s += pinball(r(i), tau);
    }
    return s;
}

namespace detail {

inline std::vector<std::string> default_terms(Eigen::Index p) {
    std::vector<std::string> t;
    for (Eigen::Index j = 0; j < p; ++j) {
        t.push_back("x" + std::to_string(j));
    }
    return t;
}

inline void check_design(const Eigen::VectorXd &y, const Eigen::MatrixXd &x) {
    if (y.size() != x.rows()) {
        throw ValidationError("response and design matrix have different row counts");
    }
    if (x.rows() <= x.cols()) {
        throw ValidationError("regression needs more observations than coefficients");
    }
    if (!y.allFinite() || !x.allFinite()) {
        throw ValidationError("regression input contains non-finite values");
    }
}

} // namespace detail

/// Least squares through a column-pivoted QR; standard errors from (X'X)^-1 * sigma^2.
inline RegressionFit ols_fit(const Eigen::VectorXd &y, const Eigen::MatrixXd &x,
                             std::vector<std::string> terms = {}) {
    detail::check_design(y, x);
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p) {
        throw ValidationError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                              std::to_string(p) + ")");
    }
    RegressionFit fit;
    fit.terms = terms.empty() ? detail::default_terms(p) : std::move(terms);
    fit.coefficients = qr.solve(y);
    fit.residuals = y - x * fit.coefficients;
    fit.residual_variance = fit.residuals.squaredNorm() / static_cast<double>(n - p);

    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd cov_perm = r_inv * r_inv.transpose();
    const auto &perm = qr.colsPermutation();
    const Eigen::MatrixXd cov = perm * cov_perm * perm.transpose();
    fit.standard_errors = (cov.diagonal() * fit.residual_variance).cwiseSqrt();
    return fit;
}

/// Quantile regression as the linear program
///   min tau * 1'u + (1 - tau) * 1'v   s.t.  X b + u - v = y,  u, v >= 0,  b free,
/// solved by a revised simplex whose bases are sets of p interpolated observations.
/// Pricing is Dantzig's rule, switching permanently to Bland's rule after a run of degenerate
/// pivots, so the method terminates on tied data. Returns a vertex solution.
inline RegressionFit quantile_fit(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, double tau,
                                  std::vector<std::string> terms = {}) {
    detail::check_design(y, x);
    if (!(tau > 0.0 && tau < 1.0)) {
        throw ValidationError("quantile level tau must lie in (0, 1)");
    }
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();

    // Initial basis: the p rows a pivoted QR of X' finds most independent.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pick(x.transpose());
    if (pick.rank() < p) {
        throw ValidationError("design matrix is rank deficient; the quantile LP has no vertex");
    }
    std::vector<Eigen::Index> h(static_cast<std::size_t>(p));
    for (Eigen::Index m = 0; m < p; ++m) {
        h[static_cast<std::size_t>(m)] = pick.colsPermutation().indices()(m);
    }
    std::vector<char> in_basis(static_cast<std::size_t>(n), 0);
    for (auto k : h) {
        in_basis[static_cast<std::size_t>(k)] = 1;
    }

    const double scale = 1.0 + y.cwiseAbs().maxCoeff();
    const double zero_tol = 1e-12 * scale;
    const double cost_tol = 1e-10;
    const double pivot_tol = 1e-11;

    Eigen::MatrixXd xh(p, p);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    Eigen::VectorXd b(p);
    Eigen::VectorXd r(n);
    auto refresh = [&] {
        Eigen::VectorXd yh(p);
        for (Eigen::Index m = 0; m < p; ++m) {
            xh.row(m) = x.row(h[static_cast<std::size_t>(m)]);
            yh(m) = y(h[static_cast<std::size_t>(m)]);
        }
        lu.compute(xh);
        if (!(std::fabs(lu.determinant()) > 0.0)) {
            throw NumericalError("quantile simplex reached a singular basis");
        }
        b = lu.solve(yh);
        r = y - x * b;
        for (auto k : h) {
            r(k) = 0.0;
        }
    };
    refresh();

    // Sign of the basic residual variable of every non-basis row: +1 for u, -1 for v.
    std::vector<int> sign(static_cast<std::size_t>(n), 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        sign[static_cast<std::size_t>(i)] = r(i) < 0.0 ? -1 : 1;
    }

    bool bland = false;
    int degenerate_run = 0;
    const long max_iterations = 200L * n + 10'000;
    int iterations = 0;
    for (;; ++iterations) {
        if (iterations > max_iterations) {
            throw NumericalError("quantile simplex exceeded its iteration limit");
        }
        Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!in_basis[static_cast<std::size_t>(i)]) {
                g += (sign[static_cast<std::size_t>(i)] > 0 ? tau : tau - 1.0) * x.row(i).transpose();
            }
        }
        const Eigen::VectorXd w = lu.transpose().solve(g);

        // Candidates: u_k (residual of basis row k becomes positive) or v_k (negative).
        Eigen::Index enter_m = -1;
        int dir = 0;
        double best = -cost_tol;
        Eigen::Index best_index = std::numeric_limits<Eigen::Index>::max();
        for (Eigen::Index m = 0; m < p; ++m) {
            const Eigen::Index k = h[static_cast<std::size_t>(m)];
            const double du = tau + w(m);
            const double dv = (1.0 - tau) - w(m);
            const std::pair<double, int> options[] = {{du, +1}, {dv, -1}};
            for (auto [d, s] : options) {
                if (d >= -cost_tol) {
                    continue;
                }
                const Eigen::Index var = s > 0 ? k : n + k;
                const bool better = bland ? var < best_index : d < best;
                if (better) {
                    best = d;
                    best_index = var;
                    enter_m = m;
                    dir = s;
                }
            }
        }
        if (enter_m < 0) {
            break;
        }

        Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
        e(enter_m) = 1.0;
        const Eigen::VectorXd c = lu.solve(e);
        const Eigen::VectorXd z = x * c;

        Eigen::Index leave = -1;
        double t_min = std::numeric_limits<double>::infinity();
        Eigen::Index leave_var = std::numeric_limits<Eigen::Index>::max();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (in_basis[static_cast<std::size_t>(i)]) {
                continue;
            }
            const int s = sign[static_cast<std::size_t>(i)];
            const double rate = dir * s * z(i);
            if (rate >= -pivot_tol) {
                continue;
            }
            const double value = std::max(0.0, s * r(i));
            const double t = value < zero_tol ? 0.0 : value / -rate;
            const Eigen::Index var = s > 0 ? i : n + i;
            if (t < t_min || (t == t_min && var < leave_var)) {
                t_min = t;
                leave = i;
                leave_var = var;
            }
        }
        if (leave < 0) {
            throw NumericalError("quantile LP is unbounded; check the design matrix");
        }

        const Eigen::Index k = h[static_cast<std::size_t>(enter_m)];
        in_basis[static_cast<std::size_t>(k)] = 0;
        sign[static_cast<std::size_t>(k)] = dir;
        in_basis[static_cast<std::size_t>(leave)] = 1;
        h[static_cast<std::size_t>(enter_m)] = leave;
        refresh();

        if (t_min == 0.0) {
            if (++degenerate_run > 50) {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
    }

    RegressionFit fit;
    fit.terms = terms.empty() ? detail::default_terms(p) : std::move(terms);
    fit.coefficients = b;
    fit.residuals = r;
    fit.tau = tau;
    fit.iterations = iterations;
    for (auto k : h) {
        fit.basis.push_back(static_cast<std::size_t>(k));
    }
    fit.objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        fit.objective += pinball(r(i), tau);
    }
    return fit;
}

/// term,estimate,se,tau rows; se is blank for quantile fits, tau blank for OLS.
inline std::string write_fits_csv(const std::vector<RegressionFit> &fits) {
    std::string out = "model,term,estimate,se,tau\n";
    for (const auto &f : fits) {
        const std::string model = f.tau ? "quantile" : "ols";
        for (std::size_t j = 0; j < f.terms.size(); ++j) {
            out += model + ',' + csv_escape(f.terms[j]) + ',' +
                   format_number(f.coefficients(static_cast<Eigen::Index>(j))) + ',';
            if (f.standard_errors) {
                out += format_number((*f.standard_errors)(static_cast<Eigen::Index>(j)));
            }
            out += ',';
            if (f.tau) {
                out += format_number(*f.tau);
            }
            out += '\n';
        }
    }
    return out;
}

} // namespace micg
