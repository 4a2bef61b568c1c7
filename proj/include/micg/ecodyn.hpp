#pragma once

// Geometric-dynamical toolkit: a rotationally coupled three-level system, its chronosystem
// modulation, hyperbolic embedding, Lorentzian intervals, geodesics of a metric field and a
// time-varying ecological potential.
//
// Geodesics use an affine parameter t; g(x', x') is then constant along the curve.

#include "micg/csv.hpp"
#include "micg/error.hpp"
#include "micg/expr.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace micg::ecodyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Trajectory {
    double step = 0.0;
    std::vector<double> times;
    std::vector<Vec> states;

    const Vec &final_state() const { return states.back(); }
};

/// Classical fourth-order Runge-Kutta step for y' = f(t, y).
template <class F>
Vec rk4_step(F &&f, double t, const Vec &y, double h) {
    const Vec k1 = f(t, y);
    const Vec k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const Vec k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const Vec k4 = f(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Number of uniform steps of size h covering [0, horizon].
inline long step_count(double h, double horizon) {
    if (!(h > 0.0) || !(horizon > 0.0)) {
        throw ValidationError("step size and horizon must be positive");
    }
    const double ratio = horizon / h;
    const double nearest = std::round(ratio);
    return static_cast<long>(std::fabs(ratio - nearest) < 1e-9 * std::max(1.0, ratio) ? nearest : std::ceil(ratio));
}

/// Fixed-step RK4 from t = 0 to the horizon; throws NumericalError on the first non-finite state.
template <class F>
Trajectory integrate(F &&f, const Vec &y0, double h, double horizon) {
    const long steps = step_count(h, horizon);
    Trajectory traj;
    traj.step = h;
    traj.times.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(y0);
    Vec y = y0;
    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * h;
        double t_next = static_cast<double>(k + 1) * h;
        double hk = h;
        if (t_next > horizon) {
            // shortened last step
            t_next = horizon;
            hk = horizon - t;
        }
        y = rk4_step(f, t, y, hk);
        if (!y.allFinite()) {
            throw NumericalError("state blew up at t = " + format_number(t_next));
        }
        traj.times.push_back(t_next);
        traj.states.push_back(y);
    }
    return traj;
}

// --- Coupled system ---------------------------------------------------------------------

struct CurvatureParams {
    double phi1 = 0.0;
    double phi2 = 0.0;
    double phi3 = 0.0;

    /// The classical chaotic parameterisation (10, 28, 8/3).
    static CurvatureParams chaotic() { return {10.0, 28.0, 8.0 / 3.0}; }
};

struct CoupledState {
    double fx = 0.0;
    double fy = 0.0;
    double fz = 0.0;
    double t = 0.0;

    Vec vec() const { return Vec{{fx, fy, fz}}; }
};

/// f_x' = phi1 (f_y - f_x);  f_y' = f_x (phi2 - f_z) - f_y;  f_z' = f_x f_y - phi3 f_z.
inline Vec coupled_rhs(const CurvatureParams &p, const Vec &f) {
    return Vec{{p.phi1 * (f(1) - f(0)), f(0) * (p.phi2 - f(2)) - f(1), f(0) * f(1) - p.phi3 * f(2)}};
}

/// Equilibria: the origin and (+-sqrt(phi3 (phi2 - 1)), +-sqrt(phi3 (phi2 - 1)), phi2 - 1) when real.
inline std::vector<Vec> fixed_points(const CurvatureParams &p) {
    std::vector<Vec> out{Vec::Zero(3)};
    if (p.phi3 == 0.0) {
        throw ValidationError("fixed points need phi3 != 0");
    }
    const double s = p.phi3 * (p.phi2 - 1.0);
    if (s > 0.0) {
        const double r = std::sqrt(s);
        out.push_back(Vec{{r, r, p.phi2 - 1.0}});
        out.push_back(Vec{{-r, -r, p.phi2 - 1.0}});
    }
    return out;
}

inline Trajectory integrate_coupled(const CurvatureParams &params, const CoupledState &f0, double h,
                                    double horizon) {
    auto rhs = [&](double, const Vec &f) { return coupled_rhs(params, f); };
    Trajectory tr = integrate(rhs, f0.vec(), h, horizon);
    for (auto &t : tr.times) {
        t += f0.t;
    }
    return tr;
}

using Dynamics = std::function<Vec(double, const Vec &)>;
using Rate = std::function<double(double)>;

/// Psi' = base(t, Psi) + kappa(t) Psi.
inline Trajectory chronosystem_modulate(const Dynamics &base, const Rate &kappa, const Vec &psi0, double h,
                                        double horizon) {
    auto rhs = [&](double t, const Vec &psi) -> Vec { return base(t, psi) + kappa(t) * psi; };
    return integrate(rhs, psi0, h, horizon);
}

inline Dynamics coupled_dynamics(const CurvatureParams &p) {
    return [p](double, const Vec &f) { return coupled_rhs(p, f); };
}

inline Dynamics zero_dynamics() {
    return [](double, const Vec &f) -> Vec { return Vec::Zero(f.size()); };
}

// --- Geometry ---------------------------------------------------------------------------

/// x = sinh r sin v cos u,  y = sinh r sin v sin u,  z = cosh r.
inline std::array<double, 3> hyperbolic_embed(double r, double u, double v) {
    const double sr = std::sinh(r);
    return {sr * std::sin(v) * std::cos(u), sr * std::sin(v) * std::sin(u), std::cosh(r)};
}

/// ds^2 = dx^2 + dy^2 - dz^2 between consecutive samples (first three state components).
inline std::vector<double> interval(const Trajectory &curve) {
    if (curve.states.size() < 2) {
        throw ValidationError("interval needs at least two samples");
    }
    std::vector<double> ds2;
    ds2.reserve(curve.states.size() - 1);
    for (std::size_t k = 1; k < curve.states.size(); ++k) {
        const Vec d = curve.states[k].head(3) - curve.states[k - 1].head(3);
        ds2.push_back(d(0) * d(0) + d(1) * d(1) - d(2) * d(2));
    }
    return ds2;
}

/// Point -> symmetric metric tensor. `constant` marks metrics whose Christoffel symbols vanish.
struct MetricField {
    std::string name;
    int dimension = 0;
    bool constant = false;
    std::function<Mat(const Vec &)> tensor;

    Mat operator()(const Vec &x) const {
        Mat g = tensor(x);
        if (g.rows() != dimension || g.cols() != dimension) {
            throw ValidationError("metric '" + name + "' returned a tensor of the wrong size");
        }
        if (!g.isApprox(g.transpose(), 1e-12) && (g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            throw ValidationError("metric '" + name + "' is not symmetric");
        }
        return g;
    }
};

inline MetricField minkowski() {
    return {"minkowski", 3, true, [](const Vec &) -> Mat { return Vec{{1.0, 1.0, -1.0}}.asDiagonal(); }};
}

/// g = diag(1/y^2, 1/y^2) on the upper half plane (coordinates x, y).
inline MetricField poincare_half_plane() {
    return {"poincare-half-plane", 2, false, [](const Vec &p) -> Mat {
                const double w = 1.0 / (p(1) * p(1));
                return Vec{{w, w}}.asDiagonal();
            }};
}

/// Metric from expression strings: `components[i][j]` over the named coordinates.
inline MetricField custom_metric(const std::vector<std::string> &coordinates,
                                 const std::vector<std::vector<std::string>> &components) {
    const auto n = static_cast<int>(coordinates.size());
    if (n < 1 || static_cast<int>(components.size()) != n) {
        throw ValidationError("custom metric needs an n x n component table for n coordinates");
    }
    auto exprs = std::make_shared<std::vector<Expr>>();
    bool constant = true;
    for (const auto &row : components) {
        if (static_cast<int>(row.size()) != n) {
            throw ValidationError("custom metric component table is not square");
        }
        for (const auto &text : row) {
            Expr e = Expr::parse(text);
            if (e.is_boolean()) {
                throw ValidationError("metric component '" + text + "' is not arithmetic");
            }
            e.bind(coordinates);
            constant &= e.names().empty();
            exprs->push_back(std::move(e));
        }
    }
    return {"custom", n, constant, [exprs, n](const Vec &p) -> Mat {
                std::vector<Value> vals(p.data(), p.data() + p.size());
                Mat g(n, n);
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < n; ++j) {
                        g(i, j) = (*exprs)[static_cast<std::size_t>(i * n + j)].evaluate_number(vals);
                    }
                }
                return g;
            }};
}

/// Determinant small against the row norms (Hadamard bound).
inline bool singular(const Mat &g) {
    return std::fabs(g.determinant()) <= 1e-12 * g.rowwise().norm().prod();
}

/// Gamma^k_ij at x, returned as one matrix per upper index k. Five-point differences with step
/// 1e-3 * max(0.01, |x_l|); zero for constant metrics.
inline std::vector<Mat> christoffel(const MetricField &metric, const Vec &x) {
    const int n = metric.dimension;
    std::vector<Mat> gamma(static_cast<std::size_t>(n), Mat::Zero(n, n));
    if (metric.constant) {
        return gamma;
    }
    const Mat g = metric(x);
    if (singular(g)) {
        throw NumericalError("metric '" + metric.name + "' is singular at the current point");
    }
    const Mat g_inv = g.inverse();
    std::vector<Mat> dg(static_cast<std::size_t>(n)); // dg[l] = d g / d x^l
    for (int l = 0; l < n; ++l) {
        const double step = 1e-3 * std::max(1e-2, std::fabs(x(l)));
        auto at = [&](double m) {
            Vec xs = x;
            xs(l) += m * step;
            return metric(xs);
        };
        dg[static_cast<std::size_t>(l)] = (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * step);
    }
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                double s = 0.0;
                for (int l = 0; l < n; ++l) {
                    s += g_inv(k, l) * (dg[static_cast<std::size_t>(i)](l, j) + dg[static_cast<std::size_t>(j)](l, i) -
                                        dg[static_cast<std::size_t>(l)](i, j));
                }
                gamma[static_cast<std::size_t>(k)](i, j) = gamma[static_cast<std::size_t>(k)](j, i) = 0.5 * s;
            }
        }
    }
    return gamma;
}

/// g_ij v^i v^j.
inline double speed(const MetricField &metric, const Vec &x, const Vec &v) { return v.dot(metric(x) * v); }

/// Integrates x'' + Gamma(x)[x', x'] = 0 as a first-order system in (x, x'). States hold
/// position followed by velocity.
inline Trajectory geodesic(const MetricField &metric, const Vec &x0, const Vec &v0, double h, double horizon) {
    const int n = metric.dimension;
    if (x0.size() != n || v0.size() != n) {
        throw ValidationError("geodesic start point and velocity must match the metric dimension");
    }
    if (singular(metric(x0))) {
        throw NumericalError("metric '" + metric.name + "' is singular at the start point");
    }
    auto rhs = [&](double, const Vec &s) -> Vec {
        const Vec x = s.head(n);
        const Vec v = s.tail(n);
        Vec out(2 * n);
        out.head(n) = v;
        if (metric.constant) {
            out.tail(n).setZero();
            return out;
        }
        const auto gamma = christoffel(metric, x);
        for (int k = 0; k < n; ++k) {
            out(n + k) = -v.dot(gamma[static_cast<std::size_t>(k)] * v);
        }
        return out;
    };
    Vec s0(2 * n);
    s0 << x0, v0;
    return integrate(rhs, s0, h, horizon);
}

// --- Potential field --------------------------------------------------------------------

/// E(point, t) = sum_i Lambda_i(t) Psi_i(point).
struct PotentialField {
    std::vector<std::function<double(const Vec &)>> components;
    std::vector<Rate> couplings;

    PotentialField(std::vector<std::function<double(const Vec &)>> psi, std::vector<Rate> lambda)
        : components(std::move(psi)), couplings(std::move(lambda)) {
        if (components.size() != couplings.size()) {
            throw ValidationError("potential field needs one coupling per component");
        }
    }
};

inline double potential(const PotentialField &field, const Vec &point, double t) {
    double e = 0.0;
    for (std::size_t i = 0; i < field.components.size(); ++i) {
        e += field.couplings[i](t) * field.components[i](point);
    }
    return e;
}

/// Components over (x, y, z) and couplings over t, both as expression strings.
inline PotentialField potential_from_expressions(const std::vector<std::string> &components,
                                                 const std::vector<std::string> &couplings) {
    static const std::vector<std::string> space{"x", "y", "z"};
    static const std::vector<std::string> time{"t"};
    std::vector<std::function<double(const Vec &)>> psi;
    std::vector<Rate> lambda;
    for (const auto &text : components) {
        auto e = std::make_shared<Expr>(Expr::parse(text));
        e->bind(space);
        psi.push_back([e](const Vec &p) {
            const Value v[] = {p(0), p(1), p(2)};
            return e->evaluate_number(v);
        });
    }
    for (const auto &text : couplings) {
        auto e = std::make_shared<Expr>(Expr::parse(text));
        e->bind(time);
        lambda.push_back([e](double t) {
            const Value v[] = {t};
            return e->evaluate_number(v);
        });
    }
    return PotentialField(std::move(psi), std::move(lambda));
}

inline std::string write_trajectory_csv(const Trajectory &tr, const std::vector<std::string> &columns) {
    std::string out = "t";
    for (const auto &c : columns) {
        out += ',' + csv_escape(c);
    }
    out += '\n';
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        out += format_number(tr.times[k]);
        for (Eigen::Index j = 0; j < tr.states[k].size(); ++j) {
            out += ',' + format_number(tr.states[k](j));
        }
        out += '\n';
    }
    return out;
}

} // namespace micg::ecodyn
