#pragma once

#include "micg/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>

namespace micg {

struct SymmetricEigen {
    Eigen::VectorXd values;  // unsorted, aligned with columns of `vectors`
    Eigen::MatrixXd vectors; // orthonormal columns
    int sweeps = 0;
};

/// Cyclic Jacobi rotations on a symmetric matrix. Stops when the off-diagonal Frobenius
/// norm falls below `tolerance` times the matrix norm.
inline SymmetricEigen jacobi_eigen(const Eigen::MatrixXd &symmetric, double tolerance = 1e-10,
                                   int max_sweeps = 10'000) {
    const Eigen::Index n = symmetric.rows();
    if (n != symmetric.cols()) {
        throw ValidationError("jacobi_eigen needs a square matrix");
    }
    Eigen::MatrixXd a = symmetric;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double scale = std::max(1.0, a.norm());

    auto off_norm = [&] {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                s += 2.0 * a(i, j) * a(i, j);
            }
        }
        return std::sqrt(s);
    };

    SymmetricEigen out;
    while (off_norm() > tolerance * scale) {
        if (out.sweeps >= max_sweeps) {
            throw NumericalError("Jacobi eigen-solver did not converge in " +
                                 std::to_string(max_sweeps) + " sweeps");
        }
        ++out.sweeps;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                // Rotation angle that zeroes a(p, q); t = tan(theta), smaller root.
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    out.values = a.diagonal();
    out.vectors = std::move(v);
    return out;
}

} // namespace micg
