#pragma once

#include <functional>

#include "archimax/matrix.hpp"

namespace archimax {

using ResidualFn = std::function<Vector(const Vector& x)>;

struct LsqOptions {
    std::size_t max_iters = 200;
    double ftol = 1e-14;  // relative cost decrease
    double xtol = 1e-12;  // step length relative to |x|
    double fd_step = 1e-7;
};

struct LsqResult {
    Vector x;
    double cost = 0.0;  // 0.5 * |r|^2
    std::size_t iterations = 0;
    bool converged = false;
};

/// Box-constrained nonlinear least squares: Levenberg-Marquardt steps with a
/// forward-difference Jacobian, projected onto [lower, upper].
LsqResult bounded_least_squares(const ResidualFn& residual, Vector x0, const Vector& lower,
                                const Vector& upper, const LsqOptions& options = {});

/// Linear least squares min |A x - b| via column-pivoted QR. Throws a numeric
/// error carrying the condition number if A is rank deficient.
Vector linear_least_squares(const Eigen::MatrixXd& a, const Vector& b);

}  // namespace archimax
