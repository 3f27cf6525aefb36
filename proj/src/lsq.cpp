#include "archimax/lsq.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "archimax/errors.hpp"

namespace archimax {

namespace {

Vector project(Vector x, const Vector& lower, const Vector& upper) {
    return x.cwiseMax(lower).cwiseMin(upper);
}

Eigen::MatrixXd jacobian(const ResidualFn& residual, const Vector& x, const Vector& r0,
                         const Vector& upper, double step) {
    Eigen::MatrixXd jac(r0.size(), x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        double h = step * std::max(1.0, std::abs(x(k)));
        if (x(k) + h > upper(k)) h = -h;
        Vector xp = x;
        xp(k) += h;
        jac.col(k) = (residual(xp) - r0) / h;
    }
    return jac;
}

}  // namespace

LsqResult bounded_least_squares(const ResidualFn& residual, Vector x0, const Vector& lower,
                                const Vector& upper, const LsqOptions& options) {
    if (x0.size() != lower.size() || x0.size() != upper.size())
        throw_invalid("bounded_least_squares: bound dimension mismatch");
    LsqResult out;
    out.x = project(std::move(x0), lower, upper);
    Vector r = residual(out.x);
    out.cost = 0.5 * r.squaredNorm();
    if (out.x.size() == 0) {
        out.converged = true;
        return out;
    }
    double mu = 1e-3;
    for (out.iterations = 0; out.iterations < options.max_iters; ++out.iterations) {
        Eigen::MatrixXd jac = jacobian(residual, out.x, r, upper, options.fd_step);
        Eigen::MatrixXd jtj = jac.transpose() * jac;
        Vector grad = jac.transpose() * r;
        // Coordinates pinned at a bound with the gradient pushing outward are frozen.
        std::vector<bool> active(out.x.size(), false);
        for (Eigen::Index k = 0; k < out.x.size(); ++k)
            active[k] = (out.x(k) <= lower(k) && grad(k) > 0.0) || (out.x(k) >= upper(k) && grad(k) < 0.0);
        bool improved = false;
        for (int attempt = 0; attempt < 30; ++attempt) {
            Eigen::MatrixXd a = jtj;
            for (Eigen::Index k = 0; k < a.rows(); ++k) a(k, k) += mu * (jtj(k, k) + 1e-12);
            Vector rhs = -grad;
            for (Eigen::Index k = 0; k < a.rows(); ++k) {
                if (!active[k]) continue;
                a.row(k).setZero();
                a.col(k).setZero();
                a(k, k) = 1.0;
                rhs(k) = 0.0;
            }
            Vector step = a.ldlt().solve(rhs);
            Vector candidate = project(out.x + step, lower, upper);
            Vector rc = residual(candidate);
            double cost = 0.5 * rc.squaredNorm();
            if (std::isfinite(cost) && cost < out.cost) {
                const double decrease = out.cost - cost;
                const double moved = (candidate - out.x).norm();
                out.x = std::move(candidate);
                r = std::move(rc);
                const double previous = out.cost;
                out.cost = cost;
                mu = std::max(mu / 3.0, 1e-12);
                improved = true;
                if (decrease <= options.ftol * previous || moved <= options.xtol * (out.x.norm() + options.xtol))
                    out.converged = true;
                break;
            }
            mu *= 4.0;
        }
        if (!improved || out.converged) {
            out.converged = true;
            break;
        }
    }
    return out;
}

Vector linear_least_squares(const Eigen::MatrixXd& a, const Vector& b) {
    if (a.rows() != b.size()) throw_invalid("linear_least_squares: dimension mismatch");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < a.cols()) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
        const auto& s = svd.singularValues();
        std::ostringstream msg;
        msg << "singular least-squares system (rank " << qr.rank() << " of " << a.cols()
            << ", condition " << (s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : INFINITY) << ")";
        throw_numeric(msg.str());
    }
    return qr.solve(b);
}

}  // namespace archimax
