#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"

#include "archimax/errors.hpp"
#include "archimax/parametric.hpp"
#include "archimax/random.hpp"
#include "oracles.hpp"

using namespace archimax;

namespace {

const std::vector<ArchGenerator> kFamilies{
    {Family::Clayton, 0.5}, {Family::Clayton, 2.0}, {Family::Frank, 1.86}, {Family::Frank, 5.74},
    {Family::Joe, 1.44},    {Family::Joe, 2.86},    {Family::Gumbel, 1.25}, {Family::Gumbel, 2.0}};

/// Clayton derivatives by the falling-factorial formula.
double clayton_derivative(double theta, double x, std::size_t k) {
    double c = 1.0, e = -1.0 / theta;
    for (std::size_t i = 0; i < k; ++i) c *= e - static_cast<double>(i);
    return c * std::pow(1.0 + x, e - static_cast<double>(k));
}

/// Frank tau through the Debye function.
double frank_tau(double theta) {
    auto f = [](double t) { return t < 1e-12 ? 1.0 : t / std::expm1(t); };
    const double debye = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, theta) / theta;
    return 1.0 - 4.0 / theta * (1.0 - debye);
}

/// Bivariate NSD stdf by quadrature over D_1 ~ Beta(a1, a2).
double nsd_quadrature(double a1, double a2, double rho, double x1, double x2) {
    using boost::math::tgamma;
    const double c1 = tgamma(a1) / tgamma(a1 - rho), c2 = tgamma(a2) / tgamma(a2 - rho);
    const double lead = tgamma(a1 + a2 - rho) / tgamma(a1 + a2);
    const double b = boost::math::beta(a1, a2);
    auto f = [&](double t) {
        const double dens = std::pow(t, a1 - 1) * std::pow(1 - t, a2 - 1) / b;
        return std::max(x1 * c1 * std::pow(t, -rho), x2 * c2 * std::pow(1 - t, -rho)) * dens;
    };
    boost::math::quadrature::tanh_sinh<double> integrator;
    return lead * integrator.integrate(f, 0.0, 1.0);
}

}  // namespace

TEST_CASE("closed-form values and inverses") {
    CHECK(phi({Family::Clayton, 2.0}, 3.0) == doctest::Approx(0.5));
    CHECK(phi_inverse({Family::Clayton, 2.0}, 0.5) == doctest::Approx(3.0));
    CHECK(phi_inverse({Family::Gumbel, 2.0}, std::exp(-1.0)) == doctest::Approx(1.0));
    for (double t : {0.0, 0.3, 2.0, 7.5}) CHECK(phi({Family::Gumbel, 1.0}, t) == doctest::Approx(std::exp(-t)));
    for (const auto& g : kFamilies) {
        CHECK(phi(g, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(phi_inverse(g, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
        for (double w : {0.01, 0.2, 0.5, 0.9, 0.999}) CHECK(std::abs(phi(g, phi_inverse(g, w)) - w) < 1e-12);
    }
    CHECK_THROWS_AS(phi({Family::Clayton, -1.0}, 1.0), Error);
    CHECK_THROWS_AS(phi({Family::Joe, 0.5}, 1.0), Error);
    CHECK_THROWS_AS(phi({Family::Gumbel, 0.9}, 1.0), Error);
    CHECK_THROWS_AS(phi({Family::Frank, 0.0}, 1.0), Error);
    CHECK(family_from_string("frank") == Family::Frank);
    CHECK_THROWS_AS(family_from_string("tdist"), Error);
}

TEST_CASE("phi is non-increasing and convex") {
    for (const auto& g : kFamilies) {
        double prev = 1.0, prev_slope = -std::numeric_limits<double>::infinity();
        for (int i = 1; i <= 400; ++i) {
            const double x = 0.025 * i;
            const double v = phi(g, x);
            CHECK(v <= prev + 1e-15);
            const double slope = phi_d1(g, x);
            CHECK(slope <= 0.0);
            CHECK(slope >= prev_slope - 1e-12);
            CHECK(phi_d2(g, x) >= 0.0);
            prev = v;
            prev_slope = slope;
        }
    }
}

TEST_CASE("taylor jets match hand derivatives") {
    for (double x : {0.3, 1.0, 4.0}) {
        TaylorJet jet = phi_taylor({Family::Gumbel, 1.0}, x, 12);
        double fact = 1.0;
        for (std::size_t k = 0; k <= 12; ++k) {
            if (k) fact *= static_cast<double>(k);
            CHECK(jet[k] == doctest::Approx((k % 2 ? -1.0 : 1.0) * std::exp(-x) / fact).epsilon(1e-12));
        }
        TaylorJet cj = phi_taylor({Family::Clayton, 2.0}, x, 10);
        fact = 1.0;
        for (std::size_t k = 0; k <= 10; ++k) {
            if (k) fact *= static_cast<double>(k);
            CHECK(cj[k] == doctest::Approx(clayton_derivative(2.0, x, k) / fact).epsilon(1e-12));
        }
    }
    CHECK(phi_taylor({Family::Clayton, 2.0}, 1.0, 1)[1] == doctest::Approx(-0.5 * std::pow(2.0, -1.5)));
    for (const auto& g : kFamilies) {
        TaylorJet j0 = phi_taylor(g, 0.7, 0);
        CHECK(j0[0] == doctest::Approx(phi(g, 0.7)).epsilon(1e-14));
        TaylorJet j = phi_taylor(g, 0.7, 3);
        CHECK(j.derivative(1) == doctest::Approx(phi_d1(g, 0.7)).epsilon(1e-10));
        CHECK(j.derivative(2) == doctest::Approx(phi_d2(g, 0.7)).epsilon(1e-10));
        const double h = 1e-4;
        const double fd3 = (phi_d2(g, 0.7 + h) - phi_d2(g, 0.7 - h)) / (2 * h);
        CHECK(j.derivative(3) == doctest::Approx(fd3).epsilon(1e-6));
    }
    CHECK_THROWS_AS(phi_taylor({Family::Clayton, 2.0}, 0.0, 3), Error);
    CHECK_THROWS_AS(phi_taylor({Family::Clayton, 2.0}, 1.0, 33), Error);
}

TEST_CASE("derivative signs alternate up to order d-1") {
    const std::size_t d = 10;
    for (const auto& g : kFamilies)
        for (double x : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0}) {
            TaylorJet j = phi_taylor(g, x, d - 1);
            for (std::size_t k = 0; k < d; ++k) CHECK((k % 2 ? -1.0 : 1.0) * j[k] >= -1e-14);
        }
}

TEST_CASE("radial cdf of the exponential generator is Erlang") {
    for (std::size_t d : {2u, 5u, 10u}) {
        std::vector<double> grid;
        for (int i = 1; i <= 1000; ++i) grid.push_back(0.03 * i);
        auto cdf = radial_cdf_grid({Family::Gumbel, 1.0}, d, grid);
        double err = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            err = std::max(err, std::abs(cdf[i] - oracle::erlang_cdf(d, grid[i])));
        CHECK(err < 1e-8);
    }
    CHECK(radial_cdf({Family::Clayton, 2.0}, 3, 1e-9) < 1e-6);
    CHECK(radial_cdf({Family::Clayton, 2.0}, 3, 1e9) > 1 - 1e-3);
}

TEST_CASE("radial cdf is monotone for every family") {
    std::vector<double> grid;
    for (int i = 1; i <= 500; ++i) grid.push_back(0.02 * i * i / 50.0);
    for (const auto& g : kFamilies)
        for (std::size_t d : {2u, 5u, 10u}) {
            auto cdf = radial_cdf_grid(g, d, grid);
            for (std::size_t i = 1; i < cdf.size(); ++i) CHECK(cdf[i] >= cdf[i - 1] - 1e-8);
            CHECK(cdf.front() >= 0.0);
            CHECK(cdf.back() <= 1.0);
        }
}

TEST_CASE("radial sampling") {
    const std::size_t count = 100000;
    auto r = sample_radial({Family::Gumbel, 1.0}, 3, count, 5);
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / count;
    CHECK(std::abs(mean - 3.0) < 3.0 * std::sqrt(3.0 / count));
    CHECK(sample_radial({Family::Gumbel, 1.0}, 3, 0, 5).empty());
    CHECK(sample_radial({Family::Clayton, 2.0}, 4, 100, 9) == sample_radial({Family::Clayton, 2.0}, 4, 100, 9));
    const ArchGenerator g{Family::Frank, 5.74};
    auto f = sample_radial(g, 4, 20000, 3);
    const double ks = oracle::ks_statistic(f, [&](double x) { return radial_cdf(g, 4, x); });
    CHECK(oracle::ks_pvalue(ks, f.size()) > 0.01);
}

TEST_CASE("theta and tau") {
    CHECK(theta_from_tau(Family::Clayton, 0.5) == doctest::Approx(2.0));
    CHECK(theta_from_tau(Family::Clayton, 0.2) == doctest::Approx(0.5));
    CHECK(theta_from_tau(Family::Gumbel, 0.2) == doctest::Approx(1.25));
    CHECK(theta_from_tau(Family::Gumbel, 0.5) == doctest::Approx(2.0));
    CHECK(std::abs(theta_from_tau(Family::Frank, 0.5) - 5.74) < 0.01);
    CHECK(std::abs(theta_from_tau(Family::Frank, 0.2) - 1.86) < 0.01);
    CHECK(std::abs(theta_from_tau(Family::Joe, 0.2) - 1.44) < 0.01);
    CHECK(std::abs(theta_from_tau(Family::Joe, 0.5) - 2.86) < 0.01);
    for (double theta : {0.5, 1.86, 4.0, 5.74, 12.0}) {
        CHECK(tau_from_theta(Family::Frank, theta) == doctest::Approx(frank_tau(theta)).epsilon(1e-9));
        CHECK(std::abs(theta_from_tau(Family::Frank, tau_from_theta(Family::Frank, theta)) - theta) < 1e-6);
    }
    for (double theta : {1.1, 1.44, 2.86, 6.0})
        CHECK(std::abs(theta_from_tau(Family::Joe, tau_from_theta(Family::Joe, theta)) - theta) < 1e-6);
}

TEST_CASE("nsd stdf margins, homogeneity and quadrature") {
    NsdParams p{{1, 2, 3}, 0.69, 1000000};
    NsdStdf ell(p, 17);
    for (std::size_t j = 0; j < 3; ++j) {
        std::vector<double> e(3, 0.0);
        e[j] = 1.0;
        CHECK(std::abs(ell(e) - 1.0) < 3.0 * ell.standard_error(e));
    }
    std::vector<double> zero(3, 0.0);
    CHECK(ell(zero) == 0.0);
    Rng rng = make_rng(4);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> x{uniform_open(rng), uniform_open(rng), uniform_open(rng)};
        std::vector<double> x2{2 * x[0], 2 * x[1], 2 * x[2]};
        CHECK(ell(x2) == 2.0 * ell(x));
        CHECK(nsd_stdf(p, x, 17) == ell(x));
    }
    NsdStdf other(p, 18);
    std::vector<double> x{0.3, 0.5, 0.2};
    const double se = std::hypot(ell.standard_error(x), other.standard_error(x));
    CHECK(std::abs(ell(x) - other(x)) < 3.0 * se);

    NsdParams p2{{1.5, 2.5}, 0.69, 1000000};
    NsdStdf ell2(p2, 5);
    for (double t : {0.1, 0.35, 0.5, 0.8}) {
        std::vector<double> y{t, 1 - t};
        CHECK(std::abs(ell2(y) - nsd_quadrature(1.5, 2.5, 0.69, t, 1 - t)) < 4.0 * ell2.standard_error(y));
    }
    CHECK_THROWS_AS((NsdParams{{1, 0.5}, 0.6}.validate()), Error);
    CHECK_THROWS_AS((NsdParams{{1, 2}, 0.0}.validate()), Error);
}

TEST_CASE("nsd spectral samples reproduce the stdf") {
    NsdParams p{{1, 1, 2, 3}, 0.69, 1000000};
    const std::size_t count = 100000;
    Matrix w = nsd_spectral_sample(p, count, 9);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        CHECK(std::abs(w.row(i).sum() - 1.0) < 1e-12);
        CHECK(w.row(i).minCoeff() >= 0.0);
    }
    for (Eigen::Index j = 0; j < 4; ++j) {
        const double m = w.col(j).mean();
        const double sd = std::sqrt((w.col(j).array() - m).square().mean() / count);
        CHECK(std::abs(m - 0.25) < 3.0 * sd);
    }
    NsdStdf ell(p, 3);
    Rng rng = make_rng(8);
    for (int t = 0; t < 10; ++t) {
        auto x = uniform_simplex(4, rng);
        Eigen::VectorXd mx(count);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            double best = 0.0;
            for (Eigen::Index j = 0; j < 4; ++j) best = std::max(best, x[static_cast<std::size_t>(j)] * w(i, j));
            mx(i) = 4.0 * best;
        }
        const double m = mx.mean();
        const double se = std::sqrt((mx.array() - m).square().mean() / count);
        CHECK(std::abs(m - ell(x)) < 3.0 * std::hypot(se, ell.standard_error(x)));
    }
}
