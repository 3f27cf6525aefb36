#include <cmath>
#include <memory>
#include <sstream>

#include "doctest.h"

#include "archimax/csv.hpp"
#include "archimax/errors.hpp"
#include "archimax/metrics.hpp"
#include "archimax/parametric.hpp"
#include "archimax/random.hpp"
#include "oracles.hpp"

using namespace archimax;

namespace {

Matrix uniform_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0);
    Matrix m(n, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform_open(rng);
    return m;
}

}  // namespace

TEST_CASE("cvm basic properties") {
    Matrix a = uniform_matrix(500, 3, 1);
    Matrix b = uniform_matrix(500, 3, 2);
    CHECK(cvm(a, a, 2000, 3) == 0.0);
    CHECK(cvm(a, b, 2000, 3) == cvm(b, a, 2000, 3));
    CHECK(cvm(a, b, 2000, 3) >= 0.0);
    Matrix ta = a.array().exp();
    CHECK(cvm(ta, b, 2000, 3) == cvm(a, b, 2000, 3));
    CHECK_THROWS_AS(cvm(a, Matrix(500, 2), 10, 0), Error);
    CHECK_THROWS_AS(cvm(a, b, 0, 0), Error);
}

TEST_CASE("cvm between independence and comonotonicity") {
    // Integral of (uv - min(u, v))^2 over the unit square is 1/90.
    Matrix ind = uniform_matrix(2000, 2, 4);
    Matrix como(2000, 2);
    como.col(0) = uniform_matrix(2000, 1, 5).col(0);
    como.col(1) = como.col(0);
    const double v = cvm(ind, como, 100000, 6);
    CHECK(v == doctest::Approx(1.0 / 90.0).epsilon(0.08));
}

TEST_CASE("cvm agrees with a brute-force evaluation") {
    Matrix a = uniform_matrix(60, 2, 7);
    Matrix b = uniform_matrix(80, 2, 8);
    Matrix ua(60, 2), ub(80, 2);
    auto ranks = [](const Matrix& m, Matrix& out) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                double r = 0;
                for (Eigen::Index k = 0; k < m.rows(); ++k) r += m(k, j) <= m(i, j);
                out(i, j) = r / static_cast<double>(m.rows());
            }
    };
    ranks(a, ua);
    ranks(b, ub);
    Rng rng = make_rng(9, 0x63766d);
    double acc = 0.0;
    for (int q = 0; q < 500; ++q) {
        std::vector<double> x(2);
        for (double& c : x) c = uniform_open(rng);
        const double diff = oracle::empirical_copula(ua, x) - oracle::empirical_copula(ub, x);
        acc += diff * diff;
    }
    CHECK(cvm(a, b, 500, 9) == doctest::Approx(acc / 500.0).epsilon(1e-12));
}

TEST_CASE("irae") {
    StdfFunction sum = [](std::span<const double> x) { return x[0] + x[1] + x[2]; };
    StdfFunction scaled = [](std::span<const double> x) { return 1.1 * (x[0] + x[1] + x[2]); };
    CHECK(irae(sum, sum, 3, 500, 1).value == 0.0);
    CHECK(irae(sum, scaled, 3, 500, 1).value == doctest::Approx(0.1));
    StdfFunction maxf = [](std::span<const double> x) { return std::max({x[0], x[1], x[2]}); };
    auto r = irae(sum, maxf, 3, 500, 2);
    CHECK(r.value > 0.0);
    CHECK(r.value < 1.0);
    CHECK(r.excluded == 0);
    CHECK(irae(sum, maxf, 3, 500, 2).value == r.value);

    StdfFunction holes = [](std::span<const double> x) { return x[0] > 0.5 ? 0.0 : x[0] + x[1]; };
    StdfFunction sum2 = [](std::span<const double> x) { return x[0] + x[1]; };
    auto h = irae(holes, sum2, 2, 20000, 3);
    CHECK(h.value == 0.0);
    CHECK(static_cast<double>(h.excluded) / 20000.0 == doctest::Approx(0.5).epsilon(0.05));
    StdfFunction zero = [](std::span<const double>) { return 0.0; };
    CHECK_THROWS_AS(irae(zero, sum2, 2, 100, 0), Error);
    CHECK_THROWS_AS(irae(sum2, sum2, 1, 100, 0), Error);
}

TEST_CASE("lambda map closed forms") {
    const auto grid = default_lambda_grid();
    REQUIRE(grid.size() == 99);
    CHECK(grid.front() == doctest::Approx(0.01));
    CHECK(grid.back() == doctest::Approx(0.99));

    ExpGenerator e;
    auto le = lambda_map(e, grid);
    CHECK(le.band.empty());
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(le.values[i] == doctest::Approx(grid[i] * std::log(grid[i])));

    const double theta = 2.5;
    auto base = std::make_shared<ParametricGenerator>(ArchGenerator{Family::Clayton, theta});
    auto lc = lambda_map(*base, grid, 100);
    ScaledGenerator scaled(base, 3.7);
    auto ls = lambda_map(scaled, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid[i];
        CHECK(lc.values[i] == doctest::Approx((std::pow(w, theta + 1.0) - w) / theta).epsilon(1e-9));
        CHECK(ls.values[i] == doctest::Approx(lc.values[i]).epsilon(1e-9));
        CHECK(lc.band[i] == doctest::Approx(w * (w - std::log(w) - 1.0) / 100.0));
    }
    CHECK(lambda_mse(lc, lc) == 0.0);
    CHECK_THROWS_AS(lambda_map(e, {0.5, 0.4}), Error);
    CHECK_THROWS_AS(lambda_map(e, {0.0, 0.4}), Error);
}

TEST_CASE("lambda variance and mse") {
    CHECK(lambda_variance(1.0, 10) == 0.0);
    CHECK(lambda_variance(0.5, 1) == doctest::Approx(0.5 * (0.5 + std::log(2.0) - 1.0)));
    CHECK_THROWS_AS(lambda_variance(0.5, 0), Error);
    CHECK_THROWS_AS(lambda_variance(1.5, 3), Error);
    LambdaCurve a{{0.2, 0.4}, {-0.1, -0.2}, {}};
    LambdaCurve b{{0.2, 0.4}, {-0.2, -0.4}, {}};
    CHECK(lambda_mse(a, b) == doctest::Approx((0.01 + 0.04) / 2.0));
    LambdaCurve c{{0.2, 0.5}, {-0.1, -0.2}, {}};
    CHECK_THROWS_AS(lambda_mse(a, c), Error);
}

TEST_CASE("lambda csv round trip") {
    ExpGenerator e;
    auto curve = lambda_map(e, default_lambda_grid(), 50);
    std::stringstream ss;
    write_lambda_csv(ss, curve, {"note"});
    CHECK(ss.str().rfind("# note", 0) == 0);
    CsvTable t = read_csv(ss);
    REQUIRE(t.values.rows() == 99);
    CHECK(t.columns == std::vector<std::string>{"w", "lambda", "band_variance_approx"});
    for (Eigen::Index i = 0; i < 99; ++i) {
        CHECK(t.values(i, 0) == curve.grid[static_cast<std::size_t>(i)]);
        CHECK(t.values(i, 1) == curve.values[static_cast<std::size_t>(i)]);
    }
}
