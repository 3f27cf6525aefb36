#include <cmath>

#include "doctest.h"

#include "archimax/core.hpp"
#include "archimax/errors.hpp"
#include "archimax/metrics.hpp"
#include "archimax/parametric.hpp"
#include "archimax/random.hpp"
#include "archimax/stdf_infer.hpp"
#include "oracles.hpp"

using namespace archimax;

namespace {

Matrix uniform_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = uniform_open(rng);
    return m;
}

Matrix comonotone_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) m.row(i).setConstant(uniform_open(rng));
    return m;
}

double sum_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

double max_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s = std::max(s, v);
    return s;
}

StdfTrainConfig quick_config(std::uint64_t seed, std::size_t iters) {
    StdfTrainConfig c;
    c.train.seed = seed;
    c.train.max_iters = iters;
    return c;
}

}  // namespace

TEST_CASE("stdf_eval limits and homogeneity") {
    Matrix atom = Matrix::Constant(1, 4, 0.25);
    std::vector<double> x{0.1, 0.7, 0.3, 0.2};
    CHECK(stdf_eval(atom, x) == doctest::Approx(0.7).epsilon(1e-15));
    Matrix vertices = Matrix::Identity(4, 4);
    CHECK(stdf_eval(vertices, x) == doctest::Approx(1.3).epsilon(1e-15));
    Rng rng = make_rng(2);
    Matrix pool = uniform_simplex_matrix(500, 4, rng);
    std::vector<double> x2{0.2, 1.4, 0.6, 0.4};
    CHECK(stdf_eval(pool, x2) == 2.0 * stdf_eval(pool, x));
    std::vector<double> x3{0.3, 2.1, 0.9, 0.6};
    CHECK(stdf_eval(pool, x3) == doctest::Approx(3.0 * stdf_eval(pool, x)).epsilon(1e-14));
    std::vector<double> bad{1.0, 2.0};
    CHECK_THROWS_AS(stdf_eval(pool, bad), Error);
}

TEST_CASE("empirical stdf bounds and convexity hold exactly") {
    Rng rng = make_rng(3);
    for (int rep = 0; rep < 5; ++rep) {
        Matrix noise = standard_normal_matrix(300, 3, rng);
        Matrix w = (3.0 * noise).array().exp().matrix();
        for (Eigen::Index i = 0; i < w.rows(); ++i) w.row(i) /= w.row(i).sum();
        SpectralModel model(w);
        std::vector<double> margins(3);
        for (std::size_t j = 0; j < 3; ++j) {
            std::vector<double> e(3, 0.0);
            e[j] = 1.0;
            margins[j] = model.stdf(e);
        }
        for (int t = 0; t < 50; ++t) {
            std::vector<double> x{3 * uniform_open(rng), uniform_open(rng), 2 * uniform_open(rng)};
            std::vector<double> y{uniform_open(rng), uniform_open(rng), uniform_open(rng)};
            double lo = 0.0, hi = 0.0;
            for (std::size_t j = 0; j < 3; ++j) {
                lo = std::max(lo, x[j] * margins[j]);
                hi += x[j] * margins[j];
            }
            const double lx = model.stdf(x);
            CHECK(lx >= lo * (1 - 1e-14));
            CHECK(lx <= hi * (1 + 1e-14));
            const double s = uniform_open(rng);
            std::vector<double> mix(3);
            for (std::size_t j = 0; j < 3; ++j) mix[j] = s * x[j] + (1 - s) * y[j];
            CHECK(model.stdf(mix) <= s * lx + (1 - s) * model.stdf(y) + 1e-14);
        }
    }
}

TEST_CASE("spectral model constructors") {
    Matrix off(1, 2);
    off << 0.2, 0.3;
    CHECK_THROWS_AS(SpectralModel{off}, Error);
    nn::GenerativeNet net(default_spectral_architecture(3), 4);
    SpectralModel m(net, 100, 9);
    CHECK(m.d() == 3);
    CHECK(m.eval_samples() == 100);
    CHECK(m.pool() == net.sample(100, 9));
    Matrix pool = Matrix::Identity(3, 3);
    SpectralModel p(pool);
    Matrix draws = p.sample(30, 1);
    CHECK(draws.rows() == 30);
    CHECK(draws == p.sample(30, 1));
}

TEST_CASE("xi transform") {
    ExpGenerator e;
    std::vector<double> u{std::exp(-1.0), std::exp(-2.0)}, x{0.5, 0.5};
    CHECK(xi_transform(u, x, e) == doctest::Approx(2.0));
    std::vector<double> u1{1.0, 0.3};
    CHECK(xi_transform(u1, x, e) == 0.0);
    std::vector<double> ej{0.0, 1.0};
    CHECK(xi_transform(u, ej, e) == doctest::Approx(2.0));
    std::vector<double> zero{0.0, 0.0};
    CHECK_THROWS_AS(xi_transform(u, zero, e), Error);
    ParametricGenerator clayton({Family::Clayton, 2.0});
    std::vector<double> v{0.5, 0.2}, y{0.25, 0.75};
    CHECK(xi_transform(v, y, clayton) ==
          doctest::Approx(std::min(clayton.inverse(0.5) / 0.25, clayton.inverse(0.2) / 0.75)));

    PseudoObservations pu = rank_normalize(DataMatrix(uniform_matrix(20, 2, 5)));
    Matrix dirs(2, 2);
    dirs << 0.3, 0.7, 1.0, 0.0;
    auto samples = xi_samples(pu, dirs, e);
    CHECK(samples.size() == 40);
    for (const auto& s : samples) {
        CHECK(s.value >= 0.0);
        CHECK(s.value == doctest::Approx(xi_transform(pu.row(s.row), s.direction, e)));
    }
}

TEST_CASE("xi log-likelihood") {
    ExpGenerator e;
    CHECK(xi_loglik(2.0, 1.0, e) == doctest::Approx(-2.0));
    CHECK(xi_loglik(0.7, 1.8, e) == doctest::Approx(std::log(1.8) - 1.8 * 0.7));
    CHECK(xi_loglik(0.0, 1.5, e) == doctest::Approx(std::log(1.5)));
    Matrix pool = Matrix::Identity(2, 2);
    SpectralModel ind(pool);
    std::vector<double> x{0.5, 0.5};
    CHECK(xi_loglik(2.0, x, e, ind) == doctest::Approx(-2.0));

    // Beyond the support of a bounded generator the density vanishes.
    ParametricGenerator clayton({Family::Clayton, 2.0});
    LoglikStats stats;
    CHECK(xi_loglik(1.0, 1.0, clayton, &stats) == doctest::Approx(std::log(-clayton.d1(1.0))));
    CHECK(stats.clipped == 0);
    struct Bounded final : Generator {
        double value(double x) const override { return x < 1 ? (1 - x) * (1 - x) : 0.0; }
        double d1(double x) const override { return x < 1 ? -2 * (1 - x) : 0.0; }
        double d2(double x) const override { return x < 1 ? 2.0 : 0.0; }
        double inverse(double w) const override { return 1 - std::sqrt(w); }
        std::string describe() const override { return "bounded"; }
    } bounded;
    CHECK(xi_loglik(3.0, 1.0, bounded, &stats) == kLoglikFloor);
    CHECK(stats.clipped == 1);
}

TEST_CASE("moment penalty") {
    CHECK(moment_penalty(Matrix::Constant(5, 4, 0.25)) == doctest::Approx(0.0));
    Matrix e1 = Matrix::Zero(3, 4);
    e1.col(0).setOnes();
    CHECK(moment_penalty(e1) == doctest::Approx(0.75 * 0.75 + 3 * 0.0625));
    Rng rng = make_rng(6);
    Matrix w = uniform_simplex_matrix(10, 3, rng);
    Matrix perm(20, 3);
    perm.topRows(10) = w;
    perm.bottomRows(10) << w.col(1), w.col(0), w.col(2);
    Matrix swapped(20, 3);
    swapped << perm.col(1), perm.col(0), perm.col(2);
    CHECK(moment_penalty(perm) == doctest::Approx(moment_penalty(swapped)).epsilon(1e-14));
}

TEST_CASE("stdf batch loss gradient matches finite differences through the net") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const std::size_t d = 3, l = 16, m = 4, b = 10;
        nn::GenerativeNet net(default_spectral_architecture(d), seed);
        Rng rng = make_rng(seed, 77);
        Matrix dirs = uniform_simplex_matrix(m, d, rng);
        Matrix xi(b, m);
        for (Eigen::Index i = 0; i < xi.rows(); ++i)
            for (Eigen::Index k = 0; k < xi.cols(); ++k) xi(i, k) = -std::log(uniform_open(rng));
        xi(0, 0) = 0.0;
        for (auto g : {ArchGenerator{Family::Frank, 1.86}, ArchGenerator{Family::Joe, 2.86}}) {
            ParametricGenerator phi(g);
            nn::SampleLoss loss = [&](const Matrix& w, Matrix& grad) {
                StdfBatchLoss bl = stdf_batch_loss(w, dirs, xi, phi, 1.0);
                grad = bl.grad_w;
                return bl.loss;
            };
            Matrix noise = standard_normal_matrix(l, d, rng);
            auto analytic = nn::backward(net, noise, loss).gradient;
            nn::GenerativeNet probe = net;
            std::size_t ok = 0;
            double scale = 0.0;
            for (double v : analytic) scale = std::max(scale, std::abs(v));
            for (std::size_t p = 0; p < analytic.size(); ++p) {
                const double saved = probe.parameters()[p];
                auto eval = [&](double v) {
                    probe.parameters()[p] = v;
                    Matrix s = probe.forward(noise, nn::Mode::Training);
                    Matrix g2 = Matrix::Zero(s.rows(), s.cols());
                    return loss(s, g2);
                };
                const double fd = (eval(saved + 1e-6) - eval(saved - 1e-6)) / 2e-6;
                probe.parameters()[p] = saved;
                const double denom = std::max({std::abs(fd), std::abs(analytic[p]), 1e-3 * scale});
                ok += std::abs(fd - analytic[p]) / denom < 1e-4;
            }
            CHECK(static_cast<double>(ok) >= 0.95 * static_cast<double>(analytic.size()));
        }
    }
}

TEST_CASE("stdf batch loss counts zero xi and clipping") {
    Matrix w = Matrix::Constant(4, 2, 0.5);
    Matrix dirs(1, 2);
    dirs << 0.5, 0.5;
    Matrix xi(3, 1);
    xi << 0.0, 1.0, 2.0;
    ExpGenerator e;
    StdfBatchLoss bl = stdf_batch_loss(w, dirs, xi, e, 0.0);
    CHECK(bl.used == 2);
    CHECK(bl.zero_xi == 1);
    // l = 2 * mean max(0.25, 0.25) = 0.5
    CHECK(bl.nll == doctest::Approx(-(std::log(0.5) - 0.5 + std::log(0.5) - 1.0) / 2));
}

TEST_CASE("zero iterations return the initialized model") {
    PseudoObservations u = rank_normalize(DataMatrix(uniform_matrix(50, 3, 7)));
    ExpGenerator e;
    StdfTrainConfig cfg = quick_config(11, 0);
    StdfTrace trace;
    SpectralModel m = train_stdf(u, e, cfg, nullptr, &trace);
    CHECK(trace.iterations == 0);
    nn::GenerativeNet init(default_spectral_architecture(3), derive_seed(11, 1));
    CHECK(m.net().parameters() == init.parameters());
    SpectralModel again = train_stdf(u, e, cfg, &m);
    CHECK(again.net().parameters() == m.net().parameters());
}

TEST_CASE("train_stdf recovers independence and comonotone limits") {
    ExpGenerator e;
    const std::size_t d = 3;
    PseudoObservations ind = rank_normalize(DataMatrix(uniform_matrix(2000, d, 8)));
    StdfTrace trace;
    SpectralModel fi = train_stdf(ind, e, quick_config(12, 2000), nullptr, &trace);
    CHECK(trace.iterations == 2000);
    auto r = irae(sum_of, [&](std::span<const double> x) { return fi.stdf(x); }, d, 10000, 1);
    MESSAGE("independence IRAE " << r.value);
    CHECK(r.value < 0.05);
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(std::abs(fi.pool().col(j).mean() - 1.0 / d) < 0.02);

    PseudoObservations como = rank_normalize(DataMatrix(comonotone_matrix(2000, d, 9)));
    SpectralModel fc = train_stdf(como, e, quick_config(13, 2000));
    auto rc = irae(max_of, [&](std::span<const double> x) { return fc.stdf(x); }, d, 10000, 1);
    MESSAGE("comonotone IRAE " << rc.value);
    CHECK(rc.value < 0.05);
}

TEST_CASE("moment means after EV training on NSD data") {
    NsdParams nsd{{1, 2, 4}, 0.69};
    const std::size_t d = 3;
    auto spectral = [&](std::size_t count, std::uint64_t seed) { return nsd_spectral_sample(nsd, count, seed); };
    PseudoObservations u = rank_normalize(DataMatrix(oracle::max_stable_copula(spectral, d, 2000, 21)));
    ExpGenerator e;
    StdfTrainConfig cfg = quick_config(14, 2000);
    SpectralModel fit = train_stdf(u, e, cfg);
    CHECK(fit.eval_samples() == 10000);
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(std::abs(fit.pool().col(j).mean() - 1.0 / d) < 0.02);
}

TEST_CASE("baseline estimators") {
    PseudoObservations ind = rank_normalize(DataMatrix(uniform_matrix(5000, 2, 15)));
    ExpGenerator e;
    std::vector<double> e1{1.0, 0.0};
    CHECK(std::abs(pickands_estimate(ind, e1, e).value - 1.0) < 0.1);
    CHECK(std::abs(cfg_estimate(ind, e1).value - 1.0) < 0.1);
    PseudoObservations como = rank_normalize(DataMatrix(comonotone_matrix(5000, 2, 16)));
    std::vector<double> half{0.5, 0.5};
    CHECK(std::abs(pickands_estimate(como, half, e).value - 0.5) < 0.05);
    CHECK(std::abs(cfg_estimate(como, half).value - 0.5) < 0.05);

    Matrix raw = uniform_matrix(300, 3, 17);
    PseudoObservations u = rank_normalize(DataMatrix(raw));
    Rng rng = make_rng(18);
    for (int t = 0; t < 10; ++t) {
        auto x = uniform_simplex(3, rng);
        auto cfg = cfg_estimate(u, x);
        auto mod = cfg_modified_estimate(u, x, e);
        CHECK(std::abs(cfg.value - mod.value) <= 1e-12 * cfg.value);
        CHECK(cfg.excluded == mod.excluded);

        // Direct evaluation of the two sums over the positive xi.
        std::vector<double> xs;
        for (std::size_t i = 0; i < u.n(); ++i) {
            const double v = xi_transform(u.row(i), x, e);
            if (v > 0) xs.push_back(v);
        }
        const double n = static_cast<double>(xs.size());
        double num = 0, den = 0, lhs = 0, rhs = 0;
        for (std::size_t i = 1; i <= xs.size(); ++i) {
            num += -std::log(i / (n + 1));
            lhs += std::log(-std::log(i / (n + 1)));
        }
        for (double v : xs) {
            den += v;
            rhs += std::log(v);
        }
        CHECK(pickands_estimate(u, x, e).value == doctest::Approx(num / den).epsilon(1e-12));
        CHECK(cfg.value == doctest::Approx(std::exp(lhs / n - rhs / n)).epsilon(1e-12));
        CHECK(cfg.excluded == u.n() - xs.size());
    }
    ParametricGenerator clayton({Family::Clayton, 2.0});
    auto x = std::vector<double>{0.3, 0.3, 0.4};
    CHECK(cfg_modified_estimate(u, x, clayton).value > 0.0);
}
