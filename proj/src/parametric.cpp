#include "archimax/parametric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "archimax/errors.hpp"
#include "archimax/random.hpp"

namespace archimax {

double ExpGenerator::value(double x) const { return std::exp(-x); }
double ExpGenerator::d1(double x) const { return -std::exp(-x); }
double ExpGenerator::d2(double x) const { return std::exp(-x); }
double ExpGenerator::inverse(double w) const {
    return w <= 0.0 ? std::numeric_limits<double>::infinity() : -std::log(w);
}

ScaledGenerator::ScaledGenerator(std::shared_ptr<const Generator> base, double scale)
    : base_(std::move(base)), c_(scale) {
    if (!base_) throw_invalid("ScaledGenerator requires a base generator");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw_invalid("ScaledGenerator requires a positive scale");
}

std::string ScaledGenerator::describe() const { return base_->describe() + " scaled by " + std::to_string(c_); }

double generator_consistency(const Generator& phi, double scale) {
    double worst = 0.0;
    for (double t : {0.1, 0.3, 0.7, 1.2, 2.0}) {
        double x = t * scale, h = 1e-5 * scale;
        double fd = (phi.value(x + h) - phi.value(x - h)) / (2.0 * h);
        double an = phi.d1(x);
        double denom = std::max({std::abs(an), std::abs(fd), 1e-12});
        worst = std::max(worst, std::abs(fd - an) / denom);
    }
    return worst;
}

std::string to_string(Family family) {
    switch (family) {
        case Family::Clayton: return "clayton";
        case Family::Frank: return "frank";
        case Family::Joe: return "joe";
        case Family::Gumbel: return "gumbel";
    }
    return "unknown";
}

Family family_from_string(const std::string& name) {
    if (name == "clayton") return Family::Clayton;
    if (name == "frank") return Family::Frank;
    if (name == "joe") return Family::Joe;
    if (name == "gumbel") return Family::Gumbel;
    throw_invalid("unknown generator family '" + name + "'");
}

void ArchGenerator::validate() const {
    bool ok = std::isfinite(theta);
    switch (family) {
        case Family::Clayton: ok = ok && theta > 0.0; break;
        case Family::Frank: ok = ok && theta != 0.0; break;
        case Family::Joe:
        case Family::Gumbel: ok = ok && theta >= 1.0; break;
    }
    if (!ok) throw_invalid("theta out of range for " + to_string(family));
}

double phi(const ArchGenerator& g, double x) {
    g.validate();
    if (x < 0.0) throw_invalid("phi requires x >= 0");
    const double t = g.theta;
    switch (g.family) {
        case Family::Clayton: return std::pow(1.0 + x, -1.0 / t);
        case Family::Frank: {
            double q = -std::expm1(-t) * std::exp(-x);
            return -std::log1p(-q) / t;
        }
        case Family::Joe: return 1.0 - std::pow(-std::expm1(-x), 1.0 / t);
        case Family::Gumbel: return std::exp(-std::pow(x, 1.0 / t));
    }
    return 0.0;
}

double phi_inverse(const ArchGenerator& g, double w) {
    g.validate();
    if (!(w >= 0.0 && w <= 1.0)) throw_invalid("phi_inverse requires w in [0,1]");
    if (w == 0.0) return std::numeric_limits<double>::infinity();
    if (w == 1.0) return 0.0;
    const double t = g.theta;
    switch (g.family) {
        case Family::Clayton: return std::expm1(-t * std::log(w));
        case Family::Frank: return -std::log(std::expm1(-t * w) / std::expm1(-t));
        case Family::Joe: return -std::log1p(-std::pow(1.0 - w, t));
        case Family::Gumbel: return std::pow(-std::log(w), t);
    }
    return 0.0;
}

double phi_d1(const ArchGenerator& g, double x) {
    g.validate();
    const double t = g.theta, a = 1.0 / t;
    switch (g.family) {
        case Family::Clayton: return -a * std::pow(1.0 + x, -a - 1.0);
        case Family::Frank: {
            double q = -std::expm1(-t) * std::exp(-x);
            return -(q / (1.0 - q)) / t;
        }
        case Family::Joe: {
            double gx = -std::expm1(-x);
            return -a * std::pow(gx, a - 1.0) * std::exp(-x);
        }
        case Family::Gumbel: {
            if (x == 0.0) return t == 1.0 ? -1.0 : -std::numeric_limits<double>::infinity();
            return -a * std::pow(x, a - 1.0) * std::exp(-std::pow(x, a));
        }
    }
    return 0.0;
}

double phi_d2(const ArchGenerator& g, double x) {
    g.validate();
    const double t = g.theta, a = 1.0 / t;
    switch (g.family) {
        case Family::Clayton: return a * (a + 1.0) * std::pow(1.0 + x, -a - 2.0);
        case Family::Frank: {
            double q = -std::expm1(-t) * std::exp(-x);
            return q / (t * (1.0 - q) * (1.0 - q));
        }
        case Family::Joe: {
            double e = std::exp(-x), gx = -std::expm1(-x);
            if (gx == 0.0) return t == 1.0 ? 1.0 : std::numeric_limits<double>::infinity();
            return a * e * std::pow(gx, a - 2.0) * (gx - (a - 1.0) * e);
        }
        case Family::Gumbel: {
            if (x == 0.0) return t == 1.0 ? 1.0 : std::numeric_limits<double>::infinity();
            double xa = std::pow(x, a);
            return std::exp(-xa) * (a * a * xa * xa / (x * x) - a * (a - 1.0) * xa / (x * x));
        }
    }
    return 0.0;
}

TaylorJet phi_taylor(const ArchGenerator& g, double x, std::size_t order) {
    g.validate();
    if (!(x > 0.0)) throw_invalid("phi_taylor requires x > 0");
    if (order > 32) throw_invalid("phi_taylor order must be <= 32");
    const double t = g.theta;
    TaylorJet v = TaylorJet::variable(x, order);
    TaylorJet out;
    switch (g.family) {
        case Family::Clayton: out = pow(1.0 + v, -1.0 / t); break;
        case Family::Frank: out = log(1.0 - (-std::expm1(-t)) * exp(-v)) * (-1.0 / t); break;
        case Family::Joe: out = 1.0 - pow(1.0 - exp(-v), 1.0 / t); break;
        case Family::Gumbel: out = exp(-pow(v, 1.0 / t)); break;
    }
    for (double c : out.coefficients())
        if (!std::isfinite(c)) throw_numeric("phi_taylor overflow");
    return out;
}

double radial_survival(const ArchGenerator& g, std::size_t d, double r) {
    if (d < 2) throw_invalid("radial law requires d >= 2");
    if (!(r > 0.0)) throw_invalid("radial_cdf requires r > 0");
    if (std::isinf(r)) return 0.0;
    TaylorJet jet = phi_taylor(g, r, d - 1);
    double s = 0.0, rk = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
        s += rk * jet[k];
        rk *= -r;
    }
    return std::clamp(s, 0.0, 1.0);
}

double radial_cdf(const ArchGenerator& g, std::size_t d, double r) {
    return 1.0 - radial_survival(g, d, r);
}

std::vector<double> radial_cdf_grid(const ArchGenerator& g, std::size_t d, const std::vector<double>& grid) {
    std::vector<double> out(grid.size());
    double running = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0 && !(grid[i] > grid[i - 1])) throw_invalid("radial_cdf_grid requires an increasing grid");
        double f = radial_cdf(g, d, grid[i]);
        if (f < running - 1e-8) throw_numeric("radial CDF not monotone: derivative inaccuracy");
        running = std::max(running, f);
        out[i] = running;
    }
    return out;
}

std::vector<double> sample_radial(const ArchGenerator& g, std::size_t d, std::size_t count,
                                  std::uint64_t seed) {
    g.validate();
    Rng rng = make_rng(seed, 0x7261);
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double v = uniform_open(rng);  // target survival probability
        double lo = 0.0, hi = 0.0;
        while (radial_survival(g, d, std::exp(lo)) < v) {
            lo -= 4.0;
            if (lo < -700.0) throw_numeric("sample_radial: lower bracket failure");
        }
        while (radial_survival(g, d, std::exp(hi)) > v) {
            hi += 4.0;
            if (hi > 700.0) throw_numeric("sample_radial: upper bracket failure");
        }
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            double s = radial_survival(g, d, std::exp(mid));
            if (std::abs(s - v) < 1e-10 || hi - lo < 1e-14) {
                lo = hi = mid;
                break;
            }
            if (s > v) lo = mid;
            else hi = mid;
        }
        out[i] = std::exp(0.5 * (lo + hi));
    }
    return out;
}

namespace {

double lambda_value(const ArchGenerator& g, double w) {
    double x = phi_inverse(g, w);
    return phi_d1(g, x) * x;
}

}  // namespace

double tau_from_theta(Family family, double theta) {
    ArchGenerator g{family, theta};
    g.validate();
    switch (family) {
        case Family::Clayton: return theta / (theta + 2.0);
        case Family::Gumbel: return 1.0 - 1.0 / theta;
        default: break;
    }
    auto f = [&](double w) { return lambda_value(g, w); };
    double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 12, 1e-13);
    return 1.0 + 4.0 * integral;
}

double theta_from_tau(Family family, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw_invalid("theta_from_tau requires tau in (0,1)");
    switch (family) {
        case Family::Clayton: return 2.0 * tau / (1.0 - tau);
        case Family::Gumbel: return 1.0 / (1.0 - tau);
        default: break;
    }
    double lo = family == Family::Joe ? 1.0 : 1e-8;
    double hi = 2.0;
    while (tau_from_theta(family, hi) < tau) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw_numeric("theta_from_tau: bracket failure");
    }
    auto f = [&](double th) { return tau_from_theta(family, th) - tau; };
    boost::math::tools::eps_tolerance<double> tol(40);
    std::uintmax_t iters = 200;
    double flo = family == Family::Joe ? -tau : f(lo);
    auto root = boost::math::tools::toms748_solve(f, lo, hi, flo, f(hi), tol, iters);
    return 0.5 * (root.first + root.second);
}

ParametricGenerator::ParametricGenerator(ArchGenerator g) : g_(g) { g_.validate(); }

std::string ParametricGenerator::describe() const {
    return to_string(g_.family) + "(" + std::to_string(g_.theta) + ")";
}

void NsdParams::validate() const {
    if (alpha.size() < 2) throw_invalid("NSD requires dimension >= 2");
    double amin = std::numeric_limits<double>::infinity();
    for (double a : alpha) {
        if (!(a > 0.0) || !std::isfinite(a)) throw_invalid("NSD alpha entries must be positive");
        amin = std::min(amin, a);
    }
    if (!(rho > 0.0 && rho < amin)) throw_invalid("NSD rho must lie in (0, min alpha)");
    if (mc_samples == 0) throw_invalid("NSD mc_samples must be positive");
}

namespace {

std::vector<double> gamma_ratios(const NsdParams& p) {
    std::vector<double> c(p.d());
    for (std::size_t j = 0; j < p.d(); ++j) c[j] = std::exp(std::lgamma(p.alpha[j]) - std::lgamma(p.alpha[j] - p.rho));
    return c;
}

}  // namespace

NsdStdf::NsdStdf(const NsdParams& params, std::uint64_t seed) {
    pool_ = static_cast<double>(params.d()) * nsd_spectral_sample(params, params.mc_samples, derive_seed(seed, 0x6e7364));
}

double NsdStdf::operator()(std::span<const double> x) const {
    if (x.size() != d()) throw_invalid("nsd_stdf: dimension mismatch");
    const std::size_t m = pool_.rows(), dd = d();
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double* v = pool_.data() + k * dd;
        double best = 0.0;
        for (std::size_t j = 0; j < dd; ++j) best = std::max(best, x[j] * v[j]);
        acc += best;
    }
    return acc / static_cast<double>(m);
}

double NsdStdf::standard_error(std::span<const double> x) const {
    const std::size_t m = pool_.rows(), dd = d();
    double s = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double* v = pool_.data() + k * dd;
        double best = 0.0;
        for (std::size_t j = 0; j < dd; ++j) best = std::max(best, x[j] * v[j]);
        s += best;
        s2 += best * best;
    }
    const double mean = s / m;
    return std::sqrt(std::max(0.0, s2 / m - mean * mean) / m);
}

double nsd_stdf(const NsdParams& params, std::span<const double> x, std::uint64_t seed) {
    for (double v : x)
        if (!(v >= 0.0) || !std::isfinite(v)) throw_invalid("nsd_stdf requires finite non-negative x");
    return NsdStdf(params, seed)(x);
}

Matrix nsd_spectral_sample(const NsdParams& params, std::size_t count, std::uint64_t seed) {
    // Size-biasing Dirichlet(alpha) by ||V||_1 gives an equal-weight mixture of
    // Dirichlet(alpha - rho e_i), i = 1..d; sampling the mixture is exact.
    params.validate();
    const std::size_t d = params.d();
    const auto c = gamma_ratios(params);
    Matrix w(count, d);
    Rng rng = make_rng(seed, 0x77);
    std::uniform_int_distribution<std::size_t> pick(0, d - 1);
    std::vector<double> shifted = params.alpha;
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = pick(rng);
        shifted[i] -= params.rho;
        auto dvec = dirichlet(shifted, rng);
        shifted[i] += params.rho;
        double total = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            w(k, j) = c[j] * std::pow(dvec[j], -params.rho);
            total += w(k, j);
        }
        if (!(total > 0.0) || !std::isfinite(total)) throw_numeric("nsd_spectral_sample: degenerate weights");
        w.row(k) /= total;
    }
    return w;
}

}  // namespace archimax
