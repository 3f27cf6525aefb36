#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace oracle {

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_pvalue(double statistic, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double t = (sn + 0.12 + 0.11 / sn) * statistic;
    if (t < 0.2) return 1.0;
    double acc = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * t * t);
        acc += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * acc, 0.0, 1.0);
}

double erlang_cdf(std::size_t d, double r) {
    if (r <= 0.0) return 0.0;
    double term = 1.0, acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        acc += term;
        term *= r / static_cast<double>(k + 1);
    }
    return 1.0 - std::exp(-r) * acc;
}

double beta1_cdf(std::size_t d, double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return 1.0 - std::pow(1.0 - s, static_cast<double>(d - 1));
}

Matrix max_stable_copula(const std::function<Matrix(std::size_t, std::uint64_t)>& spectral, std::size_t d,
                         std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::exponential_distribution<double> expo(1.0);
    Matrix u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    constexpr std::size_t kBatch = 64;
    std::uint64_t batch_seed = seed * 0x9e3779b97f4a7c15ULL + 1;
    Matrix w;
    std::size_t next = kBatch;
    auto draw = [&]() -> std::span<const double> {
        if (next == kBatch) {
            w = spectral(kBatch, batch_seed++);
            next = 0;
        }
        return {w.data() + (next++) * d, d};
    };
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> z(d, 0.0);
        double gamma = 0.0;
        while (true) {
            gamma += expo(gen);
            const double scale = static_cast<double>(d) / gamma;
            const double zmin = *std::min_element(z.begin(), z.end());
            if (scale <= zmin) break;
            auto row = draw();
            for (std::size_t j = 0; j < d; ++j) z[j] = std::max(z[j], scale * row[j]);
        }
        for (std::size_t j = 0; j < d; ++j)
            u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(-1.0 / z[j]);
    }
    return u;
}

double empirical_copula(const Matrix& u, std::span<const double> q) {
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        bool below = true;
        for (Eigen::Index j = 0; j < u.cols(); ++j) below = below && u(i, j) <= q[static_cast<std::size_t>(j)];
        count += below;
    }
    return static_cast<double>(count) / static_cast<double>(u.rows());
}

double kendall_tau(const Matrix& u, std::size_t j, std::size_t k) {
    const auto n = u.rows();
    const auto cj = static_cast<Eigen::Index>(j), ck = static_cast<Eigen::Index>(k);
    double acc = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const double s = (u(a, cj) - u(b, cj)) * (u(a, ck) - u(b, ck));
            acc += (s > 0) - (s < 0);
        }
    return 2.0 * acc / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double central_difference(const std::function<double(std::span<const double>)>& f, std::vector<double> x,
                          std::size_t i, double h) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    return (fp - fm) / (2.0 * h);
}

double logistic_stdf(std::span<const double> x, double a) {
    double acc = 0.0;
    for (double v : x) acc += std::pow(v, 1.0 / a);
    return std::pow(acc, a);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace oracle
