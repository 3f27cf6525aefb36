#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "archimax/matrix.hpp"

namespace oracle {

using archimax::Matrix;

/// sup |F_n - F| of `sample` against the continuous CDF `cdf`.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// Asymptotic Kolmogorov p-value with the small-sample correction of Stephens.
double ks_pvalue(double statistic, std::size_t n);

/// Erlang(d, 1) CDF.
double erlang_cdf(std::size_t d, double r);
/// Beta(1, d-1) CDF.
double beta1_cdf(std::size_t d, double s);

/// Max-stable copula draws with stdf d * E[max_j x_j W_j], built from the
/// Poisson representation with spectral draws from `spectral`.
Matrix max_stable_copula(const std::function<Matrix(std::size_t, std::uint64_t)>& spectral, std::size_t d,
                         std::size_t n, std::uint64_t seed);

/// Brute-force empirical copula: (1/n) * #{i : u_i <= q}.
double empirical_copula(const Matrix& u, std::span<const double> q);
/// O(n^2) Kendall tau between two columns.
double kendall_tau(const Matrix& u, std::size_t j, std::size_t k);
/// Central finite difference of f at x along coordinate i.
double central_difference(const std::function<double(std::span<const double>)>& f, std::vector<double> x,
                          std::size_t i, double h);

/// Logistic stdf (sum_j x_j^{1/a})^a.
double logistic_stdf(std::span<const double> x, double a);

/// Median of a copy of `v`.
double median(std::vector<double> v);

}  // namespace oracle
