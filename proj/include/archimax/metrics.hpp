#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "archimax/generator.hpp"
#include "archimax/matrix.hpp"

namespace archimax {

/// Monte Carlo L2 distance between the empirical copulas of two sample sets,
/// each rank-normalized first.
double cvm(const Matrix& a, const Matrix& b, std::size_t mc = 10000, std::uint64_t seed = 0);

using StdfFunction = std::function<double(std::span<const double>)>;

struct IraeResult {
    double value;
    std::size_t excluded;  // simplex points with l_true = 0
};

/// Mean of |l - l_est| / l over uniform simplex points.
IraeResult irae(const StdfFunction& truth, const StdfFunction& estimate, std::size_t d, std::size_t mc = 10000,
                std::uint64_t seed = 0);

struct LambdaCurve {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> band;  // approximate variance per point; empty without n
};

/// 99 equispaced points 0.01, ..., 0.99.
std::vector<double> default_lambda_grid();

/// lambda(w) = phi'(phi^{-1}(w)) * phi^{-1}(w); when n > 0 the band holds
/// lambda_variance(w, n).
LambdaCurve lambda_map(const Generator& phi, const std::vector<double>& grid, std::size_t n = 0);

/// w (w - log w - 1) / n.
double lambda_variance(double w, std::size_t n);

double lambda_mse(const LambdaCurve& estimate, const LambdaCurve& truth);

void write_lambda_csv(std::ostream& out, const LambdaCurve& curve, const std::vector<std::string>& comments = {});

}  // namespace archimax
