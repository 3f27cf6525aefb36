#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "archimax/matrix.hpp"

namespace archimax {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer over (seed, stream); distinct streams give
/// statistically independent generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Uniform on the open interval (0, 1).
double uniform_open(Rng& rng);

double standard_normal(Rng& rng);

Matrix standard_normal_matrix(std::size_t rows, std::size_t cols, Rng& rng);

/// Uniform point on the unit simplex via normalized exponentials.
std::vector<double> uniform_simplex(std::size_t d, Rng& rng);

Matrix uniform_simplex_matrix(std::size_t count, std::size_t d, Rng& rng);

/// Dirichlet(alpha) via normalized gamma variates.
std::vector<double> dirichlet(const std::vector<double>& alpha, Rng& rng);

}  // namespace archimax
