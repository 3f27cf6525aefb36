#include "archimax/random.hpp"

#include <cmath>

namespace archimax {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(derive_seed(seed, stream)); }

double uniform_open(Rng& rng) {
    // 53 random bits mapped to the centre of each dyadic cell.
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(Rng& rng) {
    std::normal_distribution<double> dist;
    return dist(rng);
}

Matrix standard_normal_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
    return m;
}

std::vector<double> uniform_simplex(std::size_t d, Rng& rng) {
    std::vector<double> x(d);
    double total = 0.0;
    for (auto& v : x) {
        v = -std::log(uniform_open(rng));
        total += v;
    }
    for (auto& v : x) v /= total;
    return x;
}

Matrix uniform_simplex_matrix(std::size_t count, std::size_t d, Rng& rng) {
    Matrix m(count, d);
    for (std::size_t i = 0; i < count; ++i) {
        auto x = uniform_simplex(d, rng);
        for (std::size_t j = 0; j < d; ++j) m(i, j) = x[j];
    }
    return m;
}

std::vector<double> dirichlet(const std::vector<double>& alpha, Rng& rng) {
    std::vector<double> x(alpha.size());
    double total = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        std::gamma_distribution<double> dist(alpha[j], 1.0);
        x[j] = dist(rng);
        total += x[j];
    }
    for (auto& v : x) v /= total;
    return x;
}

}  // namespace archimax
