#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "archimax/matrix.hpp"

namespace archimax {

/// Raw observations, one row per observation. Empty matrices are allowed so
/// that zero-size synthetic requests have a representation; every statistic
/// below rejects them.
class DataMatrix {
public:
    DataMatrix() = default;
    explicit DataMatrix(Matrix values);

    const Matrix& values() const noexcept { return values_; }
    std::size_t n() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t d() const noexcept { return static_cast<std::size_t>(values_.cols()); }

private:
    Matrix values_;
};

/// Rank-normalized observations with entries in (0, 1].
class PseudoObservations {
public:
    PseudoObservations() = default;
    explicit PseudoObservations(Matrix values);

    const Matrix& values() const noexcept { return values_; }
    std::size_t n() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t d() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * d(), d()};
    }

private:
    Matrix values_;
};

struct KendallSample {
    std::vector<double> w;
    std::vector<double> p;
    bool sorted_desc = false;

    std::size_t size() const noexcept { return w.size(); }
    /// Returns a copy sorted non-increasing in w (masses follow their atoms).
    KendallSample sorted_descending() const;
};

PseudoObservations rank_normalize(const DataMatrix& data);

double empirical_copula(const PseudoObservations& u, std::span<const double> query);

/// Evaluates the empirical copula at every row of `queries`.
std::vector<double> empirical_copula_batch(const Matrix& u, const Matrix& queries);

KendallSample empirical_kendall(const PseudoObservations& u);

std::vector<double> equispace_kendall(const KendallSample& k, std::size_t n_r, std::size_t n_z);

DataMatrix block_maxima(const DataMatrix& data, std::size_t k);

double ev_dependence_stat(const PseudoObservations& u, unsigned r, std::size_t mc,
                          std::uint64_t seed);

struct BlockSearchStep {
    std::size_t k;
    double statistic;
    double threshold;
};

struct BlockSearchResult {
    std::size_t k = 0;
    bool warning = false;
    std::vector<BlockSearchStep> trace;
};

struct BlockSearchOptions {
    std::size_t mc = 2000;
    std::uint64_t seed = 0;
    std::size_t min_blocks = 10;
};

/// Largest-first scan over the divisors k of n (k >= min_blocks).
BlockSearchResult select_block_size(const DataMatrix& data, const std::vector<unsigned>& r_set,
                                    double threshold, const BlockSearchOptions& options = {});

/// Same scan with a threshold that depends on the number of blocks.
BlockSearchResult select_block_size(const DataMatrix& data, const std::vector<unsigned>& r_set,
                                    const std::function<double(std::size_t)>& threshold,
                                    const BlockSearchOptions& options = {});

/// 95th-percentile (by default) of max_r ev_dependence_stat over `replicates`
/// independent-uniform samples of size n in dimension d.
double calibrate_ev_threshold(std::size_t n, std::size_t d, const std::vector<unsigned>& r_set,
                              std::size_t mc, std::size_t replicates, std::uint64_t seed,
                              double quantile = 0.95);

double kendall_tau(const PseudoObservations& u, std::size_t j, std::size_t k);

}  // namespace archimax
