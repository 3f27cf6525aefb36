#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "archimax/core.hpp"
#include "archimax/generator.hpp"
#include "archimax/nn.hpp"

namespace archimax {

/// (d/l) * sum_k max_j x_j w_kj over the rows of `w`.
double stdf_eval(const Matrix& w, std::span<const double> x);

/// Spectral component W, either a simplex-head net or a fixed pool of
/// simplex points. The stdf is evaluated on a frozen pool of eval_samples
/// draws so that repeated evaluations share random numbers.
class SpectralModel {
public:
    SpectralModel() = default;
    SpectralModel(nn::GenerativeNet net, std::size_t eval_samples, std::uint64_t pool_seed);
    /// Restores a net together with its already-drawn evaluation pool.
    SpectralModel(nn::GenerativeNet net, Matrix pool, std::uint64_t pool_seed);
    explicit SpectralModel(Matrix pool);

    bool has_net() const noexcept { return net_.has_value(); }
    const nn::GenerativeNet& net() const;
    std::size_t d() const noexcept { return static_cast<std::size_t>(pool_.cols()); }
    std::size_t eval_samples() const noexcept { return static_cast<std::size_t>(pool_.rows()); }
    std::uint64_t pool_seed() const noexcept { return pool_seed_; }
    const Matrix& pool() const noexcept { return pool_; }

    /// Fresh draws: sampling-mode net output, or rows resampled from the pool.
    Matrix sample(std::size_t count, std::uint64_t seed) const;
    double stdf(std::span<const double> x) const { return stdf_eval(pool_, x); }

private:
    std::optional<nn::GenerativeNet> net_;
    Matrix pool_;
    std::uint64_t pool_seed_ = 0;
};

double stdf_eval(const SpectralModel& model, std::span<const double> x);

/// Spectral net defaults: d -> 30 -> 30 -> d with softmax head.
nn::Architecture default_spectral_architecture(std::size_t d);

struct XiSample {
    double value;
    std::vector<double> direction;
    std::size_t row;
};

/// min over j with x_j > 0 of phi^{-1}(u_j) / x_j.
double xi_transform(std::span<const double> u, std::span<const double> x, const Generator& phi);
/// Same with a = phi^{-1}(u) precomputed.
double xi_from_inverse(std::span<const double> a, std::span<const double> x);

/// xi for every (row, direction) pair; rows of `directions` are simplex points.
std::vector<XiSample> xi_samples(const PseudoObservations& u, const Matrix& directions, const Generator& phi);

struct LoglikStats {
    std::size_t clipped = 0;
};

constexpr double kLoglikFloor = -1e6;

/// log(-phi'(xi * ell)) + log(ell), floored at kLoglikFloor (counted in stats).
double xi_loglik(double xi, double ell, const Generator& phi, LoglikStats* stats = nullptr);
double xi_loglik(double xi, std::span<const double> x, const Generator& phi, const SpectralModel& model,
                 LoglikStats* stats = nullptr);

/// sum_j (mean_k w_kj - 1/d)^2.
double moment_penalty(const Matrix& w);

struct StdfBatchLoss {
    double loss = 0.0;  // nll + penalty_weight * penalty
    double nll = 0.0;
    double penalty = 0.0;
    std::size_t used = 0;
    std::size_t clipped = 0;
    std::size_t zero_xi = 0;
    Matrix grad_w;  // d loss / d w
};

/// Training objective of train_stdf on one batch: mean negative xi
/// log-likelihood over the positive entries of `xi` (row i, direction k)
/// with the stdf of the pool `w`, plus the weighted moment penalty.
StdfBatchLoss stdf_batch_loss(const Matrix& w, const Matrix& dirs, const Matrix& xi, const Generator& phi,
                              double penalty_weight);

struct StdfTrainConfig {
    nn::TrainConfig train{.learning_rate = 1e-3, .batch_size = 128, .max_iters = 10000};
    std::size_t dirs_per_batch = 8;
    std::size_t train_eval_samples = 128;
    std::size_t eval_samples = 10000;
    std::size_t hidden_width = 30;
};

struct StdfTrace {
    std::vector<double> loss;
    std::vector<double> penalty;
    std::size_t clipped = 0;
    std::size_t zero_xi = 0;
    std::size_t iterations = 0;
};

/// Maximum-likelihood training of the spectral net on xi-transformed data.
SpectralModel train_stdf(const PseudoObservations& u, const Generator& phi, const StdfTrainConfig& config,
                         const SpectralModel* warm_start = nullptr, StdfTrace* trace = nullptr);

struct BaselineEstimate {
    double value;
    std::size_t excluded;  // observations with xi = 0
};

/// Mean-based estimator with endpoint correction, for phi = exp(-x).
BaselineEstimate pickands_estimate(const PseudoObservations& u, std::span<const double> x, const Generator& phi);
BaselineEstimate cfg_estimate(const PseudoObservations& u, std::span<const double> x);
BaselineEstimate cfg_modified_estimate(const PseudoObservations& u, std::span<const double> x, const Generator& phi);

}  // namespace archimax
