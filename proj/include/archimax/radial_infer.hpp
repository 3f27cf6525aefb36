#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "archimax/core.hpp"
#include "archimax/generator.hpp"
#include "archimax/nn.hpp"

namespace archimax {

/// Empirical Williamson d-transform mean_k (1 - x/r_k)_+^{d-1}.
double williamson(std::span<const double> r, double x, std::size_t d);
/// First derivative in x of williamson.
double williamson_deriv(std::span<const double> r, double x, std::size_t d);

/// Solves phi(x) = w for a continuous non-increasing phi with phi(0) = 1.
/// Newton steps from `hint` (using `dphi` when given), bisection whenever a step
/// leaves the bracket. Throws a numeric error if no bracket is found.
double phi_inverse_numeric(const std::function<double(double)>& phi, double w, double hint = 1.0,
                           const std::function<double(double)>& dphi = {});

/// Williamson transform of a weighted finite support, as a Generator.
class WilliamsonGenerator final : public Generator {
public:
    WilliamsonGenerator() = default;
    /// Empty `probs` means equal weights.
    WilliamsonGenerator(std::vector<double> support, std::vector<double> probs, std::size_t d);

    double value(double x) const override;
    double d1(double x) const override;
    double d2(double x) const override;
    /// At w = 0 returns the right end of the support.
    double inverse(double w) const override;
    std::string describe() const override;

    std::size_t d() const noexcept { return d_; }
    const std::vector<double>& support() const noexcept { return r_; }
    const std::vector<double>& probs() const noexcept { return p_; }
    double support_max() const noexcept { return r_.empty() ? 0.0 : r_.back(); }
    double mean() const;

private:
    double eval(double x, int order) const;

    std::vector<double> r_;  // increasing
    std::vector<double> p_;
    std::size_t d_ = 2;
    std::vector<double> tail_power_sums_;  // [q * (size + 1) + k] = sum_{i >= k} p_i r_i^{-q}
};

/// Radial law R given by a generative net with positive head, frozen into a
/// pool of evaluation samples.
class RadialModel {
public:
    RadialModel() = default;
    RadialModel(nn::GenerativeNet net, std::size_t d, std::size_t eval_samples, std::uint64_t pool_seed);

    const nn::GenerativeNet& net() const noexcept { return net_; }
    nn::GenerativeNet& net() noexcept { return net_; }
    std::size_t d() const noexcept { return d_; }
    std::size_t eval_samples() const noexcept { return eval_samples_; }
    std::uint64_t pool_seed() const noexcept { return pool_seed_; }

    /// Sampling-mode draws.
    std::vector<double> sample(std::size_t count, std::uint64_t seed) const;
    /// Generator of the frozen evaluation pool.
    const WilliamsonGenerator& generator() const noexcept { return generator_; }
    /// Redraws the evaluation pool, e.g. after training.
    void refreeze(std::uint64_t pool_seed);

private:
    nn::GenerativeNet net_;
    std::size_t d_ = 2;
    std::size_t eval_samples_ = 5000;
    std::uint64_t pool_seed_ = 0;
    WilliamsonGenerator generator_;
};

/// Architecture defaults for the radial net: 1 -> 10 -> 10 -> 1, exponential head.
nn::Architecture default_radial_architecture();

struct GeneratorTrainConfig {
    nn::TrainConfig train{.learning_rate = 1e-3, .max_iters = 3000};
    std::size_t n_r = 100;
    std::size_t n_z = 80;
    double tolerance = 1e-6;       // stop once the Kendall MSE falls below this
    std::size_t z_pool_factor = 10;  // Z pool size per resampling event, in units of n_z
    bool anneal_z = true;          // resample every 16, 8, 4, 2, 1 steps over fifths of the run
    double mean_weight = 1e-3;     // weight of the (mean R - 1)^2 regularizer
    std::size_t hidden_width = 10;
    std::size_t eval_samples = 5000;
};

struct GeneratorTrace {
    std::vector<double> loss;
    std::vector<double> mse;
    double final_mse = 0.0;
    double final_mean_r = 0.0;
    std::size_t iterations = 0;
};

/// Fits G_R to sorted-decreasing equispaced Kendall values. `z_source` holds
/// draws of Z = l(S); each resampling event takes z_pool_factor * n_z of them
/// and keeps n_z midpoint quantiles. A single value {1} encodes Z = 1.
RadialModel train_generator(const std::vector<double>& kendall_w, const std::vector<double>& z_source,
                            std::size_t d, const GeneratorTrainConfig& config,
                            const RadialModel* warm_start = nullptr, GeneratorTrace* trace = nullptr);

/// Objective of train_generator for fixed R and Z pools (no regularizer).
double kendall_residual(const std::vector<double>& kendall_w, std::vector<double> r, const std::vector<double>& z,
                        std::size_t d);

struct KendallLoss {
    double loss = 0.0;  // mse + mean_weight * (mean_r - 1)^2
    double mse = 0.0;
    double mean_r = 0.0;
    std::vector<double> grad_r;
};

/// Training objective of train_generator for fixed R and Z pools, with its
/// gradient in each r_j.
KendallLoss kendall_loss(const std::vector<double>& kendall_w, const std::vector<double>& r,
                         const std::vector<double>& z, std::size_t d, double mean_weight = 1.0);

struct FiniteRadial {
    std::vector<double> support;  // increasing, last element 1
    std::vector<double> probs;
    std::vector<double> ratios;   // support[j] = support[j+1] * ratios[j]

    WilliamsonGenerator generator(std::size_t d) const { return WilliamsonGenerator(support, probs, d); }
};

/// Support from ratios with r_last = 1.
std::vector<double> support_from_ratios(const std::vector<double>& ratios);

struct ZSupport {
    std::vector<double> z;
    std::vector<double> p;  // empty means equal weights
};

/// Products r_j z_l sorted increasing, with ties (relative 1e-12) merged.
struct ZTSupport {
    std::vector<double> t;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> members;  // (r index, z index) per t
};

ZTSupport product_support(const std::vector<double>& r, const std::vector<double>& z);

struct ReconstructConfig {
    std::optional<std::vector<double>> initial_ratios;  // default 0.9 each
    double epsilon = 1e-4;
    std::size_t max_iters = 200;
    double ratio_lower = 0.01;
    double ratio_upper = 1.0;
};

struct ReconstructTrace {
    std::vector<double> mse;
    std::size_t iterations = 0;
    bool rank_matched = false;  // product count equalled the Kendall atom count on the last pass
};

/// Alternating reconstruction of a finite radial law from Kendall atoms.
/// When the merged products number exactly as many as the Kendall atoms they
/// are paired rank to rank; otherwise each product group is matched to the
/// Kendall atom holding the midpoint of its cumulative mass.
FiniteRadial reconstruct_finite(const KendallSample& kendall, const ZSupport& z, std::size_t n_r, std::size_t d,
                                const ReconstructConfig& config = {}, ReconstructTrace* trace = nullptr);

struct SupportSizes {
    std::size_t n_r;
    std::size_t n_z;
};

SupportSizes choose_supports(std::size_t n, std::optional<std::size_t> n_r = std::nullopt,
                             std::optional<std::size_t> n_z = std::nullopt);

}  // namespace archimax
