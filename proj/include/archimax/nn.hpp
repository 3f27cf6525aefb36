#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "archimax/matrix.hpp"

namespace archimax::nn {

enum class Head { Simplex, Positive };
enum class Mode { Training, Sampling };

std::string to_string(Head head);
Head head_from_string(const std::string& tag);

struct Architecture {
    std::size_t input_dim = 1;
    std::size_t hidden_width = 10;
    std::size_t output_dim = 1;
    std::size_t hidden_layers = 2;  // affine layers = hidden_layers + 1
    Head head = Head::Positive;
    bool batch_norm = true;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t batch_size = 128;
    std::size_t max_iters = 1000;
    std::uint64_t seed = 0;
    double penalty_weight = 1.0;
    void validate() const;
};

/// Multilayer perceptron mapping standard-normal noise to samples.
///
/// Parameters live in one flat vector, layer by layer: weights (row-major,
/// out x in), bias, then batch-norm gamma and beta for hidden layers.
/// Running batch-norm statistics are kept separately and never trained.
class GenerativeNet {
public:
    struct Cache {
        std::vector<Matrix> inputs;  // input to each affine layer
        std::vector<Matrix> xhat;    // normalized pre-activations (hidden layers)
        std::vector<Matrix> post;    // post-normalization, pre-rectifier values
        std::vector<Vector> inv_std;
        std::vector<Vector> batch_mean;
        std::vector<Vector> batch_var;
        Matrix output;
    };

    GenerativeNet() = default;
    GenerativeNet(const Architecture& arch, std::uint64_t init_seed);

    const Architecture& architecture() const noexcept { return arch_; }
    std::vector<double>& parameters() noexcept { return params_; }
    const std::vector<double>& parameters() const noexcept { return params_; }
    std::vector<double>& running_stats() noexcept { return running_; }
    const std::vector<double>& running_stats() const noexcept { return running_; }
    std::size_t parameter_count() const noexcept { return params_.size(); }

    /// Seeds that produced this net: initialization first, then training runs.
    std::vector<std::uint64_t>& lineage() noexcept { return lineage_; }
    const std::vector<std::uint64_t>& lineage() const noexcept { return lineage_; }

    Matrix noise(std::size_t count, std::uint64_t seed) const;
    Matrix forward(const Matrix& noise, Mode mode) const;
    Matrix sample(std::size_t count, std::uint64_t seed, Mode mode = Mode::Sampling) const;

    /// Training-mode forward pass that records what backward() needs.
    Matrix forward_train(const Matrix& noise, Cache& cache) const;
    /// Gradient of a scalar loss w.r.t. parameters given dLoss/dOutput.
    std::vector<double> backward(const Cache& cache, const Matrix& grad_output) const;
    void update_running_stats(const Cache& cache, double momentum = 0.1);

    void set_zero();

private:
    struct LayerOffsets {
        std::size_t in, out;
        std::size_t w, b, gamma, beta;  // gamma/beta only meaningful for hidden layers
        std::size_t run_mean, run_var;
        bool hidden;
    };

    void layout();

    Architecture arch_;
    std::vector<LayerOffsets> layers_;
    std::vector<double> params_;
    std::vector<double> running_;
    std::vector<std::uint64_t> lineage_;
    double bn_eps_ = 1e-5;
};

/// Loss as a function of the sample matrix; writes dLoss/dSamples into grad.
using SampleLoss = std::function<double(const Matrix& samples, Matrix& grad)>;

struct LossGradient {
    double loss;
    std::vector<double> gradient;
    GenerativeNet::Cache cache;
};

/// Training-mode forward on `noise`, loss evaluation and reverse pass.
/// Throws a training-divergence error if the loss is not finite.
LossGradient backward(const GenerativeNet& net, const Matrix& noise, const SampleLoss& loss);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t t = 0;
};

void adam_step(std::vector<double>& params, const std::vector<double>& gradient,
               const TrainConfig& config, AdamState& state);
void adam_step(GenerativeNet& net, const std::vector<double>& gradient, const TrainConfig& config,
               AdamState& state);

/// Central finite differences of the training-mode loss on fixed noise.
std::vector<double> finite_difference_gradient(const GenerativeNet& net, const Matrix& noise,
                                               const SampleLoss& loss, double step = 1e-5);

}  // namespace archimax::nn
