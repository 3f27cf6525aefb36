#include "archimax/nn.hpp"

#include <cmath>

#include "archimax/errors.hpp"
#include "archimax/random.hpp"

namespace archimax::nn {

using ConstMap = Eigen::Map<const Matrix>;
using ConstVecMap = Eigen::Map<const RowVector>;

std::string to_string(Head head) { return head == Head::Simplex ? "simplex" : "positive"; }

Head head_from_string(const std::string& tag) {
    if (tag == "simplex") return Head::Simplex;
    if (tag == "positive") return Head::Positive;
    throw_invalid("unknown output head '" + tag + "'");
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw_config("learning_rate must be positive");
    if (batch_size < 1) throw_config("batch_size must be at least 1");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw_config("Adam betas must lie in [0,1)");
    if (!(adam_eps > 0.0)) throw_config("adam_eps must be positive");
    if (!(penalty_weight >= 0.0)) throw_config("penalty_weight must be non-negative");
}

GenerativeNet::GenerativeNet(const Architecture& arch, std::uint64_t init_seed) : arch_(arch) {
    if (arch.input_dim == 0 || arch.output_dim == 0 || arch.hidden_width == 0)
        throw_invalid("network dimensions must be positive");
    layout();
    Rng rng = make_rng(init_seed, 0x6e6e);
    for (const auto& l : layers_) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (std::size_t i = 0; i < l.in * l.out; ++i) params_[l.w + i] = dist(rng);
        for (std::size_t i = 0; i < l.out; ++i) params_[l.b + i] = dist(rng);
        if (l.hidden && arch_.batch_norm) {
            for (std::size_t i = 0; i < l.out; ++i) {
                params_[l.gamma + i] = 1.0;
                params_[l.beta + i] = 0.0;
                running_[l.run_mean + i] = 0.0;
                running_[l.run_var + i] = 1.0;
            }
        }
    }
    lineage_.push_back(init_seed);
}

void GenerativeNet::layout() {
    layers_.clear();
    std::size_t offset = 0, run = 0;
    std::size_t in = arch_.input_dim;
    for (std::size_t k = 0; k <= arch_.hidden_layers; ++k) {
        LayerOffsets l{};
        l.hidden = k < arch_.hidden_layers;
        l.in = in;
        l.out = l.hidden ? arch_.hidden_width : arch_.output_dim;
        l.w = offset;
        offset += l.in * l.out;
        l.b = offset;
        offset += l.out;
        if (l.hidden && arch_.batch_norm) {
            l.gamma = offset;
            offset += l.out;
            l.beta = offset;
            offset += l.out;
            l.run_mean = run;
            run += l.out;
            l.run_var = run;
            run += l.out;
        }
        layers_.push_back(l);
        in = l.out;
    }
    params_.assign(offset, 0.0);
    running_.assign(run, 0.0);
}

void GenerativeNet::set_zero() {
    std::fill(params_.begin(), params_.end(), 0.0);
}

Matrix GenerativeNet::noise(std::size_t count, std::uint64_t seed) const {
    Rng rng = make_rng(seed, 0x6e6f);
    return standard_normal_matrix(count, arch_.input_dim, rng);
}

namespace {

void apply_head(Head head, Matrix& logits) {
    if (head == Head::Positive) {
        logits = logits.array().exp().matrix();
        return;
    }
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        double mx = logits.row(i).maxCoeff();
        logits.row(i) = (logits.row(i).array() - mx).exp().matrix();
        logits.row(i) /= logits.row(i).sum();
    }
}

}  // namespace

Matrix GenerativeNet::forward(const Matrix& noise, Mode mode) const {
    if (mode == Mode::Training) {
        Cache cache;
        return forward_train(noise, cache);
    }
    if (static_cast<std::size_t>(noise.cols()) != arch_.input_dim)
        throw_invalid("noise dimension does not match network input");
    Matrix h = noise;
    for (const auto& l : layers_) {
        ConstMap w(params_.data() + l.w, l.out, l.in);
        ConstVecMap b(params_.data() + l.b, l.out);
        Matrix a = h * w.transpose();
        a.rowwise() += b;
        if (!l.hidden) {
            apply_head(arch_.head, a);
            return a;
        }
        if (arch_.batch_norm) {
            for (std::size_t c = 0; c < l.out; ++c) {
                double inv = 1.0 / std::sqrt(running_[l.run_var + c] + bn_eps_);
                a.col(c) = ((a.col(c).array() - running_[l.run_mean + c]) * inv * params_[l.gamma + c] +
                            params_[l.beta + c])
                               .matrix();
            }
        }
        h = a.cwiseMax(0.0);
    }
    return h;
}

Matrix GenerativeNet::sample(std::size_t count, std::uint64_t seed, Mode mode) const {
    return forward(noise(count, seed), mode);
}

Matrix GenerativeNet::forward_train(const Matrix& noise, Cache& cache) const {
    if (static_cast<std::size_t>(noise.cols()) != arch_.input_dim)
        throw_invalid("noise dimension does not match network input");
    const auto n = static_cast<double>(noise.rows());
    cache = Cache{};
    Matrix h = noise;
    for (const auto& l : layers_) {
        cache.inputs.push_back(h);
        ConstMap w(params_.data() + l.w, l.out, l.in);
        ConstVecMap b(params_.data() + l.b, l.out);
        Matrix a = h * w.transpose();
        a.rowwise() += b;
        if (!l.hidden) {
            apply_head(arch_.head, a);
            cache.output = a;
            return a;
        }
        if (arch_.batch_norm) {
            Vector mean = a.colwise().mean().transpose();
            Vector var(l.out), inv(l.out);
            Matrix xhat(a.rows(), l.out);
            for (std::size_t c = 0; c < l.out; ++c) {
                auto centered = a.col(c).array() - mean(c);
                var(c) = centered.square().sum() / n;
                inv(c) = 1.0 / std::sqrt(var(c) + bn_eps_);
                xhat.col(c) = (centered * inv(c)).matrix();
                a.col(c) = (xhat.col(c).array() * params_[l.gamma + c] + params_[l.beta + c]).matrix();
            }
            cache.xhat.push_back(std::move(xhat));
            cache.inv_std.push_back(std::move(inv));
            cache.batch_mean.push_back(std::move(mean));
            cache.batch_var.push_back(std::move(var));
        }
        cache.post.push_back(a);
        h = a.cwiseMax(0.0);
    }
    cache.output = h;
    return h;
}

std::vector<double> GenerativeNet::backward(const Cache& cache, const Matrix& grad_output) const {
    std::vector<double> grad(params_.size(), 0.0);
    const Matrix& out = cache.output;
    Matrix g(out.rows(), out.cols());
    if (arch_.head == Head::Positive) {
        g = grad_output.cwiseProduct(out);
    } else {
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            double dot = grad_output.row(i).dot(out.row(i));
            g.row(i) = out.row(i).cwiseProduct((grad_output.row(i).array() - dot).matrix());
        }
    }
    const auto n = static_cast<double>(out.rows());
    for (std::size_t k = layers_.size(); k-- > 0;) {
        const auto& l = layers_[k];
        if (l.hidden) {
            const Matrix& post = cache.post[k];
            Matrix dy = g.cwiseProduct((post.array() > 0.0).cast<double>().matrix());
            if (arch_.batch_norm) {
                const Matrix& xhat = cache.xhat[k];
                const Vector& inv = cache.inv_std[k];
                for (std::size_t c = 0; c < l.out; ++c) {
                    auto dyc = dy.col(c).array();
                    grad[l.gamma + c] += (dyc * xhat.col(c).array()).sum();
                    grad[l.beta + c] += dyc.sum();
                    Eigen::ArrayXd dxhat = dyc * params_[l.gamma + c];
                    double mean_dx = dxhat.sum() / n;
                    double mean_dxx = (dxhat * xhat.col(c).array()).sum() / n;
                    dy.col(c) = (inv(c) * (dxhat - mean_dx - xhat.col(c).array() * mean_dxx)).matrix();
                }
            }
            g = std::move(dy);
        }
        const Matrix& input = cache.inputs[k];
        Eigen::Map<Matrix> dw(grad.data() + l.w, l.out, l.in);
        dw += g.transpose() * input;
        Eigen::Map<RowVector> db(grad.data() + l.b, l.out);
        db += g.colwise().sum();
        if (k > 0) {
            ConstMap w(params_.data() + l.w, l.out, l.in);
            g = g * w;
        }
    }
    return grad;
}

void GenerativeNet::update_running_stats(const Cache& cache, double momentum) {
    if (!arch_.batch_norm) return;
    const double n = static_cast<double>(cache.output.rows());
    const double unbias = n > 1 ? n / (n - 1.0) : 1.0;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const auto& l = layers_[k];
        if (!l.hidden) continue;
        for (std::size_t c = 0; c < l.out; ++c) {
            double& rm = running_[l.run_mean + c];
            double& rv = running_[l.run_var + c];
            rm = (1.0 - momentum) * rm + momentum * cache.batch_mean[k](c);
            rv = (1.0 - momentum) * rv + momentum * cache.batch_var[k](c) * unbias;
        }
    }
}

LossGradient backward(const GenerativeNet& net, const Matrix& noise, const SampleLoss& loss) {
    LossGradient out;
    Matrix samples = net.forward_train(noise, out.cache);
    Matrix grad_samples = Matrix::Zero(samples.rows(), samples.cols());
    out.loss = loss(samples, grad_samples);
    if (!std::isfinite(out.loss)) throw_divergence("non-finite loss in backward pass", {out.loss});
    out.gradient = net.backward(out.cache, grad_samples);
    return out;
}

void adam_step(std::vector<double>& params, const std::vector<double>& gradient,
               const TrainConfig& config, AdamState& state) {
    if (gradient.size() != params.size()) throw_invalid("adam_step: gradient size mismatch");
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.t = 0;
    }
    ++state.t;
    const double b1 = config.adam_beta1, b2 = config.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = gradient[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        params[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_eps);
    }
}

void adam_step(GenerativeNet& net, const std::vector<double>& gradient, const TrainConfig& config,
               AdamState& state) {
    adam_step(net.parameters(), gradient, config, state);
}

std::vector<double> finite_difference_gradient(const GenerativeNet& net, const Matrix& noise,
                                               const SampleLoss& loss, double step) {
    GenerativeNet probe = net;
    std::vector<double> grad(net.parameter_count());
    auto eval = [&]() {
        Matrix s = probe.forward(noise, Mode::Training);
        Matrix g = Matrix::Zero(s.rows(), s.cols());
        return loss(s, g);
    };
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double saved = probe.parameters()[i];
        probe.parameters()[i] = saved + step;
        const double up = eval();
        probe.parameters()[i] = saved - step;
        const double down = eval();
        probe.parameters()[i] = saved;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

}  // namespace archimax::nn
