#include "archimax/stdf_infer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "archimax/errors.hpp"
#include "archimax/random.hpp"

namespace archimax {

double stdf_eval(const Matrix& w, std::span<const double> x) {
    const auto l = static_cast<std::size_t>(w.rows()), d = static_cast<std::size_t>(w.cols());
    if (x.size() != d) throw_invalid("stdf_eval: dimension mismatch");
    if (l == 0) throw_invalid("stdf_eval: empty spectral pool");
    double acc = 0.0;
    for (std::size_t k = 0; k < l; ++k) {
        const double* row = w.data() + k * d;
        double best = 0.0;
        for (std::size_t j = 0; j < d; ++j) best = std::max(best, x[j] * row[j]);
        acc += best;
    }
    return static_cast<double>(d) * acc / static_cast<double>(l);
}

SpectralModel::SpectralModel(nn::GenerativeNet net, std::size_t eval_samples, std::uint64_t pool_seed)
    : pool_seed_(pool_seed) {
    if (net.architecture().head != nn::Head::Simplex) throw_invalid("SpectralModel requires a simplex-head net");
    if (net.architecture().output_dim < 2) throw_invalid("SpectralModel requires d >= 2");
    if (eval_samples == 0) throw_invalid("SpectralModel requires eval_samples >= 1");
    pool_ = net.sample(eval_samples, pool_seed, nn::Mode::Sampling);
    net_ = std::move(net);
}

SpectralModel::SpectralModel(nn::GenerativeNet net, Matrix pool, std::uint64_t pool_seed)
    : net_(std::move(net)), pool_(std::move(pool)), pool_seed_(pool_seed) {
    if (net_->architecture().head != nn::Head::Simplex) throw_invalid("SpectralModel requires a simplex-head net");
    if (static_cast<std::size_t>(pool_.cols()) != net_->architecture().output_dim || pool_.rows() == 0)
        throw_invalid("SpectralModel: pool does not match the net");
}

SpectralModel::SpectralModel(Matrix pool) : pool_(std::move(pool)) {
    if (pool_.rows() == 0 || pool_.cols() < 2) throw_invalid("SpectralModel pool must be non-empty with d >= 2");
    for (Eigen::Index i = 0; i < pool_.rows(); ++i) {
        if ((pool_.row(i).array() < 0.0).any() || !pool_.row(i).allFinite())
            throw_invalid("SpectralModel pool rows must be non-negative");
        if (std::abs(pool_.row(i).sum() - 1.0) > 1e-9) throw_invalid("SpectralModel pool rows must lie on the simplex");
    }
}

const nn::GenerativeNet& SpectralModel::net() const {
    if (!net_) throw_invalid("SpectralModel has no net");
    return *net_;
}

Matrix SpectralModel::sample(std::size_t count, std::uint64_t seed) const {
    if (net_) return net_->sample(count, seed, nn::Mode::Sampling);
    Rng rng = make_rng(seed, 0x706f);
    std::uniform_int_distribution<Eigen::Index> pick(0, pool_.rows() - 1);
    Matrix out(count, pool_.cols());
    for (std::size_t i = 0; i < count; ++i) out.row(i) = pool_.row(pick(rng));
    return out;
}

double stdf_eval(const SpectralModel& model, std::span<const double> x) { return model.stdf(x); }

nn::Architecture default_spectral_architecture(std::size_t d) {
    return nn::Architecture{.input_dim = d, .hidden_width = 30, .output_dim = d, .hidden_layers = 2,
                            .head = nn::Head::Simplex, .batch_norm = true};
}

double xi_from_inverse(std::span<const double> a, std::span<const double> x) {
    if (a.size() != x.size()) throw_invalid("xi_transform: dimension mismatch");
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] <= 0.0) continue;
        any = true;
        best = std::min(best, a[j] / x[j]);
    }
    if (!any) throw_invalid("xi_transform: direction has no positive coordinate");
    return best;
}

double xi_transform(std::span<const double> u, std::span<const double> x, const Generator& phi) {
    if (u.size() != x.size()) throw_invalid("xi_transform: dimension mismatch");
    std::vector<double> a(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        if (!(u[j] > 0.0 && u[j] <= 1.0)) throw_invalid("xi_transform requires u in (0,1]");
        a[j] = x[j] > 0.0 ? phi.inverse(u[j]) : 0.0;
    }
    return xi_from_inverse(a, x);
}

std::vector<XiSample> xi_samples(const PseudoObservations& u, const Matrix& directions, const Generator& phi) {
    if (static_cast<std::size_t>(directions.cols()) != u.d()) throw_invalid("xi_samples: dimension mismatch");
    Matrix a(u.n(), u.d());
    for (std::size_t i = 0; i < u.n(); ++i)
        for (std::size_t j = 0; j < u.d(); ++j) a(i, j) = phi.inverse(u.values()(i, j));
    std::vector<XiSample> out;
    out.reserve(u.n() * directions.rows());
    for (Eigen::Index k = 0; k < directions.rows(); ++k) {
        std::vector<double> x(directions.row(k).data(), directions.row(k).data() + u.d());
        for (std::size_t i = 0; i < u.n(); ++i)
            out.push_back({xi_from_inverse({a.data() + i * u.d(), u.d()}, x), x, i});
    }
    return out;
}

double xi_loglik(double xi, double ell, const Generator& phi, LoglikStats* stats) {
    if (!(xi >= 0.0)) throw_invalid("xi_loglik requires xi >= 0");
    if (!(ell > 0.0)) throw_invalid("xi_loglik requires a positive stdf value");
    const double slope = -phi.d1(xi * ell);
    double out = slope > 0.0 ? std::log(slope) + std::log(ell) : -std::numeric_limits<double>::infinity();
    if (!(out >= kLoglikFloor)) {
        if (stats) ++stats->clipped;
        out = kLoglikFloor;
    }
    return out;
}

double xi_loglik(double xi, std::span<const double> x, const Generator& phi, const SpectralModel& model,
                 LoglikStats* stats) {
    return xi_loglik(xi, model.stdf(x), phi, stats);
}

double moment_penalty(const Matrix& w) {
    if (w.rows() == 0) throw_invalid("moment_penalty: empty batch");
    const double target = 1.0 / static_cast<double>(w.cols());
    return (w.colwise().mean().array() - target).square().sum();
}

StdfBatchLoss stdf_batch_loss(const Matrix& w, const Matrix& dirs, const Matrix& xi, const Generator& phi,
                              double penalty_weight) {
    const auto l = static_cast<std::size_t>(w.rows()), d = static_cast<std::size_t>(w.cols());
    const auto m = static_cast<std::size_t>(dirs.rows()), b = static_cast<std::size_t>(xi.rows());
    if (l == 0 || static_cast<std::size_t>(dirs.cols()) != d || static_cast<std::size_t>(xi.cols()) != m)
        throw_invalid("stdf_batch_loss: shape mismatch");
    const double dd = static_cast<double>(d), inv_l = 1.0 / static_cast<double>(l);
    std::vector<double> ell(m), dell(m, 0.0);
    std::vector<std::size_t> argmax(l * m);
    for (std::size_t k = 0; k < m; ++k) {
        double acc = 0.0;
        for (std::size_t s = 0; s < l; ++s) {
            std::size_t best_j = 0;
            double best = -1.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double v = dirs(k, j) * w(s, j);
                if (v > best) {
                    best = v;
                    best_j = j;
                }
            }
            argmax[k * l + s] = best_j;
            acc += best;
        }
        ell[k] = dd * acc * inv_l;
    }

    StdfBatchLoss out;
    double nll = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            const double x = xi(i, k);
            if (x <= 0.0) {
                ++out.zero_xi;
                continue;
            }
            ++out.used;
            const double arg = x * ell[k];
            const double g1 = phi.d1(arg);
            const double ll = g1 < 0.0 ? std::log(-g1) + std::log(ell[k]) : -std::numeric_limits<double>::infinity();
            if (!(ll >= kLoglikFloor)) {
                ++out.clipped;
                nll -= kLoglikFloor;
                continue;
            }
            nll -= ll;
            dell[k] -= x * phi.d2(arg) / g1 + 1.0 / ell[k];
        }
    }
    const double inv_used = out.used ? 1.0 / static_cast<double>(out.used) : 0.0;
    out.nll = nll * inv_used;
    out.penalty = moment_penalty(w);
    out.loss = out.nll + penalty_weight * out.penalty;

    out.grad_w = Matrix::Zero(l, d);
    for (std::size_t k = 0; k < m; ++k) {
        const double coef = dell[k] * inv_used * dd * inv_l;
        for (std::size_t s = 0; s < l; ++s) {
            const std::size_t j = argmax[k * l + s];
            out.grad_w(s, j) += coef * dirs(k, j);
        }
    }
    const RowVector means = w.colwise().mean();
    for (std::size_t j = 0; j < d; ++j)
        out.grad_w.col(j).array() += penalty_weight * 2.0 * (means(j) - 1.0 / dd) * inv_l;
    return out;
}

SpectralModel train_stdf(const PseudoObservations& u, const Generator& phi, const StdfTrainConfig& config,
                         const SpectralModel* warm_start, StdfTrace* trace) {
    config.train.validate();
    if (config.dirs_per_batch == 0 || config.train_eval_samples < 2 || config.eval_samples == 0)
        throw_config("train_stdf: direction and sample counts must be positive");
    const std::size_t n = u.n(), d = u.d();
    if (n < 1 || d < 2) throw_invalid("train_stdf: need at least one observation in d >= 2");
    if (generator_consistency(phi, phi.inverse(0.5)) > 1e-3) throw_invalid("train_stdf: generator derivative inconsistent with value");

    nn::GenerativeNet net;
    if (warm_start && warm_start->has_net()) {
        net = warm_start->net();
        if (net.architecture().output_dim != d) throw_invalid("train_stdf: warm start dimension mismatch");
    } else {
        auto arch = default_spectral_architecture(d);
        arch.hidden_width = config.hidden_width;
        net = nn::GenerativeNet(arch, derive_seed(config.train.seed, 1));
    }
    net.lineage().push_back(config.train.seed);

    Matrix a(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) a(i, j) = phi.inverse(u.values()(i, j));

    Rng rng = make_rng(config.train.seed, 0x7364);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const std::size_t b = std::min(config.train.batch_size, n), m = config.dirs_per_batch;
    const std::size_t l = config.train_eval_samples;
    const double pw = config.train.penalty_weight;
    nn::AdamState adam;
    StdfTrace local;
    Matrix xi(b, m);

    for (std::size_t iter = 0; iter < config.train.max_iters; ++iter) {
        Matrix dirs = uniform_simplex_matrix(m, d, rng);
        for (std::size_t i = 0; i < b; ++i) {
            const std::size_t row = pick(rng);
            for (std::size_t k = 0; k < m; ++k)
                xi(i, k) = xi_from_inverse({a.data() + row * d, d}, {dirs.data() + k * d, d});
        }
        Matrix noise = standard_normal_matrix(l, d, rng);
        nn::GenerativeNet::Cache cache;
        Matrix w = net.forward_train(noise, cache);

        StdfBatchLoss bl = stdf_batch_loss(w, dirs, xi, phi, pw);
        local.zero_xi += bl.zero_xi;
        local.clipped += bl.clipped;
        if (bl.used == 0) throw_divergence("train_stdf: every transformed observation is zero", local.loss);
        local.loss.push_back(bl.loss);
        local.penalty.push_back(bl.penalty);
        local.iterations = iter + 1;
        if (!std::isfinite(bl.loss)) throw_divergence("train_stdf: non-finite loss", local.loss);

        auto grad = net.backward(cache, bl.grad_w);
        nn::adam_step(net, grad, config.train, adam);
        net.update_running_stats(cache);
    }
    if (trace) *trace = std::move(local);
    return SpectralModel(std::move(net), config.eval_samples, derive_seed(config.train.seed, 2));
}

namespace {

std::vector<double> positive_xi(const PseudoObservations& u, std::span<const double> x,
                                const std::function<double(double)>& inverse, std::size_t& excluded) {
    if (x.size() != u.d()) throw_invalid("stdf estimator: dimension mismatch");
    if (u.n() < 2) throw_invalid("stdf estimator requires n >= 2");
    std::vector<double> out;
    out.reserve(u.n());
    std::vector<double> a(u.d());
    excluded = 0;
    for (std::size_t i = 0; i < u.n(); ++i) {
        auto row = u.row(i);
        for (std::size_t j = 0; j < u.d(); ++j) a[j] = x[j] > 0.0 ? inverse(row[j]) : 0.0;
        const double v = xi_from_inverse(a, x);
        if (v > 0.0) out.push_back(v);
        else ++excluded;
    }
    if (out.empty()) throw_numeric("stdf estimator: every transformed observation is zero");
    return out;
}

}  // namespace

BaselineEstimate pickands_estimate(const PseudoObservations& u, std::span<const double> x, const Generator& phi) {
    std::size_t excluded = 0;
    auto xi = positive_xi(u, x, [&](double w) { return phi.inverse(w); }, excluded);
    const auto n = static_cast<double>(xi.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i <= xi.size(); ++i) num -= std::log(static_cast<double>(i) / (n + 1.0));
    for (double v : xi) den += v;
    return {num / den, excluded};
}

BaselineEstimate cfg_estimate(const PseudoObservations& u, std::span<const double> x) {
    std::size_t excluded = 0;
    auto xi = positive_xi(u, x, [](double w) { return -std::log(w); }, excluded);
    const auto n = static_cast<double>(xi.size());
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 1; i <= xi.size(); ++i) lhs += std::log(-std::log(static_cast<double>(i) / (n + 1.0)));
    for (double v : xi) rhs += std::log(v);
    return {std::exp(lhs / n - rhs / n), excluded};
}

BaselineEstimate cfg_modified_estimate(const PseudoObservations& u, std::span<const double> x, const Generator& phi) {
    std::size_t excluded = 0;
    auto xi = positive_xi(u, x, [&](double w) { return phi.inverse(w); }, excluded);
    const auto n = static_cast<double>(xi.size());
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 1; i <= xi.size(); ++i) lhs += std::log(phi.inverse(static_cast<double>(i) / (n + 1.0)));
    for (double v : xi) rhs += std::log(v);
    return {std::exp(lhs / n - rhs / n), excluded};
}

}  // namespace archimax
