#include "archimax/radial_infer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "archimax/errors.hpp"
#include "archimax/lsq.hpp"
#include "archimax/random.hpp"

namespace archimax {

namespace {

double ipow(double a, std::size_t k) {
    double out = 1.0;
    while (k) {
        if (k & 1U) out *= a;
        a *= a;
        k >>= 1U;
    }
    return out;
}

void check_pool(std::span<const double> r, std::size_t d) {
    if (r.empty()) throw_invalid("williamson: empty radial pool");
    if (d < 2) throw_invalid("williamson: d must be at least 2");
    for (double v : r)
        if (!(v > 0.0) || !std::isfinite(v)) throw_invalid("williamson: radial samples must be positive");
}

/// Safeguarded Newton on phi(x) = w inside [lo, hi] with phi(lo) >= w >= phi(hi).
double bracketed_inverse(const std::function<double(double)>& phi, const std::function<double(double)>& dphi,
                         double w, double lo, double hi, double x) {
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    for (int it = 0; it < 300; ++it) {
        const double f = phi(x) - w;
        if (f == 0.0) return x;
        if (f > 0.0) lo = x;
        else hi = x;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
        double next = 0.5 * (lo + hi);
        if (dphi) {
            const double g = dphi(x);
            if (g < 0.0 && std::isfinite(g)) {
                const double newton = x - f / g;
                if (newton > lo && newton < hi) {
                    if (std::abs(newton - x) <= 1e-15 * std::max(1.0, x)) return newton;
                    next = newton;
                }
            }
        }
        x = next;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double williamson(std::span<const double> r, double x, std::size_t d) {
    check_pool(r, d);
    if (x < 0.0) throw_invalid("williamson requires x >= 0");
    double acc = 0.0;
    for (double v : r)
        if (v > x) acc += ipow(1.0 - x / v, d - 1);
    return acc / static_cast<double>(r.size());
}

double williamson_deriv(std::span<const double> r, double x, std::size_t d) {
    check_pool(r, d);
    if (x < 0.0) throw_invalid("williamson_deriv requires x >= 0");
    double acc = 0.0;
    for (double v : r)
        if (v > x) acc -= static_cast<double>(d - 1) / v * ipow(1.0 - x / v, d - 2);
    return acc / static_cast<double>(r.size());
}

double phi_inverse_numeric(const std::function<double(double)>& phi, double w, double hint,
                           const std::function<double(double)>& dphi) {
    if (!(w > 0.0 && w <= 1.0)) throw_invalid("phi_inverse_numeric requires w in (0,1]");
    if (w == 1.0) return 0.0;
    if (!(hint > 0.0) || !std::isfinite(hint)) hint = 1.0;
    double lo = 0.0, hi = hint;
    int expansions = 0;
    while (phi(hi) > w) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 1100 || !std::isfinite(hi)) throw_numeric("phi_inverse_numeric: no sign change in bracket");
    }
    return bracketed_inverse(phi, dphi, w, lo, hi, hint < hi ? hint : 0.5 * (lo + hi));
}

WilliamsonGenerator::WilliamsonGenerator(std::vector<double> support, std::vector<double> probs, std::size_t d)
    : d_(d) {
    check_pool(support, d);
    if (probs.empty()) probs.assign(support.size(), 1.0 / static_cast<double>(support.size()));
    if (probs.size() != support.size()) throw_invalid("WilliamsonGenerator: support/probability size mismatch");
    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return support[a] < support[b]; });
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw_invalid("WilliamsonGenerator: probabilities must be non-negative");
        total += p;
    }
    if (!(total > 0.0)) throw_invalid("WilliamsonGenerator: zero total mass");
    r_.reserve(order.size());
    p_.reserve(order.size());
    for (auto k : order) {
        r_.push_back(support[k]);
        p_.push_back(probs[k] / total);
    }
    const std::size_t size = r_.size(), stride = size + 1, powers = d_;
    tail_power_sums_.assign(powers * stride, 0.0);
    for (std::size_t q = 0; q < powers; ++q) {
        long double acc = 0.0L;
        for (std::size_t k = size; k-- > 0;) {
            acc += static_cast<long double>(p_[k]) * ipow(1.0 / r_[k], q);
            tail_power_sums_[q * stride + k] = static_cast<double>(acc);
        }
    }
}

double WilliamsonGenerator::eval(double x, int order) const {
    if (x < 0.0) throw_invalid("Williamson generator requires x >= 0");
    const auto first = static_cast<std::size_t>(std::upper_bound(r_.begin(), r_.end(), x) - r_.begin());
    if (first == r_.size()) return 0.0;
    const auto m = static_cast<std::size_t>(order);
    if (m > 0 && d_ < m + 1) return 0.0;
    const std::size_t n = d_ - 1 - m;
    double coef = 1.0;
    for (std::size_t i = 0; i < m; ++i) coef *= -static_cast<double>(d_ - 1 - i);

    // sum_k C(n,k) (-x)^k S_{m+k}, with S_q the tail sum of p r^{-q}.
    const std::size_t stride = r_.size() + 1;
    double acc = 0.0, mag = 0.0, binom = 1.0, xk = 1.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double term = binom * xk * tail_power_sums_[(m + k) * stride + first];
        acc += (k % 2 == 0) ? term : -term;
        mag += term;
        binom = binom * static_cast<double>(n - k) / static_cast<double>(k + 1);
        xk *= x;
    }
    if (static_cast<double>(n + 3) * std::numeric_limits<double>::epsilon() * mag <= 1e-12 * std::abs(acc))
        return coef * acc;

    double direct = 0.0;
    for (std::size_t k = first; k < r_.size(); ++k)
        direct += p_[k] * ipow(1.0 / r_[k], m) * ipow(1.0 - x / r_[k], n);
    return coef * direct;
}

double WilliamsonGenerator::value(double x) const { return eval(x, 0); }
double WilliamsonGenerator::d1(double x) const { return eval(x, 1); }
double WilliamsonGenerator::d2(double x) const { return eval(x, 2); }

double WilliamsonGenerator::inverse(double w) const {
    if (!(w >= 0.0 && w <= 1.0)) throw_invalid("Williamson inverse requires w in [0,1]");
    if (w == 0.0) return support_max();
    if (w == 1.0) return 0.0;
    auto f = [this](double x) { return value(x); };
    auto df = [this](double x) { return d1(x); };
    // Start from the inverse of the tangent at 0 when it lies in range.
    const double slope = d1(0.0);
    const double guess = slope < 0.0 ? (1.0 - w) / -slope : 0.5 * support_max();
    return bracketed_inverse(f, df, w, 0.0, support_max(), guess);
}

std::string WilliamsonGenerator::describe() const {
    return "williamson(atoms=" + std::to_string(r_.size()) + ", d=" + std::to_string(d_) + ")";
}

double WilliamsonGenerator::mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < r_.size(); ++k) m += p_[k] * r_[k];
    return m;
}

nn::Architecture default_radial_architecture() {
    return nn::Architecture{.input_dim = 1, .hidden_width = 10, .output_dim = 1, .hidden_layers = 2,
                            .head = nn::Head::Positive, .batch_norm = true};
}

RadialModel::RadialModel(nn::GenerativeNet net, std::size_t d, std::size_t eval_samples, std::uint64_t pool_seed)
    : net_(std::move(net)), d_(d), eval_samples_(eval_samples), pool_seed_(pool_seed) {
    if (net_.architecture().output_dim != 1 || net_.architecture().head != nn::Head::Positive)
        throw_invalid("RadialModel requires a scalar net with positive head");
    if (d < 2) throw_invalid("RadialModel requires d >= 2");
    if (eval_samples == 0) throw_invalid("RadialModel requires eval_samples >= 1");
    refreeze(pool_seed);
}

std::vector<double> RadialModel::sample(std::size_t count, std::uint64_t seed) const {
    Matrix out = net_.sample(count, seed, nn::Mode::Sampling);
    return std::vector<double>(out.data(), out.data() + out.size());
}

void RadialModel::refreeze(std::uint64_t pool_seed) {
    pool_seed_ = pool_seed;
    generator_ = WilliamsonGenerator(sample(eval_samples_, pool_seed), {}, d_);
}

namespace {

struct ProductPass {
    std::vector<double> phi;   // phi_theta(t_i), i in sorted order
    std::vector<double> dphi;  // phi_theta'(t_i)
    std::vector<std::size_t> r_index, z_index;
};

/// Sorted products and the empirical Williamson transform at each of them.
ProductPass evaluate_products(const std::vector<double>& r, const std::vector<double>& z, std::size_t d) {
    const std::size_t nr = r.size(), nz = z.size(), total = nr * nz;
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> t(total);
    for (std::size_t j = 0; j < nr; ++j)
        for (std::size_t l = 0; l < nz; ++l) t[j * nz + l] = r[j] * z[l];
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return t[a] < t[b]; });

    std::vector<double> rs(r);
    std::sort(rs.begin(), rs.end());
    ProductPass out;
    out.phi.resize(total);
    out.dphi.resize(total);
    out.r_index.resize(total);
    out.z_index.resize(total);
    const double inv_n = 1.0 / static_cast<double>(nr), dm1 = static_cast<double>(d - 1);
    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t k = idx[i];
        out.r_index[i] = k / nz;
        out.z_index[i] = k % nz;
        const double ti = t[k];
        double v = 0.0, dv = 0.0;
        for (auto it = std::upper_bound(rs.begin(), rs.end(), ti); it != rs.end(); ++it) {
            const double a = 1.0 - ti / *it;
            const double pw = ipow(a, d - 2);
            v += pw * a;
            dv -= dm1 / *it * pw;
        }
        out.phi[i] = v * inv_n;
        out.dphi[i] = dv * inv_n;
    }
    return out;
}

std::vector<double> midpoint_quantiles(std::vector<double> pool, std::size_t count) {
    std::sort(pool.begin(), pool.end());
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
        out[i] = pool[std::min(pool.size() - 1, static_cast<std::size_t>(q * static_cast<double>(pool.size())))];
    }
    return out;
}

std::size_t resample_period(std::size_t iter, std::size_t max_iters, bool anneal) {
    if (!anneal || max_iters == 0) return 1;
    static constexpr std::size_t schedule[5] = {16, 8, 4, 2, 1};
    const std::size_t fifth = std::min<std::size_t>(4, iter * 5 / max_iters);
    return schedule[fifth];
}

}  // namespace

double kendall_residual(const std::vector<double>& kendall_w, std::vector<double> r, const std::vector<double>& z,
                        std::size_t d) {
    if (kendall_w.size() != r.size() * z.size()) throw_invalid("kendall_residual: size mismatch");
    auto pass = evaluate_products(r, z, d);
    double sse = 0.0;
    for (std::size_t i = 0; i < kendall_w.size(); ++i) sse += (kendall_w[i] - pass.phi[i]) * (kendall_w[i] - pass.phi[i]);
    return sse / static_cast<double>(kendall_w.size());
}

KendallLoss kendall_loss(const std::vector<double>& kendall_w, const std::vector<double>& r,
                         const std::vector<double>& z, std::size_t d, double mean_weight) {
    const std::size_t nr = r.size(), total = nr * z.size();
    if (kendall_w.size() != total || nr == 0) throw_invalid("kendall_loss: size mismatch");
    const double inv_total = 1.0 / static_cast<double>(total), inv_nr = 1.0 / static_cast<double>(nr);
    const double dm1 = static_cast<double>(d - 1);
    auto pass = evaluate_products(r, z, d);
    KendallLoss out;
    double sse = 0.0;
    std::vector<double> dphi_i(total);
    for (std::size_t i = 0; i < total; ++i) {
        const double res = kendall_w[i] - pass.phi[i];
        sse += res * res;
        dphi_i[i] = -2.0 * res * inv_total;
    }
    out.mse = sse * inv_total;
    out.mean_r = std::accumulate(r.begin(), r.end(), 0.0) * inv_nr;
    out.loss = out.mse + mean_weight * (out.mean_r - 1.0) * (out.mean_r - 1.0);

    // Direct dependence of phi_theta on each r_j, plus the path through t_i = r_a z_b.
    out.grad_r.assign(nr, 2.0 * mean_weight * (out.mean_r - 1.0) * inv_nr);
    std::vector<std::size_t> order(nr);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return r[a] < r[b]; });
    std::vector<double> rs(nr);
    for (std::size_t k = 0; k < nr; ++k) rs[k] = r[order[k]];
    for (std::size_t i = 0; i < total; ++i) {
        const double g = dphi_i[i];
        if (g == 0.0) continue;
        const double ti = r[pass.r_index[i]] * z[pass.z_index[i]];
        for (auto k = static_cast<std::size_t>(std::upper_bound(rs.begin(), rs.end(), ti) - rs.begin()); k < nr; ++k) {
            const double rj = rs[k];
            const double a = 1.0 - ti / rj;
            out.grad_r[order[k]] += g * inv_nr * dm1 * ipow(a, d - 2) * ti / (rj * rj);
        }
        out.grad_r[pass.r_index[i]] += g * pass.dphi[i] * z[pass.z_index[i]];
    }
    return out;
}

RadialModel train_generator(const std::vector<double>& kendall_w, const std::vector<double>& z_source,
                            std::size_t d, const GeneratorTrainConfig& config, const RadialModel* warm_start,
                            GeneratorTrace* trace) {
    config.train.validate();
    const std::size_t nr = config.n_r, nz = config.n_z, total = nr * nz;
    if (nr < 2 || nz < 1) throw_config("train_generator requires n_r >= 2 and n_z >= 1");
    if (!(config.mean_weight >= 0.0) || !std::isfinite(config.mean_weight))
        throw_config("train_generator: mean_weight must be finite and non-negative");
    if (kendall_w.size() != total) throw_invalid("train_generator: Kendall targets must number n_r * n_z");
    for (std::size_t i = 1; i < total; ++i)
        if (kendall_w[i] > kendall_w[i - 1]) throw_invalid("train_generator: Kendall targets must be non-increasing");
    if (z_source.empty()) throw_invalid("train_generator: empty Z source");
    for (double z : z_source)
        if (!(z > 0.0) || !std::isfinite(z)) throw_invalid("train_generator: Z values must be positive");
    if (d < 2) throw_invalid("train_generator: d must be at least 2");

    nn::GenerativeNet net;
    if (warm_start) {
        net = warm_start->net();
    } else {
        auto arch = default_radial_architecture();
        arch.hidden_width = config.hidden_width;
        net = nn::GenerativeNet(arch, derive_seed(config.train.seed, 1));
    }
    net.lineage().push_back(config.train.seed);

    Rng rng = make_rng(config.train.seed, 0x7267);
    const bool constant_z = z_source.size() == 1;
    const std::size_t pool_size = std::max<std::size_t>(nz, config.z_pool_factor * nz);
    std::uniform_int_distribution<std::size_t> pick(0, z_source.size() - 1);
    auto draw_z = [&]() {
        if (constant_z) return std::vector<double>(nz, z_source.front());
        std::vector<double> pool(pool_size);
        for (auto& v : pool) v = z_source[pick(rng)];
        return midpoint_quantiles(std::move(pool), nz);
    };

    std::vector<double> z = draw_z();
    nn::AdamState adam;
    GeneratorTrace local;
    for (std::size_t iter = 0; iter < config.train.max_iters; ++iter) {
        if (iter > 0 && iter % resample_period(iter, config.train.max_iters, config.anneal_z) == 0) z = draw_z();
        Matrix noise = standard_normal_matrix(nr, 1, rng);
        nn::GenerativeNet::Cache cache;
        Matrix out = net.forward_train(noise, cache);
        std::vector<double> r(out.data(), out.data() + nr);

        KendallLoss kl = kendall_loss(kendall_w, r, z, d, config.mean_weight);
        local.loss.push_back(kl.loss);
        local.mse.push_back(kl.mse);
        if (!std::isfinite(kl.loss)) throw_divergence("generator training diverged", local.loss);
        local.final_mse = kl.mse;
        local.final_mean_r = kl.mean_r;
        local.iterations = iter + 1;
        if (kl.mse < config.tolerance) break;

        Matrix grad_out(nr, 1);
        for (std::size_t j = 0; j < nr; ++j) grad_out(j, 0) = kl.grad_r[j];
        auto grad = net.backward(cache, grad_out);
        nn::adam_step(net, grad, config.train, adam);
        net.update_running_stats(cache);
    }
    if (trace) *trace = std::move(local);
    return RadialModel(std::move(net), d, config.eval_samples, derive_seed(config.train.seed, 2));
}

std::vector<double> support_from_ratios(const std::vector<double>& ratios) {
    std::vector<double> r(ratios.size() + 1);
    r.back() = 1.0;
    for (std::size_t j = ratios.size(); j-- > 0;) r[j] = r[j + 1] * ratios[j];
    return r;
}

ZTSupport product_support(const std::vector<double>& r, const std::vector<double>& z) {
    struct Item {
        double t;
        std::size_t j, l;
    };
    std::vector<Item> items;
    items.reserve(r.size() * z.size());
    for (std::size_t j = 0; j < r.size(); ++j)
        for (std::size_t l = 0; l < z.size(); ++l) items.push_back({r[j] * z[l], j, l});
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.t < b.t; });
    ZTSupport out;
    for (const auto& it : items) {
        if (!out.t.empty() && std::abs(it.t - out.t.back()) <= 1e-12 * std::max(std::abs(it.t), 1e-300)) {
            out.members.back().emplace_back(it.j, it.l);
        } else {
            out.t.push_back(it.t);
            out.members.push_back({{it.j, it.l}});
        }
    }
    return out;
}

namespace {

/// Kendall atom index, in decreasing-w order, paired with each product group.
std::vector<std::size_t> pair_groups(const ZTSupport& zt, const std::vector<double>& pr, const std::vector<double>& pz,
                                     const std::vector<double>& pw) {
    const std::size_t groups = zt.t.size(), m = pw.size();
    std::vector<std::size_t> out(groups);
    if (groups == m) {
        std::iota(out.begin(), out.end(), 0);
        return out;
    }
    std::vector<double> cum_w(m);
    std::partial_sum(pw.begin(), pw.end(), cum_w.begin());
    double cum = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
        double mass = 0.0;
        for (auto [j, l] : zt.members[g]) mass += pr[j] * pz[l];
        const double mid = cum + 0.5 * mass;
        cum += mass;
        auto it = std::lower_bound(cum_w.begin(), cum_w.end(), mid);
        out[g] = std::min<std::size_t>(m - 1, static_cast<std::size_t>(it - cum_w.begin()));
    }
    return out;
}

double weighted_williamson(const std::vector<double>& r, const std::vector<double>& p, double t, std::size_t d) {
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j)
        if (r[j] > t) acc += p[j] * ipow(1.0 - t / r[j], d - 1);
    return acc;
}

}  // namespace

FiniteRadial reconstruct_finite(const KendallSample& kendall, const ZSupport& zsup, std::size_t n_r, std::size_t d,
                                const ReconstructConfig& config, ReconstructTrace* trace) {
    if (kendall.size() == 0) throw_invalid("reconstruct_finite: empty Kendall sample");
    if (n_r == 0) throw_invalid("reconstruct_finite: n_r must be positive");
    if (zsup.z.empty()) throw_invalid("reconstruct_finite: empty Z support");
    if (d < 2) throw_invalid("reconstruct_finite: d must be at least 2");
    if (!(config.ratio_lower > 0.0 && config.ratio_lower < config.ratio_upper && config.ratio_upper <= 1.0))
        throw_config("reconstruct_finite: ratio bounds must satisfy 0 < lower < upper <= 1");
    const KendallSample ks = kendall.sorted_descending();
    const std::size_t m = ks.size(), nz = zsup.z.size();
    std::vector<double> pz = zsup.p;
    if (pz.empty()) pz.assign(nz, 1.0 / static_cast<double>(nz));
    if (pz.size() != nz) throw_invalid("reconstruct_finite: Z probability size mismatch");

    FiniteRadial out;
    if (n_r == 1) {
        out.support = {1.0};
        out.probs = {1.0};
        return out;
    }
    if (m > n_r * nz) throw_invalid("reconstruct_finite: more Kendall atoms than products");
    std::vector<double> ratios = config.initial_ratios.value_or(std::vector<double>(n_r - 1, 0.9));
    if (ratios.size() != n_r - 1) throw_invalid("reconstruct_finite: initial ratios must number n_r - 1");
    for (double& a : ratios) a = std::clamp(a, config.ratio_lower, config.ratio_upper);

    std::vector<double> pr(n_r, 1.0 / static_cast<double>(n_r));
    ReconstructTrace local;
    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        const std::vector<double> r = support_from_ratios(ratios);
        const ZTSupport zt = product_support(r, zsup.z);
        const auto pairing = pair_groups(zt, pr, pz, ks.p);
        local.rank_matched = zt.t.size() == m;

        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n_r));
        for (std::size_t g = 0; g < zt.t.size(); ++g)
            for (auto [j, l] : zt.members[g]) a(pairing[g], j) += pz[l];
        Vector b = Eigen::Map<const Vector>(ks.p.data(), static_cast<Eigen::Index>(m));
        Vector sol = linear_least_squares(a, b);
        double total = 0.0;
        for (std::size_t j = 0; j < n_r; ++j) {
            pr[j] = std::max(0.0, sol(j));
            total += pr[j];
        }
        if (!(total > 0.0)) throw_numeric("reconstruct_finite: probability solve has no positive mass");
        for (auto& p : pr) p /= total;

        auto residuals = [&](const std::vector<double>& rr) {
            Vector res(static_cast<Eigen::Index>(zt.t.size()));
            for (std::size_t g = 0; g < zt.t.size(); ++g) {
                auto [j, l] = zt.members[g].front();
                res(g) = weighted_williamson(rr, pr, rr[j] * zsup.z[l], d) - ks.w[pairing[g]];
            }
            return res;
        };
        const double mse = residuals(r).squaredNorm() / static_cast<double>(zt.t.size());
        local.mse.push_back(mse);
        local.iterations = iter + 1;
        out.support = r;
        out.probs = pr;
        out.ratios = ratios;
        if (mse < config.epsilon || iter + 1 == config.max_iters) break;

        Vector x0 = Eigen::Map<const Vector>(ratios.data(), static_cast<Eigen::Index>(ratios.size()));
        Vector lo = Vector::Constant(x0.size(), config.ratio_lower);
        Vector hi = Vector::Constant(x0.size(), config.ratio_upper);
        auto fit = bounded_least_squares(
            [&](const Vector& alpha) {
                return residuals(support_from_ratios(std::vector<double>(alpha.data(), alpha.data() + alpha.size())));
            },
            x0, lo, hi);
        ratios.assign(fit.x.data(), fit.x.data() + fit.x.size());
    }
    if (trace) *trace = std::move(local);
    return out;
}

SupportSizes choose_supports(std::size_t n, std::optional<std::size_t> n_r, std::optional<std::size_t> n_z) {
    if (n == 0) throw_invalid("choose_supports requires n >= 1");
    return {std::min(n, n_r.value_or(100)), std::min(n, n_z.value_or(80))};
}

}  // namespace archimax
