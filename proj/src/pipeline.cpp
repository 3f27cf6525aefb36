#include "archimax/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "archimax/errors.hpp"
#include "archimax/metrics.hpp"
#include "archimax/random.hpp"

namespace archimax {

void FitConfig::validate() const {
    if (max_alternations < 1) throw_config("max_alternations must be at least 1");
    if (!(cvm_tolerance >= 0.0)) throw_config("cvm_tolerance must be non-negative");
    if (cvm_samples < 2 || cvm_mc < 1) throw_config("cvm sample counts must be positive");
    if (z_reservoir < 1) throw_config("z_reservoir must be positive");
    if (block.r_set.empty()) throw_config("block r_set must be non-empty");
    for (unsigned r : block.r_set)
        if (r < 2) throw_config("block exponents must be at least 2");
    if (block.replicates < 1 || block.mc < 1) throw_config("block calibration counts must be positive");
    if (!(block.quantile > 0.0 && block.quantile < 1.0)) throw_config("block quantile must lie in (0,1)");
    stdf_init.train.validate();
    stdf.train.validate();
    generator.train.validate();
}

namespace {

template <class F>
auto staged(const char* stage, F&& body) {
    try {
        return body();
    } catch (Error& e) {
        if (e.stage().empty()) e.set_stage(stage);
        throw;
    }
}

StdfTrainConfig with_seed(StdfTrainConfig c, std::uint64_t seed) {
    c.train.seed = seed;
    return c;
}

}  // namespace

InitEvResult init_ev(const DataMatrix& data, const FitConfig& config) {
    config.validate();
    if (data.n() < 4) throw_invalid("init_ev requires n >= 4");
    InitEvResult out;
    if (config.block.forced_k) {
        const std::size_t k = *config.block.forced_k;
        if (k < 1 || k > data.n()) throw_config("forced block count out of range");
        out.block.k = k;
    } else {
        BlockSearchOptions opts{.mc = config.block.mc, .seed = derive_seed(config.seed, 0x626b),
                                .min_blocks = config.block.min_blocks};
        const std::size_t d = data.d();
        auto threshold = [&](std::size_t k) {
            return calibrate_ev_threshold(k, d, config.block.r_set, config.block.mc, config.block.replicates,
                                          derive_seed(config.seed, 0x63616c), config.block.quantile);
        };
        out.block = select_block_size(data, config.block.r_set, threshold, opts);
    }
    PseudoObservations u = rank_normalize(block_maxima(data, out.block.k));
    ExpGenerator exp_phi;
    out.spectral = train_stdf(u, exp_phi, with_seed(config.stdf_init, derive_seed(config.seed, 0x6576)), nullptr,
                              &out.trace);
    return out;
}

double stdf_pair_tau(const Matrix& pool, std::size_t j, std::size_t k) {
    const auto l = static_cast<std::size_t>(pool.rows()), d = static_cast<std::size_t>(pool.cols());
    if (j >= d || k >= d || j == k) throw_invalid("stdf_pair_tau: bad column pair");
    const double scale = static_cast<double>(d) / static_cast<double>(l);
    auto pickands = [&](double t) {
        double acc = 0.0;
        for (std::size_t s = 0; s < l; ++s) acc += std::max((1.0 - t) * pool(s, j), t * pool(s, k));
        return scale * acc;
    };
    double tau = 0.0;
    for (std::size_t s = 0; s < l; ++s) {
        const double a = pool(s, j), b = pool(s, k);
        if (a + b <= 0.0) continue;
        const double t = a / (a + b);
        const double at = pickands(t);
        if (at > 0.0) tau += scale * (a + b) * t * (1.0 - t) / at;
    }
    return tau;
}

double stdf_mean_tau(const Matrix& pool) {
    const auto d = static_cast<std::size_t>(pool.cols());
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = j + 1; k < d; ++k, ++pairs) acc += stdf_pair_tau(pool, j, k);
    return acc / static_cast<double>(pairs);
}

namespace {

/// theta at tau; at tau <= 0 falls back to the family's independence limit.
double theta_or_limit(Family family, double tau) {
    constexpr double kTiny = 1e-6;
    if (tau <= kTiny) {
        switch (family) {
            case Family::Clayton:
            case Family::Frank: return kTiny;
            case Family::Joe:
            case Family::Gumbel: return 1.0;
        }
    }
    return theta_from_tau(family, std::min(tau, 0.99));
}

double mean_xi_loglik(const PseudoObservations& u, const Generator& phi, const SpectralModel& spectral,
                      const Matrix& dirs) {
    const std::size_t n = u.n(), d = u.d();
    Matrix a(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) a(i, j) = phi.inverse(u.values()(i, j));
    double acc = 0.0;
    std::size_t used = 0;
    for (Eigen::Index k = 0; k < dirs.rows(); ++k) {
        std::span<const double> x(dirs.data() + k * d, d);
        const double ell = spectral.stdf(x);
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = xi_from_inverse({a.data() + i * d, d}, x);
            if (xi <= 0.0) continue;
            acc += xi_loglik(xi, ell, phi);
            ++used;
        }
    }
    return used ? acc / static_cast<double>(used) : kLoglikFloor;
}

}  // namespace

ParametricInit init_parametric(const PseudoObservations& u, const std::vector<Family>& families,
                               const SpectralModel& spectral, std::size_t directions, std::uint64_t seed) {
    if (families.empty()) throw_invalid("init_parametric requires at least one family");
    if (u.n() < 2) throw_invalid("init_parametric requires n >= 2");
    if (spectral.d() != u.d()) throw_invalid("init_parametric: dimension mismatch");
    ParametricInit out;
    const std::size_t d = u.d();
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = j + 1; k < d; ++k, ++pairs) acc += kendall_tau(u, j, k);
    out.tau_data = acc / static_cast<double>(pairs);
    out.tau_ell = stdf_mean_tau(spectral.pool());
    const double tau_phi = out.tau_ell >= 1.0 - 1e-9 ? 0.0 : (out.tau_data - out.tau_ell) / (1.0 - out.tau_ell);

    Rng rng = make_rng(seed, 0x6970);
    Matrix dirs = uniform_simplex_matrix(directions, d, rng);
    double best = -std::numeric_limits<double>::infinity();
    for (Family family : families) {
        ArchGenerator g{family, theta_or_limit(family, tau_phi)};
        double score = 0.0;
        if (families.size() > 1) {
            auto base = std::make_shared<ParametricGenerator>(g);
            ScaledGenerator scaled(base, base->inverse(0.5));
            score = mean_xi_loglik(u, scaled, spectral, dirs);
        }
        out.scores.push_back({family, g.theta, tau_phi, score});
        if (score > best) {
            best = score;
            out.generator = g;
        }
    }
    return out;
}

FitResult fit(const DataMatrix& data, const FitConfig& config, FitDiagnostics* partial) {
    config.validate();
    FitDiagnostics local;
    FitDiagnostics& diag = partial ? *partial : local;
    diag = FitDiagnostics{};
    const std::size_t d = data.d();

    PseudoObservations u = staged("rank_normalize", [&] { return rank_normalize(data); });
    InitEvResult init = staged("init_ev", [&] { return init_ev(data, config); });
    diag.block_k = init.block.k;
    diag.block_warning = init.block.warning;
    diag.ev_trace = init.block.trace;
    diag.stages.push_back({"init_ev", 0, init.trace.iterations, init.trace.loss.empty() ? 0.0 : init.trace.loss.back(),
                           {{"block_k", static_cast<double>(init.block.k)},
                            {"clipped", static_cast<double>(init.trace.clipped)}}});
    ++diag.stdf_trainings;
    SpectralModel spectral = std::move(init.spectral);
    diag.final_moment_penalty = moment_penalty(spectral.pool());

    const SupportSizes sizes = choose_supports(u.n(), config.n_r, config.n_z);
    const std::vector<double> targets = staged("kendall", [&] {
        return equispace_kendall(empirical_kendall(u), sizes.n_r, sizes.n_z);
    });

    ArchimaxModel previous{ArchGenerator{Family::Gumbel, 1.0}, spectral, d, {}};
    Matrix prev_samples = staged("sample", [&] {
        return sample_archimax(previous, config.cvm_samples, derive_seed(config.seed, 0x7330), config.sampler);
    });

    std::optional<RadialModel> radial;
    ArchimaxModel model = previous;
    for (std::size_t alt = 1; alt <= config.max_alternations; ++alt) {
        const std::uint64_t alt_seed = derive_seed(config.seed, 0x616c74 + alt);
        auto z = staged("sample_z", [&] {
            return sample_z(spectral, config.z_reservoir, derive_seed(alt_seed, 1), config.sampler);
        });

        GeneratorTrainConfig gcfg = config.generator;
        gcfg.n_r = sizes.n_r;
        gcfg.n_z = sizes.n_z;
        gcfg.train.seed = derive_seed(alt_seed, 2);
        GeneratorTrace gtrace;
        radial = staged("train_generator", [&] {
            return train_generator(targets, z, d, gcfg, radial ? &*radial : nullptr, &gtrace);
        });
        ++diag.generator_trainings;
        diag.final_kendall_mse = gtrace.final_mse;
        diag.stages.push_back({"train_generator", alt, gtrace.iterations,
                               gtrace.loss.empty() ? 0.0 : gtrace.loss.back(),
                               {{"kendall_mse", gtrace.final_mse}, {"mean_r", gtrace.final_mean_r}}});

        StdfTrace strace;
        spectral = staged("train_stdf", [&] {
            return train_stdf(u, radial->generator(), with_seed(config.stdf, derive_seed(alt_seed, 3)), &spectral,
                              &strace);
        });
        ++diag.stdf_trainings;
        diag.final_moment_penalty = moment_penalty(spectral.pool());
        diag.stages.push_back({"train_stdf", alt, strace.iterations, strace.loss.empty() ? 0.0 : strace.loss.back(),
                               {{"moment_penalty", diag.final_moment_penalty},
                                {"clipped", static_cast<double>(strace.clipped)},
                                {"zero_xi", static_cast<double>(strace.zero_xi)}}});

        model = ArchimaxModel{*radial, spectral, d, {}};
        Matrix samples = staged("sample", [&] {
            return sample_archimax(model, config.cvm_samples, derive_seed(alt_seed, 4), config.sampler);
        });
        const double distance = cvm(samples, prev_samples, config.cvm_mc, derive_seed(alt_seed, 5));
        diag.cvm_trace.push_back(distance);
        prev_samples = std::move(samples);
        if (distance < config.cvm_tolerance) break;
    }
    model.metadata["seed"] = std::to_string(config.seed);
    model.metadata["block_k"] = std::to_string(diag.block_k);
    model.metadata["alternations"] = std::to_string(diag.generator_trainings);
    return {model, diag};
}

}  // namespace archimax
