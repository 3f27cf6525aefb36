#include "archimax/sampler.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include "archimax/errors.hpp"
#include "archimax/parallel.hpp"
#include "archimax/random.hpp"

namespace archimax {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t spectral_dim(const SpectralSpec& s) {
    return std::visit(overloaded{[](const SpectralModel& m) { return m.d(); },
                                 [](const NsdParams& p) { return p.d(); },
                                 [](const UniformSimplex& u) { return u.d; }},
                      s);
}

}  // namespace

void ArchimaxModel::validate() const {
    if (d < 2) throw_invalid("ArchimaxModel requires d >= 2");
    if (spectral_dim(spectral) != d) throw_invalid("ArchimaxModel: spectral dimension mismatch");
    std::visit(overloaded{[&](const RadialModel& r) {
                              if (r.d() != d) throw_invalid("ArchimaxModel: radial dimension mismatch");
                          },
                          [](const FiniteRadial& f) {
                              if (f.support.empty() || f.support.size() != f.probs.size())
                                  throw_invalid("ArchimaxModel: malformed finite radial law");
                          },
                          [](const ArchGenerator& g) { g.validate(); }},
               radial);
    if (auto* p = std::get_if<NsdParams>(&spectral)) p->validate();
}

SimplexSource make_simplex_source(const SpectralSpec& spectral, const SamplerOptions& options) {
    SimplexSource src;
    src.d = spectral_dim(spectral);
    std::visit(overloaded{[&](const SpectralModel& m) {
                              auto model = std::make_shared<SpectralModel>(m);
                              src.draw = [model](std::size_t count, Rng& rng) {
                                  if (model->has_net()) {
                                      Matrix noise = standard_normal_matrix(count, model->d(), rng);
                                      return model->net().forward(noise, nn::Mode::Sampling);
                                  }
                                  const Matrix& pool = model->pool();
                                  std::uniform_int_distribution<Eigen::Index> pick(0, pool.rows() - 1);
                                  Matrix out(count, pool.cols());
                                  for (std::size_t i = 0; i < count; ++i) out.row(i) = pool.row(pick(rng));
                                  return out;
                              };
                              src.stdf = [model](std::span<const double> x) { return model->stdf(x); };
                          },
                          [&](const NsdParams& p) {
                              p.validate();
                              NsdParams eval = p;
                              eval.mc_samples = options.nsd_mc;
                              auto stdf = std::make_shared<NsdStdf>(eval, options.nsd_seed);
                              src.draw = [p](std::size_t count, Rng& rng) {
                                  return nsd_spectral_sample(p, count, rng());
                              };
                              src.stdf = [stdf](std::span<const double> x) { return (*stdf)(x); };
                          },
                          [&](const UniformSimplex& u) {
                              src.uniform = true;
                              const std::size_t d = u.d;
                              src.draw = [d](std::size_t count, Rng& rng) {
                                  Matrix out = Matrix::Zero(count, d);
                                  std::uniform_int_distribution<std::size_t> pick(0, d - 1);
                                  for (std::size_t i = 0; i < count; ++i) out(i, pick(rng)) = 1.0;
                                  return out;
                              };
                              src.stdf = [](std::span<const double> x) {
                                  double s = 0.0;
                                  for (double v : x) s += v;
                                  return s;
                              };
                          }},
               spectral);
    return src;
}

std::vector<double> gpc_from(std::span<const double> w, double u) {
    const double d = static_cast<double>(w.size());
    std::vector<double> x(w.size());
    for (std::size_t j = 0; j < w.size(); ++j)
        x[j] = w[j] > 0.0 ? -u / (d * w[j]) : -std::numeric_limits<double>::infinity();
    return x;
}

std::vector<double> simplex_from_gpc(const Matrix& x) {
    std::vector<double> s(static_cast<std::size_t>(x.cols()), std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (std::isfinite(x(i, j))) s[static_cast<std::size_t>(j)] = std::min(s[static_cast<std::size_t>(j)], -x(i, j));
    return s;
}

Matrix sample_gpc(const SimplexSource& source, std::size_t count, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x6770);
    Matrix w = source.draw(count, rng);
    Matrix out(count, source.d);
    for (std::size_t i = 0; i < count; ++i) {
        auto x = gpc_from({w.data() + i * source.d, source.d}, uniform_open(rng));
        for (std::size_t j = 0; j < source.d; ++j) out(i, j) = x[j];
    }
    return out;
}

Matrix sample_simplex(const SimplexSource& source, std::size_t count, std::uint64_t seed,
                      const SamplerOptions& options, SimplexStats* stats) {
    const std::size_t d = source.d;
    Matrix out(count, d);
    if (source.uniform) {
        for (std::size_t i = 0; i < count; ++i) {
            Rng rng = make_rng(seed, i);
            auto s = uniform_simplex(d, rng);
            for (std::size_t j = 0; j < d; ++j) out(i, j) = s[j];
        }
        if (stats) stats->attempts = stats->accepted = count;
        return out;
    }
    std::atomic<std::size_t> attempts{0}, accepted{0};
    std::atomic<bool> degenerate{false};
    const std::size_t per_attempt = d - 1, chunk = 32;
    const double dd = static_cast<double>(d);
    std::vector<double> margins(d), unit(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        unit[j] = 1.0;
        margins[j] = source.stdf(unit);
        unit[j] = 0.0;
    }
    parallel_for(count, [&](std::size_t i) {
        if (degenerate.load()) return;
        Rng rng = make_rng(seed, i);
        Matrix w;
        std::size_t cursor = 0;
        std::vector<double> s(d);
        for (std::size_t attempt = 1;; ++attempt) {
            if (attempt > options.max_attempts) {
                degenerate = true;
                return;
            }
            if (cursor + per_attempt > static_cast<std::size_t>(w.rows())) {
                w = source.draw(chunk * per_attempt, rng);
                cursor = 0;
            }
            std::fill(s.begin(), s.end(), std::numeric_limits<double>::infinity());
            for (std::size_t k = 0; k < per_attempt; ++k, ++cursor) {
                const double u = uniform_open(rng);
                for (std::size_t j = 0; j < d; ++j) {
                    const double wj = w(cursor, j);
                    if (wj > 0.0) s[j] = std::min(s[j], u / (dd * wj));
                }
            }
            // max_j s_j l(e_j) <= l(s) <= sum_j s_j l(e_j) decides most attempts without evaluating l.
            double sum = 0.0, top = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                sum += s[j] * margins[j];
                top = std::max(top, s[j] * margins[j]);
            }
            const bool accept = std::isfinite(sum) && top <= 1.0 && (sum <= 1.0 || source.stdf(s) <= 1.0);
            if (accept) {
                for (std::size_t j = 0; j < d; ++j) out(i, j) = s[j];
                const std::size_t total = attempts.fetch_add(attempt) + attempt;
                const std::size_t ok = accepted.fetch_add(1) + 1;
                if (total >= options.rate_window && static_cast<double>(ok) < options.min_rate * static_cast<double>(total))
                    degenerate = true;
                return;
            }
        }
    });
    if (stats) {
        stats->attempts = attempts.load();
        stats->accepted = accepted.load();
    }
    if (degenerate) throw_degenerate("simplex sampler: acceptance rate too low (spectral model degenerate)");
    return out;
}

Matrix correct_simplex_marginals(const Matrix& s) {
    if (s.rows() < 2) throw_invalid("correct_simplex_marginals requires at least two rows");
    const double expo = 1.0 / static_cast<double>(s.cols() - 1);
    Matrix u = rank_normalize(DataMatrix(s)).values();
    for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = 1.0 - std::pow(1.0 - u.data()[i], expo);
    return u;
}

Matrix sample_simplex_corrected(const SimplexSource& source, std::size_t count, std::uint64_t seed,
                                const SamplerOptions& options, SimplexStats* stats) {
    Matrix raw = sample_simplex(source, count, seed, options, stats);
    if (source.uniform || count < 2) return raw;
    return correct_simplex_marginals(raw);
}

std::vector<double> sample_z(const SpectralSpec& spectral, std::size_t count, std::uint64_t seed,
                             const SamplerOptions& options) {
    auto source = make_simplex_source(spectral, options);
    if (source.uniform) return {1.0};
    Matrix s = sample_simplex_corrected(source, count, seed, options);
    std::vector<double> z(count);
    for (std::size_t i = 0; i < count; ++i) z[i] = source.stdf({s.data() + i * source.d, source.d});
    return z;
}

RadialDraw draw_radial(const RadialSpec& radial, std::size_t d, std::size_t count, std::uint64_t seed) {
    return std::visit(
        overloaded{[&](const RadialModel& m) {
                       RadialDraw out;
                       out.r = m.sample(count, derive_seed(seed, 1));
                       out.phi = std::make_shared<WilliamsonGenerator>(m.sample(m.eval_samples(), derive_seed(seed, 2)),
                                                                       std::vector<double>{}, d);
                       return out;
                   },
                   [&](const FiniteRadial& f) {
                       RadialDraw out;
                       Rng rng = make_rng(seed, 1);
                       std::discrete_distribution<std::size_t> pick(f.probs.begin(), f.probs.end());
                       out.r.resize(count);
                       for (auto& r : out.r) r = f.support[pick(rng)];
                       out.phi = std::make_shared<WilliamsonGenerator>(f.generator(d));
                       return out;
                   },
                   [&](const ArchGenerator& g) {
                       RadialDraw out;
                       out.r = sample_radial(g, d, count, derive_seed(seed, 1));
                       out.phi = std::make_shared<ParametricGenerator>(g);
                       return out;
                   }},
        radial);
}

Matrix sample_archimax(const ArchimaxModel& model, std::size_t count, std::uint64_t seed,
                       const SamplerOptions& options) {
    model.validate();
    const std::size_t d = model.d;
    if (count == 0) return Matrix(0, d);
    auto radial = draw_radial(model.radial, d, count, derive_seed(seed, 0x72));
    auto source = make_simplex_source(model.spectral, options);
    Matrix s = sample_simplex_corrected(source, count, derive_seed(seed, 0x73), options);
    Matrix u(count, d);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < d; ++j) u(i, j) = std::clamp(radial.phi->value(radial.r[i] * s(i, j)), 0.0, 1.0);
    return u;
}

SynthResult synth_dataset(const SynthSpec& spec, std::uint64_t seed, const SamplerOptions& options) {
    spec.generator.validate();
    spec.nsd.validate();
    SynthResult out;
    out.truth.radial = spec.generator;
    out.truth.spectral = spec.nsd;
    out.truth.d = spec.nsd.d();
    out.truth.metadata["source"] = "synthetic";
    out.data = DataMatrix(sample_archimax(out.truth, spec.n, seed, options));
    return out;
}

}  // namespace archimax
