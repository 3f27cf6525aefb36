#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "archimax/core.hpp"
#include "archimax/generator.hpp"
#include "archimax/parametric.hpp"
#include "archimax/radial_infer.hpp"
#include "archimax/random.hpp"
#include "archimax/stdf_infer.hpp"

namespace archimax {

/// Spectral law uniform over the simplex vertices with S uniform on the
/// simplex: the Archimedean special case (l = sum, Z = 1).
struct UniformSimplex {
    std::size_t d = 2;
};

using RadialSpec = std::variant<RadialModel, FiniteRadial, ArchGenerator>;
using SpectralSpec = std::variant<SpectralModel, NsdParams, UniformSimplex>;

struct ArchimaxModel {
    RadialSpec radial;
    SpectralSpec spectral;
    std::size_t d = 2;
    std::map<std::string, std::string> metadata;

    void validate() const;
};

struct SamplerOptions {
    std::size_t nsd_mc = 20000;         // Monte Carlo pool of the NSD stdf inside the rejection test
    std::uint64_t nsd_seed = 0x5eed;
    std::size_t max_attempts = 1000000; // per accepted sample
    std::size_t rate_window = 100000;   // attempts after which the acceptance rate is checked
    double min_rate = 1e-4;
};

/// Draws of W together with the stdf they define.
struct SimplexSource {
    std::size_t d = 2;
    std::function<Matrix(std::size_t count, Rng& rng)> draw;
    std::function<double(std::span<const double>)> stdf;
    bool uniform = false;  // S is drawn directly as Dirichlet(1, ..., 1)
};

SimplexSource make_simplex_source(const SpectralSpec& spectral, const SamplerOptions& options = {});

/// X_j = -u / (d w_j); coordinates with w_j = 0 are -inf.
std::vector<double> gpc_from(std::span<const double> w, double u);
/// `count` generalized Pareto copula draws, one per row.
Matrix sample_gpc(const SimplexSource& source, std::size_t count, std::uint64_t seed);

/// s_j = -max_i x_ij over the rows of `x` (GPC draws); -inf entries are
/// ignored and a column with no finite entry gives +inf.
std::vector<double> simplex_from_gpc(const Matrix& x);

struct SimplexStats {
    std::size_t attempts = 0;
    std::size_t accepted = 0;
};

/// Raw simplex components: coordinate-wise maxima over d - 1 GPC draws,
/// negated, with rejection until l(s) <= 1. For uniform sources returns
/// Dirichlet(1) draws directly.
Matrix sample_simplex(const SimplexSource& source, std::size_t count, std::uint64_t seed,
                      const SamplerOptions& options = {}, SimplexStats* stats = nullptr);

/// Rank-normalizes each column then maps through the Beta(1, d-1) quantile.
Matrix correct_simplex_marginals(const Matrix& s);

/// Corrected simplex components; the correction is a batch-level step.
Matrix sample_simplex_corrected(const SimplexSource& source, std::size_t count, std::uint64_t seed,
                                const SamplerOptions& options = {}, SimplexStats* stats = nullptr);

/// Z = l(S) for `count` corrected simplex draws; {1} for uniform sources.
std::vector<double> sample_z(const SpectralSpec& spectral, std::size_t count, std::uint64_t seed,
                             const SamplerOptions& options = {});

/// Radial draws and the generator phi used to map R * S to the unit cube.
struct RadialDraw {
    std::vector<double> r;
    std::shared_ptr<const Generator> phi;
};

RadialDraw draw_radial(const RadialSpec& radial, std::size_t d, std::size_t count, std::uint64_t seed);

Matrix sample_archimax(const ArchimaxModel& model, std::size_t count, std::uint64_t seed,
                       const SamplerOptions& options = {});

struct SynthSpec {
    ArchGenerator generator;
    NsdParams nsd;
    std::size_t n = 1000;
};

struct SynthResult {
    DataMatrix data;
    ArchimaxModel truth;
};

SynthResult synth_dataset(const SynthSpec& spec, std::uint64_t seed, const SamplerOptions& options = {});

}  // namespace archimax
