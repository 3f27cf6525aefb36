#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "archimax/core.hpp"
#include "archimax/parametric.hpp"
#include "archimax/radial_infer.hpp"
#include "archimax/sampler.hpp"
#include "archimax/stdf_infer.hpp"

namespace archimax {

struct BlockConfig {
    std::optional<std::size_t> forced_k;  // number of blocks
    std::vector<unsigned> r_set{2, 3};
    std::size_t mc = 2000;
    std::size_t replicates = 100;
    std::size_t min_blocks = 10;
    double quantile = 0.95;
};

struct FitConfig {
    BlockConfig block;
    std::optional<std::size_t> n_r;
    std::optional<std::size_t> n_z;
    StdfTrainConfig stdf_init;
    StdfTrainConfig stdf;
    GeneratorTrainConfig generator;
    std::size_t max_alternations = 3;
    double cvm_tolerance = 1e-4;
    std::size_t cvm_samples = 5000;
    std::size_t cvm_mc = 10000;
    std::size_t z_reservoir = 20000;
    SamplerOptions sampler;
    std::uint64_t seed = 0;

    void validate() const;
};

struct InitEvResult {
    SpectralModel spectral;
    BlockSearchResult block;
    StdfTrace trace;
};

/// Block maxima at the largest block count passing the extreme-value test,
/// then stdf training with phi = exp(-x).
InitEvResult init_ev(const DataMatrix& data, const FitConfig& config);

/// Kendall's tau of the bivariate (j, k) margin of the stdf given by a pool.
double stdf_pair_tau(const Matrix& pool, std::size_t j, std::size_t k);
/// Mean over all pairs.
double stdf_mean_tau(const Matrix& pool);

struct FamilyScore {
    Family family;
    double theta;
    double tau_phi;
    double mean_loglik;
};

struct ParametricInit {
    ArchGenerator generator;
    double tau_data = 0.0;
    double tau_ell = 0.0;
    std::vector<FamilyScore> scores;
};

/// theta per family from tau_data = tau_l + (1 - tau_l) tau_phi, then the
/// family with largest mean xi log-likelihood, each generator rescaled so that
/// phi^{-1}(1/2) = 1 before scoring.
ParametricInit init_parametric(const PseudoObservations& u, const std::vector<Family>& families,
                               const SpectralModel& spectral, std::size_t directions = 64, std::uint64_t seed = 0);

struct StageRecord {
    std::string stage;
    std::size_t alternation = 0;
    std::size_t iterations = 0;
    double final_loss = 0.0;
    std::map<std::string, double> values;
};

struct FitDiagnostics {
    std::size_t block_k = 0;
    bool block_warning = false;
    std::vector<BlockSearchStep> ev_trace;
    std::vector<double> cvm_trace;
    std::vector<StageRecord> stages;
    double final_moment_penalty = std::numeric_limits<double>::quiet_NaN();
    double final_kendall_mse = std::numeric_limits<double>::quiet_NaN();
    std::size_t generator_trainings = 0;
    std::size_t stdf_trainings = 0;
};

struct FitResult {
    ArchimaxModel model;
    FitDiagnostics diagnostics;
};

/// Extreme-value initialization then alternating generator and stdf updates
/// until successive models are within cvm_tolerance. On error, `partial`
/// (when given) holds diagnostics up to the failing stage and the error
/// carries the stage name.
FitResult fit(const DataMatrix& data, const FitConfig& config, FitDiagnostics* partial = nullptr);

}  // namespace archimax
