#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "archimax/generator.hpp"
#include "archimax/jet.hpp"
#include "archimax/matrix.hpp"

namespace archimax {

enum class Family { Clayton, Frank, Joe, Gumbel };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

struct ArchGenerator {
    Family family = Family::Clayton;
    double theta = 1.0;

    void validate() const;
};

double phi(const ArchGenerator& g, double x);
double phi_inverse(const ArchGenerator& g, double w);
double phi_d1(const ArchGenerator& g, double x);
double phi_d2(const ArchGenerator& g, double x);
TaylorJet phi_taylor(const ArchGenerator& g, double x, std::size_t order);

/// P(R > r) for the radial law whose Williamson d-transform is phi.
double radial_survival(const ArchGenerator& g, std::size_t d, double r);
double radial_cdf(const ArchGenerator& g, std::size_t d, double r);
/// radial_cdf over an increasing grid; throws a numeric error if the raw
/// values decrease by more than 1e-8 and otherwise returns the running max.
std::vector<double> radial_cdf_grid(const ArchGenerator& g, std::size_t d, const std::vector<double>& grid);
std::vector<double> sample_radial(const ArchGenerator& g, std::size_t d, std::size_t count,
                                  std::uint64_t seed);

/// Bivariate Kendall's tau of the Archimedean copula with generator g.
double tau_from_theta(Family family, double theta);
double theta_from_tau(Family family, double tau);

class ParametricGenerator final : public Generator {
public:
    explicit ParametricGenerator(ArchGenerator g);
    double value(double x) const override { return phi(g_, x); }
    double d1(double x) const override { return phi_d1(g_, x); }
    double d2(double x) const override { return phi_d2(g_, x); }
    double inverse(double w) const override { return phi_inverse(g_, w); }
    std::string describe() const override;
    const ArchGenerator& params() const noexcept { return g_; }

private:
    ArchGenerator g_;
};

struct NsdParams {
    std::vector<double> alpha;
    double rho = 0.5;
    std::size_t mc_samples = 100000;

    std::size_t d() const noexcept { return alpha.size(); }
    void validate() const;
};

/// Monte Carlo evaluator of the NSD stdf with a fixed pool of spectral
/// draws, so repeated evaluations share random numbers.
class NsdStdf {
public:
    NsdStdf(const NsdParams& params, std::uint64_t seed);
    double operator()(std::span<const double> x) const;
    double standard_error(std::span<const double> x) const;
    std::size_t d() const noexcept { return static_cast<std::size_t>(pool_.cols()); }

private:
    Matrix pool_;  // rows: d * W with W from the exact spectral law
};

double nsd_stdf(const NsdParams& params, std::span<const double> x, std::uint64_t seed);

/// Spectral vectors W on the simplex with d * E[max_j x_j W_j] equal to the NSD stdf.
Matrix nsd_spectral_sample(const NsdParams& params, std::size_t count, std::uint64_t seed);

}  // namespace archimax
