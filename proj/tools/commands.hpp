#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace archimax::cli {

/// Provenance stamped into every output file.
struct Provenance {
    std::string command_line;
    std::optional<std::uint64_t> seed;

    std::string line() const;
};

struct SynthOptions {
    std::string family = "clayton";
    std::optional<double> theta;
    std::optional<double> tau;
    std::vector<double> alpha;
    double rho = 0.69;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    std::string out = "-";
    std::string truth;
};

struct FitOptions {
    std::string data = "-";
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::string diagnostics;
    std::optional<std::size_t> max_alternations;
    std::optional<double> cvm_tolerance;
    std::optional<std::size_t> block_k;
    std::optional<std::size_t> stdf_iters;
    std::optional<std::size_t> generator_iters;
    std::optional<std::size_t> n_r;
    std::optional<std::size_t> n_z;
};

struct SampleOptions {
    std::string model;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    std::string out = "-";
};

struct EvalStdfOptions {
    std::string model;
    std::string truth;
    std::size_t mc = 10000;
    std::size_t nsd_mc = 100000;
    std::uint64_t seed = 0;
    std::string out = "-";
};

struct EvalLambdaOptions {
    std::string model;
    std::string truth;
    std::size_t n = 0;
    std::string out = "-";
    std::string svg;
};

struct GofOptions {
    std::string a;
    std::string b;
    std::size_t mc = 10000;
    std::uint64_t seed = 0;
    std::string out = "-";
};

struct TransformOptions {
    std::string data = "-";
    std::string mode = "pseudo";
    std::optional<std::size_t> blocks;
    std::string out = "-";
};

void run_synth(const SynthOptions& o, const Provenance& p);
void run_fit(const FitOptions& o, const Provenance& p);
void run_sample(const SampleOptions& o, const Provenance& p);
void run_eval_stdf(const EvalStdfOptions& o, const Provenance& p);
void run_eval_lambda(const EvalLambdaOptions& o, const Provenance& p);
void run_gof(const GofOptions& o, const Provenance& p);
void run_transform(const TransformOptions& o, const Provenance& p);

}  // namespace archimax::cli
