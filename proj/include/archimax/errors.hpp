#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace archimax {

enum class ErrorKind {
    InvalidInput,
    Numeric,
    TrainingDivergence,
    SamplerDegenerate,
    Config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// Pipeline stage that raised the error, empty outside `fit`.
    const std::string& stage() const noexcept { return stage_; }
    void set_stage(std::string stage) { stage_ = std::move(stage); }

    /// Loss values recorded before a training divergence.
    const std::vector<double>& trace() const noexcept { return trace_; }
    void set_trace(std::vector<double> trace) { trace_ = std::move(trace); }

private:
    ErrorKind kind_;
    std::string stage_;
    std::vector<double> trace_;
};

[[noreturn]] void throw_invalid(const std::string& message);
[[noreturn]] void throw_numeric(const std::string& message);
[[noreturn]] void throw_config(const std::string& message);
[[noreturn]] void throw_degenerate(const std::string& message);
[[noreturn]] void throw_divergence(const std::string& message, std::vector<double> trace);

}  // namespace archimax
