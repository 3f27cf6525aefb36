#pragma once

#include <memory>
#include <string>

namespace archimax {

/// An Archimedean generator phi: [0, inf) -> [0, 1] with phi(0) = 1,
/// together with the derivatives and inverse that inference needs.
class Generator {
public:
    virtual ~Generator() = default;
    virtual double value(double x) const = 0;
    virtual double d1(double x) const = 0;
    virtual double d2(double x) const = 0;
    /// phi^{-1}(w) for w in (0, 1]; +inf at w = 0 for unbounded support.
    virtual double inverse(double w) const = 0;
    virtual std::string describe() const = 0;
};

/// phi(x) = exp(-x), the extreme-value generator.
class ExpGenerator final : public Generator {
public:
    double value(double x) const override;
    double d1(double x) const override;
    double d2(double x) const override;
    double inverse(double w) const override;
    std::string describe() const override { return "exp"; }
};

/// x -> phi(c x), with the same copula as phi for every c > 0.
class ScaledGenerator final : public Generator {
public:
    ScaledGenerator(std::shared_ptr<const Generator> base, double scale);
    double value(double x) const override { return base_->value(c_ * x); }
    double d1(double x) const override { return c_ * base_->d1(c_ * x); }
    double d2(double x) const override { return c_ * c_ * base_->d2(c_ * x); }
    double inverse(double w) const override { return base_->inverse(w) / c_; }
    std::string describe() const override;
    double scale() const noexcept { return c_; }

private:
    std::shared_ptr<const Generator> base_;
    double c_;
};

/// Cross-checks d1 against central differences of value at a few interior
/// points; returns the largest relative discrepancy.
double generator_consistency(const Generator& phi, double scale = 1.0);

}  // namespace archimax
