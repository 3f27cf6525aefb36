#pragma once

#include <cstddef>
#include <vector>

namespace archimax {

/// Truncated Taylor series c_0 + c_1 h + ... + c_K h^K of a scalar function
/// around a point, with c_k = f^{(k)}(x)/k!.
class TaylorJet {
public:
    TaylorJet() = default;
    explicit TaylorJet(std::size_t order, double value = 0.0);

    /// The identity jet at x: (x, 1, 0, ...).
    static TaylorJet variable(double x, std::size_t order);

    std::size_t order() const noexcept { return c_.size() - 1; }
    double operator[](std::size_t k) const { return c_[k]; }
    double& operator[](std::size_t k) { return c_[k]; }
    const std::vector<double>& coefficients() const noexcept { return c_; }

    /// k-th derivative, c_k * k!.
    double derivative(std::size_t k) const;

    TaylorJet& operator+=(const TaylorJet& o);
    TaylorJet& operator-=(const TaylorJet& o);
    TaylorJet& operator+=(double s);
    TaylorJet& operator*=(double s);

private:
    std::vector<double> c_;
};

TaylorJet operator+(TaylorJet a, const TaylorJet& b);
TaylorJet operator-(TaylorJet a, const TaylorJet& b);
TaylorJet operator-(const TaylorJet& a);
TaylorJet operator+(TaylorJet a, double s);
TaylorJet operator+(double s, TaylorJet a);
TaylorJet operator-(double s, const TaylorJet& a);
TaylorJet operator*(TaylorJet a, double s);
TaylorJet operator*(double s, TaylorJet a);
TaylorJet operator*(const TaylorJet& a, const TaylorJet& b);
TaylorJet operator/(const TaylorJet& a, const TaylorJet& b);

TaylorJet exp(const TaylorJet& a);
TaylorJet log(const TaylorJet& a);
TaylorJet pow(const TaylorJet& a, double p);

}  // namespace archimax
