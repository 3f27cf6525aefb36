#include "archimax/jet.hpp"

#include <cmath>

#include "archimax/errors.hpp"

namespace archimax {

TaylorJet::TaylorJet(std::size_t order, double value) : c_(order + 1, 0.0) { c_[0] = value; }

TaylorJet TaylorJet::variable(double x, std::size_t order) {
    TaylorJet j(order, x);
    if (order >= 1) j.c_[1] = 1.0;
    return j;
}

double TaylorJet::derivative(std::size_t k) const {
    double f = 1.0;
    for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return c_[k] * f;
}

TaylorJet& TaylorJet::operator+=(const TaylorJet& o) {
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
}

TaylorJet& TaylorJet::operator-=(const TaylorJet& o) {
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

TaylorJet& TaylorJet::operator+=(double s) {
    c_[0] += s;
    return *this;
}

TaylorJet& TaylorJet::operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
}

TaylorJet operator+(TaylorJet a, const TaylorJet& b) { return a += b; }
TaylorJet operator-(TaylorJet a, const TaylorJet& b) { return a -= b; }
TaylorJet operator-(const TaylorJet& a) { return a * -1.0; }
TaylorJet operator+(TaylorJet a, double s) { return a += s; }
TaylorJet operator+(double s, TaylorJet a) { return a += s; }
TaylorJet operator-(double s, const TaylorJet& a) { return (-a) + s; }
TaylorJet operator*(TaylorJet a, double s) { return a *= s; }
TaylorJet operator*(double s, TaylorJet a) { return a *= s; }

TaylorJet operator*(const TaylorJet& a, const TaylorJet& b) {
    const std::size_t K = a.order();
    TaylorJet r(K);
    for (std::size_t k = 0; k <= K; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j <= k; ++j) s += a[j] * b[k - j];
        r[k] = s;
    }
    return r;
}

TaylorJet operator/(const TaylorJet& a, const TaylorJet& b) {
    if (b[0] == 0.0) throw_numeric("jet division by zero");
    const std::size_t K = a.order();
    TaylorJet r(K);
    for (std::size_t k = 0; k <= K; ++k) {
        double s = a[k];
        for (std::size_t j = 1; j <= k; ++j) s -= b[j] * r[k - j];
        r[k] = s / b[0];
    }
    return r;
}

TaylorJet exp(const TaylorJet& a) {
    const std::size_t K = a.order();
    TaylorJet r(K);
    r[0] = std::exp(a[0]);
    for (std::size_t k = 1; k <= K; ++k) {
        double s = 0.0;
        for (std::size_t j = 1; j <= k; ++j) s += static_cast<double>(j) * a[j] * r[k - j];
        r[k] = s / static_cast<double>(k);
    }
    return r;
}

TaylorJet log(const TaylorJet& a) {
    if (!(a[0] > 0.0)) throw_numeric("jet log of non-positive value");
    const std::size_t K = a.order();
    TaylorJet r(K);
    r[0] = std::log(a[0]);
    for (std::size_t k = 1; k <= K; ++k) {
        double s = 0.0;
        for (std::size_t j = 1; j < k; ++j) s += static_cast<double>(j) * r[j] * a[k - j];
        r[k] = (a[k] - s / static_cast<double>(k)) / a[0];
    }
    return r;
}

TaylorJet pow(const TaylorJet& a, double p) {
    if (!(a[0] > 0.0)) throw_numeric("jet power of non-positive value");
    const std::size_t K = a.order();
    TaylorJet r(K);
    r[0] = std::pow(a[0], p);
    for (std::size_t k = 1; k <= K; ++k) {
        double s = 0.0;
        for (std::size_t j = 1; j <= k; ++j)
            s += (p * static_cast<double>(j) - static_cast<double>(k - j)) * a[j] * r[k - j];
        r[k] = s / (static_cast<double>(k) * a[0]);
    }
    return r;
}

}  // namespace archimax
