#pragma once

#include <cmath>
#include <complex>
#include <type_traits>
#include <cstdint>
#include <numbers>

namespace skewmu {

using complex = std::complex<double>;

/// Fractional part in [0,1). Guards the case where x - floor(x) rounds up to 1.
inline double frac(double x) noexcept {
    double f = x - std::floor(x);
    return f >= 1.0 ? 0.0 : f;
}

/// Distance to the nearest integer, ||x||.
inline double dist_to_int(double x) noexcept {
    return std::abs(x - std::nearbyint(x));
}

/// Circle distance between two points of R/Z.
inline double circle_dist(double s, double t) noexcept {
    return dist_to_int(s - t);
}

/// e(x) = exp(2 pi i x), reduced mod 1 before scaling.
inline complex expi(double x) noexcept {
    const double r = x - std::nearbyint(x);
    const double a = 2.0 * std::numbers::pi * r;
    return {std::cos(a), std::sin(a)};
}

/// frac(c * k) for integer k < 2^53, using fma to recover the rounding error of the product.
inline double frac_mul(double c, std::int64_t k) noexcept {
    const double kd = static_cast<double>(k);
    const double hi = c * kd;
    const double lo = std::fma(c, kd, -hi);
    return frac(frac(hi) + lo);
}

/// Neumaier-compensated running sum.
template <typename T>
class compensated_sum {
public:
    void add(T v) noexcept {
        if constexpr (std::is_same_v<T, complex>) {
            re_.add(v.real());
            im_.add(v.imag());
        } else {
            const T t = sum_ + v;
            if (std::abs(sum_) >= std::abs(v))
                comp_ += (sum_ - t) + v;
            else
                comp_ += (v - t) + sum_;
            sum_ = t;
        }
    }

    T value() const noexcept {
        if constexpr (std::is_same_v<T, complex>)
            return {re_.value(), im_.value()};
        else
            return sum_ + comp_;
    }

private:
    struct empty {};
    using part = std::conditional_t<std::is_same_v<T, complex>, compensated_sum<double>, empty>;
    T sum_{};
    T comp_{};
    [[no_unique_address]] part re_{};
    [[no_unique_address]] part im_{};
};

}  // namespace skewmu
