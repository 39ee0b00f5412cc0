#pragma once

// Gamma-invariant observables on Gamma\G and T x Gamma\G:
//
//   psi_mj (x,y,z)  = e(mz + jx) sum_k exp(-pi (y + k + j/m)^2) e(mkx)
//   psi*_mj(x,y,z)  = i e(mz + jx) sum_k exp(-pi (y + k + j/m + 1/2)^2) e((y + k + j/m)/2 + mkx)
//
// class A: e(xi1 t + xi2 x + xi3 y) psi(Gamma g), psi one of the above or a conjugate
// class B: f1(t) f2(x, y)

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <utility>

#include "error.hpp"
#include "fourier.hpp"
#include "heisenberg.hpp"
#include "numeric.hpp"

namespace skewmu {

struct ThetaObservable {
    int m = 1;
    int j = 0;
    bool starred = false;
    int k_trunc = 12;

    ThetaObservable() = default;
    ThetaObservable(int m_, int j_, bool starred_ = false, int k_trunc_ = 12)
        : m(m_), j(j_), starred(starred_), k_trunc(k_trunc_) {
        if (m < 1) throw validation_error("theta observable needs m >= 1");
        if (j < 0 || j >= m) throw validation_error("theta observable needs 0 <= j <= m - 1");
        if (k_trunc < 1) throw validation_error("theta observable needs k_trunc >= 1");
    }

    /// Bound on the discarded Gaussian terms: sum over |k| > K of exp(-pi (k - 2)^2).
    double tail_bound() const noexcept {
        double s = 0.0;
        for (int k = k_trunc + 1; k <= k_trunc + 40; ++k) s += 2.0 * std::exp(-std::numbers::pi * (k - 2.0) * (k - 2.0));
        return s;
    }

    /// The k-sum alone, without the e(mz + jx) prefactor. The window is centred where the
    /// Gaussian peaks, so unreduced representatives lose nothing to truncation.
    complex gaussian_sum(double x, double y) const {
        const double shift = y + static_cast<double>(j) / m;
        const double peak = starred ? shift + 0.5 : shift;
        const auto k0 = static_cast<std::int64_t>(std::nearbyint(-peak));
        compensated_sum<complex> s;
        for (std::int64_t k = k0 - k_trunc; k <= k0 + k_trunc; ++k) {
            const double u = peak + static_cast<double>(k);
            const double w = std::exp(-std::numbers::pi * u * u);
            double ph = frac_mul(x, m * k);
            if (starred) ph += 0.5 * (shift + static_cast<double>(k));
            s.add(w * expi(ph));
        }
        return s.value();
    }

    /// Formula at an arbitrary group element.
    complex eval(const HeisElement& g) const {
        complex pre = expi(frac(static_cast<double>(m) * g.z) + frac(static_cast<double>(j) * g.x));
        if (starred) pre *= complex(0.0, 1.0);
        return pre * gaussian_sum(g.x, g.y);
    }

    complex eval(const NilPoint& p) const { return eval(p.rep()); }
};

struct ClassAObservable {
    int xi1 = 0;
    int xi2 = 0;
    int xi3 = 0;
    ThetaObservable theta{};
    bool conjugated = false;

    complex eval(const ProductPoint& P) const {
        const HeisElement& g = P.p.rep();
        complex th = theta.eval(g);
        if (conjugated) th = std::conj(th);
        return expi(frac(xi1 * P.t) + frac(xi2 * g.x) + frac(xi3 * g.y)) * th;
    }

    /// sup |value| <= sup over y of the Gaussian sum, attained near y + j/m integral.
    double sup_bound() const noexcept {
        double s = 0.0;
        for (int k = -theta.k_trunc - 1; k <= theta.k_trunc + 1; ++k) s += std::exp(-std::numbers::pi * k * k);
        return s + theta.tail_bound();
    }
};

/// e(t + x + y + z) sum_k exp(-pi (y + k)^2) e(kx).
inline ClassAObservable preset_fA(int k_trunc = 12) { return {1, 1, 1, ThetaObservable(1, 0, false, k_trunc), false}; }

/// Finitely supported series in two variables: f(x, y) = sum c(m1, m2) e(m1 x + m2 y).
class FourierSeries2 {
public:
    FourierSeries2() = default;
    explicit FourierSeries2(std::map<std::pair<int, int>, complex> coeffs) : coeffs_(std::move(coeffs)) {}

    static FourierSeries2 constant(complex c) { return FourierSeries2(std::map<std::pair<int, int>, complex>{{{0, 0}, c}}); }
    static FourierSeries2 exp_mode(int m1, int m2) {
        return FourierSeries2(std::map<std::pair<int, int>, complex>{{{m1, m2}, complex(1.0, 0.0)}});
    }

    const std::map<std::pair<int, int>, complex>& coeffs() const noexcept { return coeffs_; }

    complex eval(double x, double y) const {
        compensated_sum<complex> s;
        for (const auto& [m, c] : coeffs_) s.add(c * expi(frac_mul(x, m.first) + frac_mul(y, m.second)));
        return s.value();
    }

    double abs_sum() const noexcept {
        double s = 0.0;
        for (const auto& [m, c] : coeffs_) s += std::abs(c);
        return s;
    }

private:
    std::map<std::pair<int, int>, complex> coeffs_;
};

struct ClassBObservable {
    FourierSeries f1;
    FourierSeries2 f2;

    complex eval(const ProductPoint& P) const {
        return f1.eval(P.t) * f2.eval(P.p.rep().x, P.p.rep().y);
    }
};

/// p_m F(Gamma g) = int_0^1 F(Gamma g (0, 0, s)) e(-ms) ds by the trapezoid rule with
/// `quad_points` nodes; exact for trigonometric polynomials in s of degree < quad_points - |m|.
template <class F>
complex project_pm(const F& fn, const NilPoint& p, int m, int quad_points) {
    if (quad_points < 1) throw validation_error("project_pm needs quad_points >= 1");
    const HeisElement& g = p.rep();
    compensated_sum<complex> s;
    for (int i = 0; i < quad_points; ++i) {
        const double u = static_cast<double>(i) / quad_points;
        const NilPoint q = reduce(mul(g, HeisElement{0.0, 0.0, u})).first;
        s.add(complex(fn(q)) * expi(-frac_mul(u, m)));
    }
    return s.value() / static_cast<double>(quad_points);
}

/// The same projection as a new callable on Gamma\G.
template <class F>
auto projected(F fn, int m, int quad_points) {
    return [fn = std::move(fn), m, quad_points](const NilPoint& p) { return project_pm(fn, p, m, quad_points); };
}

}  // namespace skewmu
