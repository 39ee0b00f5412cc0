#pragma once

// Finitely supported Fourier series on R/Z, the resonant / non-resonant split over
// M_1(B) / M_2(B), the small-divisor cobounding solver g(t+alpha) - g(t) = f2(t), and
// Birkhoff sums.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "continued_fraction.hpp"
#include "error.hpp"
#include "numeric.hpp"

namespace skewmu {

class FourierSeries {
public:
    struct Term {
        std::int64_t m;
        complex c;
    };

    FourierSeries() = default;

    /// Coefficients are merged by frequency; exact zeros are dropped.
    FourierSeries(const std::map<std::int64_t, complex>& coeffs, bool real_valued) : real_(real_valued) {
        for (const auto& [m, c] : coeffs)
            if (c != complex{}) terms_.push_back({m, c});
    }

    static FourierSeries constant(double c) { return FourierSeries({{0, complex{c, 0.0}}}, true); }
    static FourierSeries cos_mode(std::int64_t m = 1, double amp = 1.0) {
        if (m == 0) return constant(amp);
        return FourierSeries({{m, 0.5 * amp}, {-m, 0.5 * amp}}, true);
    }
    static FourierSeries sin_mode(std::int64_t m = 1, double amp = 1.0) {
        if (m == 0) return {};
        return FourierSeries({{m, complex{0.0, -0.5 * amp}}, {-m, complex{0.0, 0.5 * amp}}}, true);
    }
    static FourierSeries exp_mode(std::int64_t m, complex amp = 1.0) { return FourierSeries({{m, amp}}, false); }

    bool real_valued() const noexcept { return real_; }
    std::span<const Term> terms() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }

    complex coeff(std::int64_t m) const noexcept {
        const auto it = std::lower_bound(terms_.begin(), terms_.end(), m, [](const Term& t, std::int64_t v) { return t.m < v; });
        return it != terms_.end() && it->m == m ? it->c : complex{};
    }

    std::vector<std::int64_t> support() const {
        std::vector<std::int64_t> out;
        out.reserve(terms_.size());
        for (const auto& t : terms_) out.push_back(t.m);
        return out;
    }

    std::int64_t max_frequency() const noexcept {
        std::int64_t r = 0;
        for (const auto& t : terms_) r = std::max(r, t.m < 0 ? -t.m : t.m);
        return r;
    }

    /// Sum of |coefficients|, an upper bound for the sup norm.
    double abs_sum() const noexcept {
        double s = 0.0;
        for (const auto& t : terms_) s += std::abs(t.c);
        return s;
    }

    complex eval(double t) const noexcept {
        complex s{};
        for (const auto& term : terms_) s += term.c * expi(frac_mul(t, term.m));
        return s;
    }

    /// Real part of eval(); the exact value when the series is real-valued.
    double eval_real(double t) const noexcept {
        double s = 0.0;
        for (const auto& term : terms_) {
            const complex e = expi(frac_mul(t, term.m));
            s += term.c.real() * e.real() - term.c.imag() * e.imag();
        }
        return s;
    }

    /// Largest |c(-m) - conj(c(m))| over the support.
    double hermitian_defect() const noexcept {
        double d = 0.0;
        for (const auto& t : terms_) d = std::max(d, std::abs(coeff(-t.m) - std::conj(t.c)));
        return d;
    }

    FourierSeries scaled(complex s) const {
        FourierSeries out = *this;
        for (auto& t : out.terms_) t.c *= s;
        if (s.imag() != 0.0) out.real_ = false;
        return out;
    }

    friend FourierSeries operator+(const FourierSeries& f, const FourierSeries& g) {
        std::map<std::int64_t, complex> acc;
        for (const auto& t : f.terms_) acc[t.m] += t.c;
        for (const auto& t : g.terms_) acc[t.m] += t.c;
        return FourierSeries(acc, f.real_ && g.real_);
    }

    friend FourierSeries operator-(const FourierSeries& f, const FourierSeries& g) { return f + g.scaled(-1.0); }

    /// Keeps the terms whose frequency satisfies pred.
    template <typename Pred>
    FourierSeries filtered(Pred pred) const {
        FourierSeries out;
        out.real_ = real_;
        for (const auto& t : terms_)
            if (pred(t.m)) out.terms_.push_back(t);
        return out;
    }

    friend bool operator==(const FourierSeries& f, const FourierSeries& g) noexcept {
        if (f.terms_.size() != g.terms_.size()) return false;
        for (std::size_t i = 0; i < f.terms_.size(); ++i)
            if (f.terms_[i].m != g.terms_[i].m || f.terms_[i].c != g.terms_[i].c) return false;
        return true;
    }

private:
    std::vector<Term> terms_;  // sorted by frequency, no zero coefficients
    bool real_ = true;
};

/// Coefficient convolution: the series of f(t)^2.
inline FourierSeries square(const FourierSeries& f) {
    std::map<std::int64_t, complex> acc;
    for (const auto& a : f.terms())
        for (const auto& b : f.terms()) acc[a.m + b.m] += a.c * b.c;
    return FourierSeries(acc, f.real_valued());
}

/// (f1, f2) with f1 on M_1(B) and f2 on M_2(B). Throws undecidable_error when a support
/// frequency lies beyond the computed convergents.
inline std::pair<FourierSeries, FourierSeries> decompose(const FourierSeries& f, const DenominatorClassification& cls,
                                                         const ContinuedFraction& cf) {
    std::vector<bool> resonant;
    for (const auto& t : f.terms()) resonant.push_back(m1_member(t.m, cls, cf));
    std::size_t i = 0, j = 0;
    auto f1 = f.filtered([&](std::int64_t) { return resonant[i++]; });
    auto f2 = f.filtered([&](std::int64_t) { return !resonant[j++]; });
    return {f1, f2};
}

/// Assumed coefficient decay |f(m)| <= C |m|^-exponent of the discarded tail.
struct TailProfile {
    double C = 1.0;
    double exponent = 6.0;
};

struct CoboundResult {
    FourierSeries g;
    /// Bound on sup |discarded tail of g| from bands covered by the computed convergents.
    double tail_bound = 0.0;
    /// Contribution of |m| >= q_K, estimated with the non-divisible band bound; it is not
    /// certified because q_{K+1} is unknown.
    double uncertified_remainder = 0.0;
};

namespace detail {

// sum_{m >= lo} m^-s for s > 1, upper bound.
inline double zeta_tail(double lo, double s) {
    if (lo < 1.0) lo = 1.0;
    return std::pow(lo, -s) + std::pow(lo, 1.0 - s) / (s - 1.0);
}

inline long double norm_m_alpha(const ContinuedFraction& cf, std::int64_t m) {
    const long double a = static_cast<long double>(cf.alpha_hp());
    const long double v = a * static_cast<long double>(m);
    return std::fabs(v - std::nearbyint(v));
}

}  // namespace detail

/// Solves g(t + alpha) - g(t) = f2(t) mode-wise: g(m) = f2(m) / (e(m alpha) - 1).
/// `truncation` is the largest modeled frequency: the tail bound covers M_2 frequencies
/// with |m| > truncation under the decay profile.
inline CoboundResult cobound(const FourierSeries& f2, const ContinuedFraction& cf, const DenominatorClassification& cls,
                             const TailProfile& profile, std::int64_t truncation, double small_divisor_floor = 1e-12) {
    const double alpha = cf.alpha();
    std::map<std::int64_t, complex> g;
    for (const auto& t : f2.terms()) {
        if (t.m == 0) throw validation_error("cobound: the zero mode cannot be cobounded");
        const double nm = static_cast<double>(detail::norm_m_alpha(cf, t.m));
        if (nm < small_divisor_floor)
            throw small_divisor_error("cobound: ||m alpha|| = " + std::to_string(nm) + " below floor at m = " +
                                      std::to_string(t.m));
        g[t.m] = t.c / (expi(frac_mul(alpha, t.m)) - 1.0);
    }
    CoboundResult out{FourierSeries(g, f2.real_valued()), 0.0, 0.0};
    if (profile.C == 0.0) return out;
    if (!(profile.exponent > 2.0)) throw validation_error("cobound: tail decay exponent must exceed 2");

    const double C = profile.C;
    const double s = profile.exponent;
    const std::int64_t qK = cf.q(cf.size());
    const std::int64_t direct_end = std::min<std::int64_t>(qK - 1, std::max<std::int64_t>(truncation, 1 << 16));

    // Direct summation with a rounding margin on ||m alpha||.
    for (std::int64_t m = truncation + 1; m <= direct_end; ++m) {
        if (m1_member(m, cls, cf)) continue;
        const long double nm = detail::norm_m_alpha(cf, m) - 1e-15L;
        if (nm <= 0) {
            out.tail_bound = std::numeric_limits<double>::infinity();
            return out;
        }
        out.tail_bound += 2.0 * C * std::pow(static_cast<double>(m), -s) / (4.0 * static_cast<double>(nm));
    }
    // Band bounds for q_k <= |m| < q_{k+1} beyond the direct range.
    const std::int64_t from = std::max(direct_end, truncation) + 1;
    for (int k = 1; k < cf.size(); ++k) {
        const std::int64_t hi = cf.q(k + 1);
        if (hi <= from) continue;
        const double lo = static_cast<double>(std::max(cf.q(k), from));
        if (cls.at(k) == QClass::sharp)
            out.tail_bound += C * (detail::zeta_tail(lo, s - 1.0));  // 2 * C m^-s * |m|/2
        else
            out.tail_bound += C * static_cast<double>(hi) * detail::zeta_tail(lo, s);  // 2 * C m^-s * q_{k+1}/2
    }
    if (!cf.terminated())
        out.uncertified_remainder = C * detail::zeta_tail(static_cast<double>(std::max(qK, from)), s - 1.0);
    return out;
}

/// Direct n-term ergodic sum sum_{l<n} f(l alpha + t) with compensated accumulation.
inline complex birkhoff_complex(const FourierSeries& f, double alpha, double t, std::int64_t n) {
    compensated_sum<complex> acc;
    for (std::int64_t l = 0; l < n; ++l) acc.add(f.eval(t + frac_mul(alpha, l)));
    return acc.value();
}

inline double birkhoff(const FourierSeries& f, double alpha, double t, std::int64_t n) {
    compensated_sum<double> acc;
    for (std::int64_t l = 0; l < n; ++l) acc.add(f.eval_real(t + frac_mul(alpha, l)));
    return acc.value();
}

/// Geometric-series evaluation of Birkhoff sums: for each mode,
/// sum_{l<n} c e(m(t + l alpha)) = c e(mt) (e(m n alpha) - 1) / (e(m alpha) - 1).
/// Modes with ||m alpha|| below the floor are summed directly.
class BirkhoffCache {
public:
    BirkhoffCache(const FourierSeries& f, double alpha, double floor = 1e-12) : f_(f), alpha_(alpha) {
        for (const auto& t : f.terms()) {
            const double nm = dist_to_int(frac_mul(alpha, t.m));
            if (t.m != 0 && nm >= floor)
                modes_.push_back({t.m, t.c, 1.0 / (expi(frac_mul(alpha, t.m)) - 1.0)});
            else
                slow_.push_back(t);
        }
    }

    complex query_complex(std::int64_t n, double t) const {
        compensated_sum<complex> acc;
        for (const auto& md : modes_) {
            const complex num = expi(frac_mul(alpha_, md.m * n)) - 1.0;
            acc.add(md.c * expi(frac_mul(t, md.m)) * num * md.inv_den);
        }
        if (!slow_.empty()) {
            const FourierSeries rest(to_map(slow_), false);
            acc.add(birkhoff_complex(rest, alpha_, t, n));
        }
        return acc.value();
    }

    double query(std::int64_t n, double t) const { return query_complex(n, t).real(); }

    const FourierSeries& series() const noexcept { return f_; }
    double alpha() const noexcept { return alpha_; }

private:
    struct Mode {
        std::int64_t m;
        complex c;
        complex inv_den;
    };
    static std::map<std::int64_t, complex> to_map(const std::vector<FourierSeries::Term>& v) {
        std::map<std::int64_t, complex> out;
        for (const auto& t : v) out[t.m] = t.c;
        return out;
    }
    FourierSeries f_;
    double alpha_;
    std::vector<Mode> modes_;
    std::vector<FourierSeries::Term> slow_;
};

/// sup over the grid of |Phi_{q_k}(t) - q_k f1(0)| for the resonant part f1, with q_k in Q_sharp(B).
inline double phi_bound_check(const FourierSeries& f1, const ContinuedFraction& cf, const DenominatorClassification& cls,
                              int k_index, std::span<const double> t_grid) {
    if (cls.at(k_index) != QClass::sharp)
        throw validation_error("phi_bound_check: q_" + std::to_string(k_index) + " is not in Q_sharp(B)");
    const std::int64_t qk = cf.q(k_index);
    const double mean = f1.coeff(0).real();
    double sup = 0.0;
    for (const double t : t_grid)
        sup = std::max(sup, std::abs(birkhoff(f1, cf.alpha(), t, qk) - static_cast<double>(qk) * mean));
    return sup;
}

/// 2 pi sum |m| |f(m)|, a Lipschitz constant of f on the circle.
inline double lipschitz_bound(const FourierSeries& f) noexcept {
    double s = 0.0;
    for (const auto& t : f.terms()) s += static_cast<double>(t.m < 0 ? -t.m : t.m) * std::abs(t.c);
    return 2.0 * std::numbers::pi * s;
}

}  // namespace skewmu
