#pragma once

// Mobius correlation sums along orbits, Mobius-weighted exponential sums over
// progressions, the residue-class reduction for rational rotations, and control baselines.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "flows.hpp"
#include "mobius.hpp"
#include "numeric.hpp"
#include "observables.hpp"

namespace skewmu {

enum class Weights { mobius, ones };

struct CorrelationPoint {
    std::int64_t n = 0;
    complex average{};
};

/// (1/n) sum_{k=1}^{n} w(k) obs(T^k P0) at each checkpoint, in one pass over the orbit.
/// w = mu, or the all-ones control sequence.
template <class Obs>
std::vector<CorrelationPoint> mobius_correlation(const FlowSpec& flow, const Obs& obs, const ProductPoint& P0,
                                                 std::int64_t N, std::span<const std::int64_t> checkpoints,
                                                 const MobiusTable* mu, Weights weights = Weights::mobius) {
    if (N < 0) throw validation_error("mobius_correlation: N must be nonnegative");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw validation_error("mobius_correlation: checkpoints must be sorted");
    for (const auto c : checkpoints)
        if (c < 1 || c > N) throw validation_error("mobius_correlation: checkpoint " + std::to_string(c) + " outside [1, N]");
    if (weights == Weights::mobius) {
        if (mu == nullptr) throw validation_error("mobius_correlation: no mobius table");
        mu->require(N);
    }
    std::vector<CorrelationPoint> out;
    out.reserve(checkpoints.size());
    compensated_sum<complex> acc;
    OrbitStream orbit(flow, P0);
    std::size_t next = 0;
    for (std::int64_t k = 1; k <= N && next < checkpoints.size(); ++k) {
        orbit.advance();
        const int w = weights == Weights::mobius ? (*mu)(k) : 1;
        if (w != 0) acc.add(static_cast<double>(w) * complex(obs.eval(orbit.current())));
        while (next < checkpoints.size() && checkpoints[next] == k) {
            out.push_back({k, acc.value() / static_cast<double>(k)});
            ++next;
        }
    }
    return out;
}

namespace detail {

inline void require_power_fits(std::int64_t N, std::size_t degree) {
    long double p = 1.0L;
    for (std::size_t d = 0; d < degree; ++d) p *= static_cast<long double>(N);
    if (p > 4.0e18L)
        throw validation_error("mu_exponential_sum: N^deg exceeds the exact-phase range (2^62)");
}

/// sum_d c_d n^d mod 1, each term by an error-free product.
inline double poly_phase(std::span<const double> coeffs, std::int64_t n) noexcept {
    double ph = 0.0;
    std::int64_t pw = 1;
    for (std::size_t d = 0; d < coeffs.size(); ++d) {
        if (d > 0) pw *= n;
        ph += frac_mul(coeffs[d], pw);
    }
    return frac(ph);
}

}  // namespace detail

/// sum over n <= N, n = a mod q of mu(n) e(f(n)), f(n) = sum_d coeffs[d] n^d.
inline complex mu_exponential_sum(std::span<const double> coeffs, std::int64_t a, std::int64_t q, std::int64_t N,
                                  const MobiusTable& mu) {
    if (q < 1 || a < 0 || a >= q) throw validation_error("mu_exponential_sum: need 0 <= a < q");
    if (N <= 0) return {};
    mu.require(N);
    detail::require_power_fits(N, coeffs.empty() ? 0 : coeffs.size() - 1);
    compensated_sum<complex> s;
    for (std::int64_t n = a == 0 ? q : a; n <= N; n += q) {
        const int w = mu(n);
        if (w != 0) s.add(static_cast<double>(w) * expi(detail::poly_phase(coeffs, n)));
    }
    return s.value();
}

/// gamma(h, b) = sum_{l < b} h(l alpha + t0) for a rational rotation.
inline double residue_sum(const FourierSeries& h, const Rotation& rot, double t0, std::int64_t b) {
    compensated_sum<double> s;
    for (std::int64_t l = 0; l < b; ++l) s.add(h.eval_real(rot.advance(t0, l)));
    return s.value();
}

/// Per-residue quadratic phase P(n; b) = c2 n^2 + c1 n + c0 and the affine S-sums
/// S_i(n) = slope_i n + offset_i(b) for n = b mod q.
struct ResiduePolynomial {
    std::int64_t b = 0;
    double s1_offset = 0.0;
    double s2_offset = 0.0;
    double s3_offset = 0.0;
    double c2 = 0.0;
    double c1 = 0.0;
    double c0 = 0.0;
};

struct RationalReduction {
    std::int64_t p = 0;
    std::int64_t q = 1;
    double gamma_phi = 0.0;  // gamma(h) = gamma(h, q) / q
    double gamma_psi = 0.0;
    double gamma_eta = 0.0;
    double rho_phase = 0.0;  // constant part of the phase
    std::vector<ResiduePolynomial> residues;
    double max_sum_error = 0.0;  // S-sum formula vs direct sums over the check range
    std::int64_t n_check = 0;

    double s1(std::int64_t n) const noexcept {
        const auto& r = residues[static_cast<std::size_t>(n % q)];
        return static_cast<double>(n) * gamma_phi + r.s1_offset;
    }
    double s2(std::int64_t n) const noexcept {
        const auto& r = residues[static_cast<std::size_t>(n % q)];
        return static_cast<double>(n) * gamma_psi + r.s2_offset;
    }
    double s3(std::int64_t n) const noexcept {
        const auto& r = residues[static_cast<std::size_t>(n % q)];
        return static_cast<double>(n) * gamma_eta + r.s3_offset;
    }
    double phase(std::int64_t n) const noexcept {
        const auto& r = residues[static_cast<std::size_t>(n % q)];
        return frac(frac_mul(r.c2, n * n) + frac_mul(r.c1, n) + r.c0);
    }
};

/// Residue-class structure of the orbit phase for a T flow with alpha = p/q and a class-A
/// observable built on an unstarred theta function:
///   obs(T^n P0) = e(rho_phase + P(n; n mod q)) * theta_k_sum(x0 + S1, y0 + S1).
inline RationalReduction rational_alpha_reduction(const FlowSpec& flow, const ClassAObservable& obs,
                                                  const ProductPoint& P0, std::int64_t n_check = 1000) {
    if (flow.kind != FlowKind::T) throw validation_error("rational_alpha_reduction needs a T flow");
    if (!flow.rot.is_rational()) throw validation_error("rational_alpha_reduction needs a rational alpha");
    if (obs.theta.starred || obs.conjugated)
        throw validation_error("rational_alpha_reduction supports unstarred, unconjugated theta factors");
    RationalReduction R;
    R.p = flow.rot.p;
    R.q = flow.rot.q;
    const double t0 = P0.t;
    const FourierSeries eta = square(flow.phi);
    const double qd = static_cast<double>(R.q);
    R.gamma_phi = residue_sum(flow.phi, flow.rot, t0, R.q) / qd;
    R.gamma_psi = residue_sum(flow.psi, flow.rot, t0, R.q) / qd;
    R.gamma_eta = residue_sum(eta, flow.rot, t0, R.q) / qd;

    const HeisElement& g0 = P0.p.rep();
    const int m = obs.theta.m;
    const double md = m;
    const double K = obs.xi2 + obs.theta.j + obs.xi3 + md * g0.y;
    R.rho_phase = frac(obs.xi1 * t0 + (obs.xi2 + obs.theta.j) * g0.x + obs.xi3 * g0.y + md * g0.z);
    const double alpha = flow.rot.alpha;
    for (std::int64_t b = 0; b < R.q; ++b) {
        ResiduePolynomial r;
        r.b = b;
        const double bd = static_cast<double>(b);
        r.s1_offset = residue_sum(flow.phi, flow.rot, t0, b) - bd * R.gamma_phi;
        r.s2_offset = residue_sum(flow.psi, flow.rot, t0, b) - bd * R.gamma_psi;
        r.s3_offset = residue_sum(eta, flow.rot, t0, b) - bd * R.gamma_eta;
        const double c1 = R.gamma_phi, d1 = r.s1_offset;
        r.c2 = 0.5 * md * c1 * c1;
        r.c1 = obs.xi1 * alpha + K * c1 + md * (c1 * d1 - 0.5 * R.gamma_eta + R.gamma_psi);
        r.c0 = K * d1 + md * (0.5 * d1 * d1 - 0.5 * r.s3_offset + r.s2_offset);
        R.residues.push_back(r);
    }

    R.n_check = n_check;
    compensated_sum<double> s1, s2, s3;
    for (std::int64_t n = 0; n <= n_check; ++n) {
        R.max_sum_error = std::max({R.max_sum_error, std::abs(s1.value() - R.s1(n)), std::abs(s2.value() - R.s2(n)),
                                    std::abs(s3.value() - R.s3(n))});
        const double t = flow.rot.advance(t0, n);
        const double v = flow.phi.eval_real(t);
        s1.add(v);
        s2.add(flow.psi.eval_real(t));
        s3.add(v * v);
    }
    return R;
}

/// sum_{n <= N} mu(n) obs(T^n P0) reassembled residue class by residue class from the
/// quadratic phases, with the theta k-sum evaluated directly.
inline complex reassembled_correlation(const RationalReduction& R, const ClassAObservable& obs, const ProductPoint& P0,
                                       std::int64_t N, const MobiusTable& mu) {
    mu.require(N);
    const HeisElement& g0 = P0.p.rep();
    compensated_sum<complex> total;
    for (std::int64_t b = 0; b < R.q; ++b) {
        compensated_sum<complex> part;
        for (std::int64_t n = b == 0 ? R.q : b; n <= N; n += R.q) {
            const int w = mu(n);
            if (w == 0) continue;
            const double s1 = R.s1(n);
            part.add(static_cast<double>(w) * expi(R.phase(n)) * obs.theta.gaussian_sum(g0.x + s1, g0.y + s1));
        }
        total.add(part.value());
    }
    return expi(R.rho_phase) * total.value();
}

struct ControlStats {
    double mertens_ratio = 0.0;
    double squarefree_density = 0.0;
};

/// ((1/N) sum mu(n), (1/N) sum mu(n)^2).
inline ControlStats control_stats(const MobiusTable& mu, std::int64_t N) {
    if (N < 1) throw validation_error("control_stats: N must be positive");
    mu.require(N);
    std::int64_t m = 0, sf = 0;
    for (std::int64_t n = 1; n <= N; ++n) {
        const int v = mu(n);
        m += v;
        sf += v != 0;
    }
    const double Nd = static_cast<double>(N);
    return {static_cast<double>(m) / Nd, static_cast<double>(sf) / Nd};
}

}  // namespace skewmu
