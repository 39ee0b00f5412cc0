#pragma once

// Skew products on T x Gamma\G:
//
//   T       (t, Gamma g) -> (t + alpha, Gamma g (phi(t), phi(t), psi(t)))
//   S       (t, Gamma g) -> (t + alpha, Gamma g (phi1(t), phi2(t), psi(t)))
//   T1      (t, Gamma g) -> (t + alpha, Gamma g (phi1(t), phi1(t), phi1(t)^2/2 - eta1(t)/2 + psi1(t)))
//
// with phi1, eta1, psi1 the resonant parts; the torus factor maps; closed-form orbits from
// the ergodic sums S1, S2, S3; and the conjugator built from the cobounding functions.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "continued_fraction.hpp"
#include "error.hpp"
#include "fourier.hpp"
#include "heisenberg.hpp"
#include "numeric.hpp"

namespace skewmu {

/// Circle rotation by alpha. A rational alpha = p/q is advanced exactly.
struct Rotation {
    double alpha = 0.0;
    std::int64_t p = 0;
    std::int64_t q = 0;  // q > 0 marks an exact rational

    static Rotation irrational(double a) { return {frac(a), 0, 0}; }
    static Rotation rational(std::int64_t p, std::int64_t q) {
        if (q <= 0) throw validation_error("rotation denominator must be positive");
        const std::int64_t r = ((p % q) + q) % q;
        return {static_cast<double>(r) / static_cast<double>(q), r, q};
    }

    bool is_rational() const noexcept { return q > 0; }

    /// t0 + n alpha mod 1, by multiplication rather than repeated addition.
    double advance(double t0, std::int64_t n) const noexcept {
        if (is_rational()) {
            const auto r = static_cast<std::int64_t>((static_cast<__int128>(n % q + q) % q * p) % q);
            return frac(t0 + static_cast<double>(r) / static_cast<double>(q));
        }
        return frac(t0 + frac_mul(alpha, n));
    }
};

enum class FlowKind { T, S_general, T1, torus2, torus3 };

inline std::string to_string(FlowKind k) {
    switch (k) {
        case FlowKind::T: return "T";
        case FlowKind::S_general: return "S_general";
        case FlowKind::T1: return "T1";
        case FlowKind::torus2: return "torus2";
        case FlowKind::torus3: return "torus3";
    }
    return "?";
}

struct FlowSpec {
    FlowKind kind = FlowKind::T;
    Rotation rot{};
    FourierSeries phi;   // T, torus3; x-entry of S_general; h of torus2
    FourierSeries phi2;  // y-entry of S_general
    FourierSeries psi;   // center entry of T and S_general
    // Resonant data of T1.
    FourierSeries phi1;
    FourierSeries eta1;
    FourierSeries psi1;
};

inline constexpr double mean_zero_tolerance = 1e-12;

inline void require_real(const FourierSeries& f, const char* name) {
    if (!f.real_valued() || f.hermitian_defect() > 1e-12)
        throw validation_error(std::string(name) + " must be a real-valued series");
}

inline FlowSpec make_T(Rotation rot, FourierSeries phi, FourierSeries psi) {
    require_real(phi, "phi");
    require_real(psi, "psi");
    if (std::abs(phi.coeff(0)) > mean_zero_tolerance)
        throw validation_error("flow T requires a mean-zero phi (phi(0) = " + std::to_string(phi.coeff(0).real()) + ")");
    FlowSpec f;
    f.kind = FlowKind::T;
    f.rot = rot;
    f.phi = std::move(phi);
    f.psi = std::move(psi);
    return f;
}

inline FlowSpec make_S(Rotation rot, FourierSeries phi1, FourierSeries phi2, FourierSeries psi) {
    require_real(phi1, "phi1");
    require_real(phi2, "phi2");
    require_real(psi, "psi");
    FlowSpec f;
    f.kind = FlowKind::S_general;
    f.rot = rot;
    f.phi = std::move(phi1);
    f.phi2 = std::move(phi2);
    f.psi = std::move(psi);
    return f;
}

inline FlowSpec make_T1(Rotation rot, FourierSeries phi1, FourierSeries eta1, FourierSeries psi1) {
    FlowSpec f;
    f.kind = FlowKind::T1;
    f.rot = rot;
    f.phi1 = std::move(phi1);
    f.eta1 = std::move(eta1);
    f.psi1 = std::move(psi1);
    return f;
}

inline FlowSpec make_torus2(Rotation rot, FourierSeries h) {
    FlowSpec f;
    f.kind = FlowKind::torus2;
    f.rot = rot;
    f.phi = std::move(h);
    return f;
}

inline FlowSpec make_torus3(Rotation rot, FourierSeries phi) {
    FlowSpec f;
    f.kind = FlowKind::torus3;
    f.rot = rot;
    f.phi = std::move(phi);
    return f;
}

/// Group element multiplied on the right of the fiber at base point t.
inline HeisElement cocycle(const FlowSpec& flow, double t) {
    switch (flow.kind) {
        case FlowKind::T: {
            const double a = flow.phi.eval_real(t);
            return {a, a, flow.psi.eval_real(t)};
        }
        case FlowKind::S_general:
            return {flow.phi.eval_real(t), flow.phi2.eval_real(t), flow.psi.eval_real(t)};
        case FlowKind::T1: {
            const double a = flow.phi1.eval_real(t);
            return {a, a, 0.5 * a * a - 0.5 * flow.eta1.eval_real(t) + flow.psi1.eval_real(t)};
        }
        default:
            throw validation_error("cocycle: flow kind " + to_string(flow.kind) + " has no Heisenberg fiber");
    }
}

inline ProductPoint step(const FlowSpec& flow, const ProductPoint& P) {
    const HeisElement inc = cocycle(flow, P.t);
    return {frac(P.t + flow.rot.alpha), reduce(mul(P.p.rep(), inc)).first};
}

/// Sequential orbit T^n(P0), n = 0, 1, 2, ...; the base coordinate is recomputed from n.
class OrbitStream {
public:
    OrbitStream(const FlowSpec& flow, ProductPoint P0) : flow_(&flow), t0_(P0.t), cur_(P0) {}

    const ProductPoint& current() const noexcept { return cur_; }
    std::int64_t index() const noexcept { return n_; }

    const ProductPoint& advance() {
        const HeisElement inc = cocycle(*flow_, cur_.t);
        ++n_;
        cur_.p = reduce(mul(cur_.p.rep(), inc)).first;
        cur_.t = flow_->rot.advance(t0_, n_);
        return cur_;
    }

private:
    const FlowSpec* flow_;
    double t0_;
    ProductPoint cur_;
    std::int64_t n_ = 0;
};

inline ProductPoint orbit_iterate(const FlowSpec& flow, const ProductPoint& P0, std::int64_t n) {
    OrbitStream s(flow, P0);
    for (std::int64_t i = 0; i < n; ++i) s.advance();
    return s.current();
}

enum class SumMethod { direct, geometric };

/// The three ergodic sums driving the fiber: first is the x/y increment, second the
/// sum of squares (S3 or H_n), third the center sum (S2 or Psi_n).
struct ErgodicSums {
    double s1 = 0.0;
    double s3 = 0.0;
    double s2 = 0.0;

    /// (s1, s1, s1^2/2 - s3/2 + s2)
    HeisElement element() const noexcept { return {s1, s1, 0.5 * s1 * s1 - 0.5 * s3 + s2}; }
};

/// Ergodic sums of a T or T1 flow over n steps from t0.
inline ErgodicSums ergodic_sums(const FlowSpec& flow, double t0, std::int64_t n, SumMethod method = SumMethod::direct) {
    if (n < 0) throw validation_error("ergodic_sums: n must be nonnegative");
    const bool is_t = flow.kind == FlowKind::T;
    if (!is_t && flow.kind != FlowKind::T1) throw validation_error("closed-form orbits need a T or T1 flow");
    const FourierSeries& x_series = is_t ? flow.phi : flow.phi1;
    const FourierSeries& c_series = is_t ? flow.psi : flow.psi1;
    if (method == SumMethod::geometric) {
        const double a = flow.rot.alpha;
        const FourierSeries sq = is_t ? square(flow.phi) : flow.eta1;
        return {BirkhoffCache(x_series, a).query(n, t0), BirkhoffCache(sq, a).query(n, t0),
                BirkhoffCache(c_series, a).query(n, t0)};
    }
    compensated_sum<double> s1, s2, s3;
    for (std::int64_t l = 0; l < n; ++l) {
        const double t = flow.rot.advance(t0, l);
        const double v = x_series.eval_real(t);
        s1.add(v);
        s3.add(is_t ? v * v : flow.eta1.eval_real(t));
        s2.add(c_series.eval_real(t));
    }
    return {s1.value(), s3.value(), s2.value()};
}

/// T^n(P0) = (t0 + n alpha, Gamma g0 (S1, S1, S1^2/2 - S3/2 + S2)) without n group products.
inline ProductPoint orbit_closed_form(const FlowSpec& flow, const ProductPoint& P0, std::int64_t n,
                                      SumMethod method = SumMethod::direct) {
    const ErgodicSums s = ergodic_sums(flow, P0.t, n, method);
    return {flow.rot.advance(P0.t, n), reduce(mul(P0.p.rep(), s.element())).first};
}

struct TorusPoint3 {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// (t, Gamma(x, y, z)) -> (t, x, y).
inline TorusPoint3 torus_factor(const ProductPoint& P) noexcept { return {P.t, P.p.rep().x, P.p.rep().y}; }

/// (t, x, y) -> (t + alpha, x + phi(t), y + phi(t)) mod 1.
inline TorusPoint3 torus3_step(const FlowSpec& flow, const TorusPoint3& P) {
    const double a = flow.phi.eval_real(P.t);
    return {frac(P.t + flow.rot.alpha), frac(P.x + a), frac(P.y + a)};
}

/// (x, y) -> (x + alpha, y + h(x)) mod 1.
inline std::pair<double, double> torus2_step(const FlowSpec& flow, double x, double y) {
    return {frac(x + flow.rot.alpha), frac(y + flow.phi.eval_real(x))};
}

/// Cobounding data of the conjugator S and the reduced flow T1 = S^-1 T S.
struct Conjugacy {
    FlowSpec T;
    FlowSpec T1;
    FourierSeries phi1, phi2, eta1, eta2, psi1, psi2;
    FourierSeries g_phi, g_eta, g_psi;
    FourierSeries g_phi_sq;  // square(g_phi), by convolution
    bool sharp_empty = false;
    double tail_bound = 0.0;
    double uncertified_remainder = 0.0;
};

/// Splits phi, eta = phi^2 and psi over M_1(B) / M_2(B), solves the cohomological
/// equations for the non-resonant parts and assembles T1. When Q_sharp(B) is empty the
/// non-resonant parts are all nonzero modes, so the g series are the tilded ones and T1
/// is the affine map by (0, 0, -eta(0)/2 + psi(0)).
inline Conjugacy build_conjugacy(const FourierSeries& phi, const FourierSeries& psi, const ContinuedFraction& cf,
                                 const DenominatorClassification& cls, const TailProfile& profile,
                                 std::int64_t truncation) {
    Conjugacy c;
    const Rotation rot = Rotation::irrational(cf.alpha());
    c.T = make_T(rot, phi, psi);
    const FourierSeries eta = square(phi);
    std::tie(c.phi1, c.phi2) = decompose(phi, cls, cf);
    std::tie(c.eta1, c.eta2) = decompose(eta, cls, cf);
    std::tie(c.psi1, c.psi2) = decompose(psi, cls, cf);
    const auto cp = cobound(c.phi2, cf, cls, profile, truncation);
    const auto ce = cobound(c.eta2, cf, cls, profile, 2 * truncation);
    const auto cs = cobound(c.psi2, cf, cls, profile, truncation);
    c.g_phi = cp.g;
    c.g_eta = ce.g;
    c.g_psi = cs.g;
    c.g_phi_sq = square(c.g_phi);
    c.tail_bound = cp.tail_bound + ce.tail_bound + cs.tail_bound;
    c.uncertified_remainder = cp.uncertified_remainder + ce.uncertified_remainder + cs.uncertified_remainder;
    c.sharp_empty = cls.sharp_indices().empty();
    c.T1 = make_T1(rot, c.phi1, c.eta1, c.psi1);
    return c;
}

enum class Direction { forward, inverse };

/// Fiber element of S at t: (g_phi, g_phi, g_phi^2/2 - g_eta/2 + g_psi).
inline HeisElement conjugator_element(const Conjugacy& c, double t) {
    const double gp = c.g_phi.eval_real(t);
    return {gp, gp, 0.5 * c.g_phi_sq.eval_real(t) - 0.5 * c.g_eta.eval_real(t) + c.g_psi.eval_real(t)};
}

/// S (forward) or S^-1 (inverse); the base coordinate is unchanged.
inline ProductPoint conjugator(const Conjugacy& c, const ProductPoint& P, Direction dir) {
    HeisElement e = conjugator_element(c, P.t);
    if (dir == Direction::inverse) e = inv(e);
    return {P.t, reduce(mul(P.p.rep(), e)).first};
}

/// sup over the sample of d(S^-1 o F o S (P), T1(P)), where F is `original` (T for the
/// identity to hold; an S_general flow measures how far the simplification fails).
inline double conjugacy_residual(const FlowSpec& original, const Conjugacy& c, std::span<const ProductPoint> sample,
                                 int window = 3) {
    double sup = 0.0;
    for (const auto& P : sample) {
        const ProductPoint lhs = conjugator(c, step(original, conjugator(c, P, Direction::forward)), Direction::inverse);
        const ProductPoint rhs = step(c.T1, P);
        sup = std::max(sup, d_prod(lhs, rhs, window));
    }
    return sup;
}

}  // namespace skewmu
