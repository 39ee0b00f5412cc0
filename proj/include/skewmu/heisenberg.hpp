#pragma once

// Arithmetic on the 3-dimensional Heisenberg group G, its integer lattice Gamma,
// coset representatives of Gamma\G, Mal'cev coordinates and the induced metrics.
//
// An element (x, y, z) stands for the unipotent matrix
//
//     | 1  y  z |
//     | 0  1  x |
//     | 0  0  1 |
//
// so that (g*h).z = g.z + h.z + g.y * h.x. Cosets are right cosets Gamma g, and the
// lattice acts on the left.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "numeric.hpp"

namespace skewmu {

struct HeisElement {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const HeisElement&, const HeisElement&) = default;
};

struct LatticeElement {
    std::int64_t a = 0;
    std::int64_t b = 0;
    std::int64_t c = 0;

    HeisElement element() const noexcept {
        return {static_cast<double>(a), static_cast<double>(b), static_cast<double>(c)};
    }

    friend bool operator==(const LatticeElement&, const LatticeElement&) = default;
};

/// Canonical representative of a coset Gamma g: every coordinate lies in [0,1).
/// Only reduce() and NilPoint::from_unit_cube() build one.
class NilPoint {
public:
    NilPoint() = default;

    const HeisElement& rep() const noexcept { return rep_; }

    /// Wraps coordinates already in the unit cube (e.g. grid points). Out-of-range input is reduced.
    static NilPoint from_unit_cube(double x, double y, double z);

    friend bool operator==(const NilPoint&, const NilPoint&) = default;

private:
    explicit NilPoint(HeisElement rep) noexcept : rep_(rep) {}
    HeisElement rep_{};

    friend std::pair<NilPoint, LatticeElement> reduce(const HeisElement& g) noexcept;
};

/// A point (t, Gamma g) of T x Gamma\G.
struct ProductPoint {
    double t = 0.0;
    NilPoint p{};

    friend bool operator==(const ProductPoint&, const ProductPoint&) = default;
};

inline HeisElement mul(const HeisElement& g, const HeisElement& h) noexcept {
    return {g.x + h.x, g.y + h.y, g.z + h.z + g.y * h.x};
}

inline HeisElement inv(const HeisElement& g) noexcept {
    return {-g.x, -g.y, g.x * g.y - g.z};
}

inline LatticeElement mul(const LatticeElement& g, const LatticeElement& h) noexcept {
    return {g.a + h.a, g.b + h.b, g.c + h.c + g.b * h.a};
}

inline LatticeElement inv(const LatticeElement& g) noexcept {
    return {-g.a, -g.b, g.a * g.b - g.c};
}

/// Mal'cev coordinates kappa(x, y, z) = (x, y, z - xy).
inline std::array<double, 3> malcev_kappa(const HeisElement& g) noexcept {
    return {g.x, g.y, g.z - g.x * g.y};
}

inline HeisElement malcev_inverse(const std::array<double, 3>& k) noexcept {
    return {k[0], k[1], k[2] + k[0] * k[1]};
}

/// l-infinity norm of the Mal'cev coordinates.
inline double kappa_norm(const HeisElement& g) noexcept {
    const auto k = malcev_kappa(g);
    return std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
}

namespace detail {

// Splits x into (floor, frac) with frac in [0,1) even when x - floor(x) rounds to 1.
inline std::pair<double, double> floor_frac(double x) noexcept {
    double fl = std::floor(x);
    double fr = x - fl;
    if (fr >= 1.0) {
        fl += 1.0;
        fr = 0.0;
    }
    return {fl, fr};
}

}  // namespace detail

/// Returns (p, gamma) with gamma * g = p.rep() and p.rep() in the unit cube.
/// The x coordinate is fixed first, then y, then z.
inline std::pair<NilPoint, LatticeElement> reduce(const HeisElement& g) noexcept {
    const auto [fx, rx] = detail::floor_frac(g.x);
    const auto [fy, ry] = detail::floor_frac(g.y);
    const double b = -fy;
    const auto [fz, rz] = detail::floor_frac(g.z + b * g.x);
    LatticeElement gamma{static_cast<std::int64_t>(-fx), static_cast<std::int64_t>(b),
                         static_cast<std::int64_t>(-fz)};
    return {NilPoint(HeisElement{rx, ry, rz}), gamma};
}

inline NilPoint NilPoint::from_unit_cube(double x, double y, double z) {
    return reduce(HeisElement{x, y, z}).first;
}

/// One chain segment: min(|kappa(g^-1 h)|, |kappa(h^-1 g)|).
inline double segment_length(const HeisElement& g, const HeisElement& h) noexcept {
    return std::min(kappa_norm(mul(inv(g), h)), kappa_norm(mul(inv(h), g)));
}

namespace detail {

inline double chain_length(const HeisElement& g, const std::vector<HeisElement>& mids,
                           const HeisElement& h) noexcept {
    double total = 0.0;
    HeisElement prev = g;
    for (const auto& m : mids) {
        total += segment_length(prev, m);
        prev = m;
    }
    return total + segment_length(prev, h);
}

inline double d_G_upper_oriented(const HeisElement& g, const HeisElement& h, int depth) {
    double best = segment_length(g, h);
    if (depth < 2) return best;

    const auto k = malcev_kappa(mul(inv(g), h));
    // Midpoint candidates: axis-aligned partial moves and Mal'cev bisection.
    const std::array<HeisElement, 5> cand{
        mul(g, malcev_inverse({k[0], 0.0, 0.0})),
        mul(g, malcev_inverse({0.0, k[1], 0.0})),
        mul(g, malcev_inverse({k[0], k[1], 0.0})),
        mul(g, malcev_inverse({0.0, 0.0, k[2]})),
        mul(g, malcev_inverse({0.5 * k[0], 0.5 * k[1], 0.5 * k[2]})),
    };

    std::vector<HeisElement> mids;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        mids.assign(1, cand[i]);
        best = std::min(best, chain_length(g, mids, h));
        if (depth < 3) continue;
        for (std::size_t j = 0; j < cand.size(); ++j) {
            if (j == i) continue;
            mids.assign({cand[i], cand[j]});
            best = std::min(best, chain_length(g, mids, h));
        }
    }
    // Uniform subdivision along the Mal'cev straight line.
    for (int parts = 2; parts <= depth; ++parts) {
        mids.clear();
        for (int i = 1; i < parts; ++i) {
            const double s = static_cast<double>(i) / parts;
            mids.push_back(mul(g, malcev_inverse({s * k[0], s * k[1], s * k[2]})));
        }
        best = std::min(best, chain_length(g, mids, h));
    }
    return best;
}

}  // namespace detail

/// Upper bound on d_G(g, h) from chains of at most `depth` segments through a fixed
/// candidate set. Depth 1 is min(|kappa(g^-1 h)|, |kappa(h^-1 g)|); larger depth never
/// increases the bound.
inline double d_G_upper(const HeisElement& g, const HeisElement& h, int depth = 1) {
    if (depth <= 1) return segment_length(g, h);
    return std::min(detail::d_G_upper_oriented(g, h, depth), detail::d_G_upper_oriented(h, g, depth));
}

/// Upper bound on d_{Gamma\G}(p, q): min over gamma with |a|,|b|,|c| <= window of
/// d_G_upper(p.rep, gamma * q.rep, 1). The c-minimization is done in closed form
/// (each kappa component is affine in c), so the result is the exact window minimum.
inline double d_nil(const NilPoint& p, const NilPoint& q, int window = 3) noexcept {
    const HeisElement& g = p.rep();
    const HeisElement& r = q.rep();
    const double w = static_cast<double>(window);
    double best = std::numeric_limits<double>::infinity();
    for (int a = -window; a <= window; ++a) {
        const double X = a + r.x - g.x;
        if (std::abs(X) >= best) continue;
        for (int b = -window; b <= window; ++b) {
            const double Y = b + r.y - g.y;
            const double xy = std::max(std::abs(X), std::abs(Y));
            if (xy >= best) continue;
            // h = gamma * r has h.z = c + r.z + b * r.x; Z = z-entry of g^-1 h without c.
            const double Z0 = (r.z - g.z) + b * r.x - g.y * X;
            // |kappa(g^-1 h)| uses Z - XY, |kappa(h^-1 g)| uses Z.
            for (const double offset : {Z0 - X * Y, Z0}) {
                const double c = std::clamp(std::nearbyint(-offset), -w, w);
                best = std::min(best, std::max(xy, std::abs(c + offset)));
            }
        }
    }
    return best;
}

inline double d_prod(const ProductPoint& P, const ProductPoint& Q, int window = 3) noexcept {
    return std::max(circle_dist(P.t, Q.t), d_nil(P.p, Q.p, window));
}

/// Coordinate-wise distance of two cosets modulo the lattice: min over small gamma of the
/// max-norm of gamma * q.rep - p.rep. Used to compare reps that may sit across a cube face.
inline double coset_coord_distance(const NilPoint& p, const NilPoint& q, int window = 1) noexcept {
    double best = std::numeric_limits<double>::infinity();
    for (int a = -window; a <= window; ++a)
        for (int b = -window; b <= window; ++b)
            for (int c = -window; c <= window; ++c) {
                const HeisElement h = mul(LatticeElement{a, b, c}.element(), q.rep());
                best = std::min(best, std::max({std::abs(h.x - p.rep().x), std::abs(h.y - p.rep().y),
                                                std::abs(h.z - p.rep().z)}));
            }
    return best;
}

}  // namespace skewmu
