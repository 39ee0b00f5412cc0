#pragma once

// Bowen-averaged distances, greedy covering estimates of the measure complexity s_n,
// the explicit grid F(k) with its shadowing check, and the distality probe.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "continued_fraction.hpp"
#include "error.hpp"
#include "flows.hpp"
#include "fourier.hpp"
#include "heisenberg.hpp"
#include "parallel.hpp"

namespace skewmu {

/// (1/n) sum_{j<n} d(T^j P, T^j Q).
inline double dbar_n(const FlowSpec& flow, const ProductPoint& P, const ProductPoint& Q, std::int64_t n,
                     int window = 3) {
    if (n < 1) throw validation_error("dbar_n: n must be positive");
    OrbitStream a(flow, P), b(flow, Q);
    compensated_sum<double> s;
    for (std::int64_t j = 0; j < n; ++j) {
        if (j > 0) {
            a.advance();
            b.advance();
        }
        s.add(d_prod(a.current(), b.current(), window));
    }
    return s.value() / static_cast<double>(n);
}

/// T^{burn_in + i stride}(P0), i < count.
inline std::vector<ProductPoint> empirical_sample(const FlowSpec& flow, const ProductPoint& P0, std::int64_t burn_in,
                                                  std::int64_t count, std::int64_t stride = 1) {
    if (count < 1) throw validation_error("empirical_sample: count must be positive");
    if (burn_in < 0 || stride < 1) throw validation_error("empirical_sample: need burn_in >= 0 and stride >= 1");
    std::vector<ProductPoint> out;
    out.reserve(static_cast<std::size_t>(count));
    OrbitStream s(flow, P0);
    for (std::int64_t i = 0; i < burn_in; ++i) s.advance();
    out.push_back(s.current());
    for (std::int64_t c = 1; c < count; ++c) {
        for (std::int64_t i = 0; i < stride; ++i) s.advance();
        out.push_back(s.current());
    }
    return out;
}

struct CoveringReport {
    std::int64_t n = 0;
    double epsilon = 0.0;
    std::int64_t centers_used = 0;
    double covered_mass = 0.0;
    std::int64_t sample_size = 0;
    std::vector<std::size_t> centers;
};

/// Pairwise d_bar_n matrix of a sample (row-major, symmetric).
inline std::vector<double> dbar_matrix(const FlowSpec& flow, std::span<const ProductPoint> sample, std::int64_t n,
                                       int window = 3, std::int64_t point_budget = 50'000'000, unsigned threads = 1) {
    const std::size_t S = sample.size();
    if (static_cast<double>(S) * static_cast<double>(n) > static_cast<double>(point_budget))
        throw budget_error("dbar_matrix: sample_size * n exceeds the trajectory budget");
    std::vector<std::vector<ProductPoint>> traj(S);
    parallel_for(S, threads, [&](std::size_t i) {
        auto& tr = traj[i];
        tr.reserve(static_cast<std::size_t>(n));
        OrbitStream s(flow, sample[i]);
        tr.push_back(s.current());
        for (std::int64_t j = 1; j < n; ++j) tr.push_back(s.advance());
    });
    std::vector<double> D(S * S, 0.0);
    parallel_for(S, threads, [&](std::size_t i) {
        for (std::size_t k = i + 1; k < S; ++k) {
            compensated_sum<double> s;
            for (std::int64_t j = 0; j < n; ++j)
                s.add(d_prod(traj[i][static_cast<std::size_t>(j)], traj[k][static_cast<std::size_t>(j)], window));
            D[i * S + k] = s.value() / static_cast<double>(n);
        }
    });
    for (std::size_t i = 0; i < S; ++i)
        for (std::size_t k = 0; k < i; ++k) D[i * S + k] = D[k * S + i];
    return D;
}

/// Greedy cover of the sample (uniform weights) by open d_bar_n balls of radius epsilon,
/// centred at sample points, until the covered mass exceeds 1 - epsilon.
inline CoveringReport greedy_cover(std::span<const double> D, std::size_t S, std::int64_t n, double epsilon) {
    CoveringReport r;
    r.n = n;
    r.epsilon = epsilon;
    r.sample_size = static_cast<std::int64_t>(S);
    std::vector<char> covered(S, 0);
    std::size_t n_cov = 0;
    const double target = (1.0 - epsilon) * static_cast<double>(S);
    while (static_cast<double>(n_cov) <= target) {
        std::size_t best = 0, best_gain = 0;
        for (std::size_t c = 0; c < S; ++c) {
            std::size_t gain = 0;
            for (std::size_t i = 0; i < S; ++i) gain += !covered[i] && D[c * S + i] < epsilon;
            if (gain > best_gain) {
                best_gain = gain;
                best = c;
            }
        }
        if (best_gain == 0) break;
        for (std::size_t i = 0; i < S; ++i)
            if (D[best * S + i] < epsilon && !covered[i]) {
                covered[i] = 1;
                ++n_cov;
            }
        r.centers.push_back(best);
    }
    r.centers_used = static_cast<std::int64_t>(r.centers.size());
    r.covered_mass = static_cast<double>(n_cov) / static_cast<double>(S);
    return r;
}

/// Upper-bound estimator of s_n restricted to the sample.
inline CoveringReport estimate_sn(const FlowSpec& flow, std::span<const ProductPoint> sample, std::int64_t n,
                                  double epsilon, int window = 3, unsigned threads = 1) {
    if (sample.empty()) throw validation_error("estimate_sn: empty sample");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw validation_error("estimate_sn: epsilon must lie in (0, 1)");
    if (n < 1) throw validation_error("estimate_sn: n must be positive");
    const auto D = dbar_matrix(flow, sample, n, window, 50'000'000, threads);
    return greedy_cover(D, sample.size(), n, epsilon);
}

/// max(2 pi sum |m| |f(m)|, 1/epsilon).
inline double lipschitz(const FourierSeries& f, double epsilon) {
    if (!(epsilon > 0.0)) throw validation_error("lipschitz: epsilon must be positive");
    return std::max(lipschitz_bound(f), 1.0 / epsilon);
}

/// Integer L for the grid: ceil of the largest Lipschitz bound among phi1, eta1, psi1 and 1/epsilon.
inline std::int64_t grid_lipschitz(const FlowSpec& t1, double epsilon) {
    const double L = std::max({lipschitz(t1.phi1, epsilon), lipschitz(t1.eta1, epsilon), lipschitz(t1.psi1, epsilon)});
    return static_cast<std::int64_t>(std::ceil(L - 1e-9));
}

/// F(k): t on multiples of epsilon/(L q), fiber coordinates on multiples of 1/(q^2 L).
/// Points are produced on demand; the grid is never stored unless materialized.
class FkGrid {
public:
    FkGrid(std::int64_t q, std::int64_t eps_inv, std::int64_t L) : q_(q), eps_inv_(eps_inv), L_(L) {
        if (q < 1 || eps_inv < 1 || L < 1) throw validation_error("F(k) grid needs q, 1/epsilon, L >= 1");
        const __int128 nt = static_cast<__int128>(L) * q * eps_inv;
        const __int128 nf = static_cast<__int128>(q) * q * L;
        const __int128 card = nt * nf * nf * nf;
        constexpr __int128 lim = std::numeric_limits<std::int64_t>::max();
        if (nt > lim || nf > lim || nf * nf > lim || nf * nf * nf > lim || card > lim)
            throw overflow_error("F(k) grid cardinality overflows 64 bits");
        n_t_ = static_cast<std::int64_t>(nt);
        n_f_ = static_cast<std::int64_t>(nf);
        card_ = static_cast<std::int64_t>(card);
    }

    std::int64_t q() const noexcept { return q_; }
    std::int64_t L() const noexcept { return L_; }
    double epsilon() const noexcept { return 1.0 / static_cast<double>(eps_inv_); }
    std::int64_t t_count() const noexcept { return n_t_; }
    std::int64_t fiber_count() const noexcept { return n_f_; }
    double t_spacing() const noexcept { return 1.0 / static_cast<double>(n_t_); }
    double fiber_spacing() const noexcept { return 1.0 / static_cast<double>(n_f_); }

    /// epsilon^-1 L^4 q^7.
    std::int64_t cardinality() const noexcept { return card_; }

    ProductPoint point(std::int64_t jt, std::int64_t j1, std::int64_t j2, std::int64_t j3) const {
        const double nf = static_cast<double>(n_f_);
        return {static_cast<double>(jt) / static_cast<double>(n_t_),
                NilPoint::from_unit_cube(static_cast<double>(j1) / nf, static_cast<double>(j2) / nf,
                                         static_cast<double>(j3) / nf)};
    }

    /// Point by linear index, t index slowest.
    ProductPoint point(std::int64_t idx) const {
        const std::int64_t j3 = idx % n_f_;
        idx /= n_f_;
        const std::int64_t j2 = idx % n_f_;
        idx /= n_f_;
        const std::int64_t j1 = idx % n_f_;
        return point(idx / n_f_, j1, j2, j3);
    }

    /// Grid point within t_spacing/2 in t and within fiber_spacing in each coordinate of the
    /// representative. x, z and t wrap; y is clamped, since wrapping y would shift z.
    ProductPoint nearest(const ProductPoint& P) const {
        const auto wrap = [](double v, std::int64_t n) {
            auto j = static_cast<std::int64_t>(std::nearbyint(v * static_cast<double>(n)));
            return j >= n ? j - n : j;
        };
        const HeisElement& g = P.p.rep();
        auto j2 = static_cast<std::int64_t>(std::nearbyint(g.y * static_cast<double>(n_f_)));
        j2 = std::min(j2, n_f_ - 1);
        return point(wrap(P.t, n_t_), wrap(g.x, n_f_), j2, wrap(g.z, n_f_));
    }

    std::vector<ProductPoint> materialize(std::int64_t budget) const {
        if (card_ > budget)
            throw budget_error("F(k) grid has " + std::to_string(card_) + " points, budget is " + std::to_string(budget));
        std::vector<ProductPoint> out;
        out.reserve(static_cast<std::size_t>(card_));
        for (std::int64_t i = 0; i < card_; ++i) out.push_back(point(i));
        return out;
    }

private:
    std::int64_t q_, eps_inv_, L_;
    std::int64_t n_t_ = 0, n_f_ = 0, card_ = 0;
};

inline std::int64_t integral_inverse(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw validation_error("epsilon must lie in (0, 1)");
    const double inv = 1.0 / epsilon;
    const double r = std::nearbyint(inv);
    if (std::abs(inv - r) > 1e-9 * r) throw validation_error("1/epsilon must be an integer");
    return static_cast<std::int64_t>(r);
}

inline FkGrid build_Fk(const ContinuedFraction& cf, int k_index, double epsilon, std::int64_t L) {
    if (k_index < 0 || k_index > static_cast<int>(cf.size()))
        throw validation_error("build_Fk: convergent index out of range");
    return FkGrid(cf.q(k_index), integral_inverse(epsilon), L);
}

/// n_k = q_k^(B-1), rounded to the nearest integer when B is integral, floored otherwise.
inline std::int64_t shadow_horizon(std::int64_t q, double B) {
    const double v = std::pow(static_cast<double>(q), B - 1.0);
    if (!(v < 9.0e18)) throw overflow_error("n_k = q_k^(B-1) overflows 64 bits");
    const double r = std::nearbyint(v);
    return static_cast<std::int64_t>(std::abs(v - r) < 1e-9 * std::max(1.0, r) ? r : std::floor(v));
}

struct ShadowTrial {
    ProductPoint start;
    ProductPoint grid_point;
    double initial_distance = 0.0;
    double max_pointwise = 0.0;  // max over m <= n_k
    double average = 0.0;        // d_bar_{n_k}
};

struct ShadowingReport {
    std::int64_t q = 0;
    std::int64_t n_k = 0;
    std::int64_t L = 0;
    double epsilon = 0.0;
    std::int64_t grid_cardinality = 0;
    double max_pointwise = 0.0;
    double max_average = 0.0;
    bool success = false;  // max_pointwise < 20 epsilon
    std::vector<ShadowTrial> trials;
};

/// For each trial point: nearest F(k) point, then the distance along both T1-orbits for m <= n_k.
inline ShadowingReport verify_shadowing(const FlowSpec& t1, const ContinuedFraction& cf,
                                        const DenominatorClassification& cls, int k_index, double epsilon,
                                        std::int64_t L, std::span<const ProductPoint> trial_points,
                                        std::int64_t step_budget = 100'000'000, int window = 3, unsigned threads = 1) {
    if (t1.kind != FlowKind::T1) throw validation_error("verify_shadowing needs a T1 flow");
    if (std::abs(t1.phi1.coeff(0)) > mean_zero_tolerance)
        throw validation_error("verify_shadowing needs a mean-zero phi1");
    if (k_index < 1 || k_index >= static_cast<int>(cls.cls.size()) || cls.at(k_index) != QClass::sharp)
        throw validation_error("verify_shadowing: q_k must lie in Q_sharp(B)");
    const FkGrid grid = build_Fk(cf, k_index, epsilon, L);
    ShadowingReport r;
    r.q = grid.q();
    r.n_k = shadow_horizon(r.q, cls.B);
    r.L = L;
    r.epsilon = epsilon;
    r.grid_cardinality = grid.cardinality();
    if (static_cast<double>(r.n_k) * static_cast<double>(trial_points.size()) > static_cast<double>(step_budget))
        throw budget_error("verify_shadowing: n_k * trials = " +
                           std::to_string(static_cast<double>(r.n_k) * static_cast<double>(trial_points.size())) +
                           " exceeds the step budget " + std::to_string(step_budget));
    r.trials.resize(trial_points.size());
    parallel_for(trial_points.size(), threads, [&](std::size_t i) {
        ShadowTrial& tr = r.trials[i];
        tr.start = trial_points[i];
        tr.grid_point = grid.nearest(tr.start);
        OrbitStream a(t1, tr.start), b(t1, tr.grid_point);
        compensated_sum<double> sum;
        for (std::int64_t m = 0; m <= r.n_k; ++m) {
            if (m > 0) {
                a.advance();
                b.advance();
            }
            const double d = d_prod(a.current(), b.current(), window);
            if (m == 0) tr.initial_distance = d;
            if (m < r.n_k) sum.add(d);
            tr.max_pointwise = std::max(tr.max_pointwise, d);
        }
        tr.average = sum.value() / static_cast<double>(r.n_k);
    });
    for (const auto& tr : r.trials) {
        r.max_pointwise = std::max(r.max_pointwise, tr.max_pointwise);
        r.max_average = std::max(r.max_average, tr.average);
    }
    r.success = r.max_pointwise < 20.0 * epsilon;
    return r;
}

struct DistalityReport {
    double min_dist = std::numeric_limits<double>::infinity();
    std::int64_t argmin_n = 0;
    std::vector<std::int64_t> checkpoints;
    std::vector<double> window_min;  // min over (previous checkpoint, checkpoint]; the first window starts at n = 0
};

/// min over 0 <= n <= N of d(S^n P, S^n Q), with per-window minima between checkpoints.
inline DistalityReport distality_probe(const FlowSpec& flow, const ProductPoint& P, const ProductPoint& Q,
                                       std::int64_t N, int window = 3, std::span<const std::int64_t> checkpoints = {}) {
    if (N < 1) throw validation_error("distality_probe: N must be positive");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw validation_error("distality_probe: checkpoints must be sorted");
    DistalityReport r;
    OrbitStream a(flow, P), b(flow, Q);
    std::size_t next = 0;
    double wmin = std::numeric_limits<double>::infinity();
    for (std::int64_t n = 0; n <= N; ++n) {
        if (n > 0) {
            a.advance();
            b.advance();
        }
        const double d = d_prod(a.current(), b.current(), window);
        if (d < r.min_dist) {
            r.min_dist = d;
            r.argmin_n = n;
        }
        wmin = std::min(wmin, d);
        while (next < checkpoints.size() && checkpoints[next] == n) {
            r.checkpoints.push_back(n);
            r.window_min.push_back(wmin);
            wmin = std::numeric_limits<double>::infinity();
            ++next;
        }
    }
    return r;
}

}  // namespace skewmu
