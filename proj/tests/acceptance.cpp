// Acceptance run: one PASS/FAIL line per criterion, with the measured quantity, the
// tolerance and the runtime. Exit status is nonzero when any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "skewmu/skewmu.hpp"

using namespace skewmu;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int failures = 0;

void criterion(int id, const char* name, double time_limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < time_limit_s;
    const bool ok = o.pass && in_time;
    if (!ok) ++failures;
    std::printf("%s [%2d] %s: %s; runtime %.2f s (limit %.0f s)%s\n", ok ? "PASS" : "FAIL", id, name, o.detail.c_str(),
                secs, time_limit_s, in_time ? "" : " EXCEEDED");
    std::fflush(stdout);
}

double unif(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

ProductPoint random_point(std::mt19937_64& rng) {
    return {unif(rng), NilPoint::from_unit_cube(unif(rng), unif(rng), unif(rng))};
}

double coord_gap(const ProductPoint& a, const ProductPoint& b) {
    const auto &p = a.p.rep(), &q = b.p.rep();
    return std::max({circle_dist(a.t, b.t), circle_dist(p.x, q.x), circle_dist(p.y, q.y), circle_dist(p.z, q.z)});
}

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 matrix_of(const HeisElement& g) { return {{{1, g.y, g.z}, {0, 1, g.x}, {0, 0, 1}}}; }

Mat3 matmul(const Mat3& A, const Mat3& B) {
    Mat3 C{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) C[i][j] += A[i][k] * B[k][j];
    return C;
}

double mat_gap(const Mat3& A, const HeisElement& g) {
    const Mat3 B = matrix_of(g);
    double d = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) d = std::max(d, std::abs(A[i][j] - B[i][j]));
    return d;
}

// Random real mean-zero series on 1 <= |m| <= max_m with |c(m)| <= amp |m|^-decay.
FourierSeries random_series(std::mt19937_64& rng, int max_m, double amp, double decay, bool mean_zero) {
    std::map<std::int64_t, complex> c;
    if (!mean_zero) c[0] = unif(rng, -amp, amp);
    for (int m = 1; m <= max_m; ++m) {
        const double r = amp * std::pow(m, -decay) * unif(rng);
        const double th = unif(rng, 0.0, 2 * pi);
        c[m] = std::polar(r / 2, th);
        c[-m] = std::conj(c[m]);
    }
    return FourierSeries(c, true);
}

const MobiusTable& mu_table() {
    static const MobiusTable mu = mobius_sieve(1'000'000);
    return mu;
}

// Shared Liouville fixture for B = 3: q_1 = 2, q_2 = 11 in Q_sharp.
FourierSeries shadow_phi() { return FourierSeries::cos_mode(2, 0.5); }
FourierSeries shadow_psi() { return FourierSeries::sin_mode(2, 0.2); }

}  // namespace

int main() {
    std::printf("acceptance run\n");

    criterion(1, "group law vs 3x3 matrices", 1.0, [] {
        std::mt19937_64 rng(101);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const HeisElement g{unif(rng, -5, 5), unif(rng, -5, 5), unif(rng, -5, 5)};
            const HeisElement h{unif(rng, -5, 5), unif(rng, -5, 5), unif(rng, -5, 5)};
            worst = std::max(worst, mat_gap(matmul(matrix_of(g), matrix_of(h)), mul(g, h)));
            const Mat3 I = matmul(matrix_of(g), matrix_of(inv(g)));
            worst = std::max(worst, mat_gap(I, HeisElement{}));
        }
        return Outcome{worst <= 1e-12, fmt("max entry deviation %.3e over 10^4 products and inverses (tol 1e-12)", worst)};
    });

    criterion(2, "lattice invariance of theta observables", 5.0, [] {
        std::mt19937_64 rng(202);
        std::uniform_int_distribution<int> ui(-3, 3);
        double worst = 0.0;
        int cases = 0;
        for (int m = 1; m <= 4; ++m)
            for (int j = 0; j < m; ++j)
                for (const bool starred : {false, true}) {
                    const ThetaObservable th(m, j, starred, 12);
                    for (int i = 0; i < 1000; ++i) {
                        const HeisElement g{unif(rng, -1, 2), unif(rng, -1, 2), unif(rng, -1, 2)};
                        const LatticeElement gam{ui(rng), ui(rng), ui(rng)};
                        worst = std::max(worst, std::abs(th.eval(mul(gam.element(), g)) - th.eval(g)));
                    }
                    ++cases;
                }
        return Outcome{worst < 1e-9, fmt("max |psi(gamma g) - psi(g)| = %.3e over %d observables x 10^3 (tol 1e-9)", worst, cases)};
    });

    criterion(3, "closed-form orbit vs iterated step", 10.0, [] {
        std::mt19937_64 rng(303);
        double worst = 0.0;
        for (int f = 0; f < 10; ++f) {
            const auto T = make_T(Rotation::irrational(unif(rng, 0.05, 0.95)), random_series(rng, 5, 0.4, 2.0, true),
                                  random_series(rng, 5, 0.4, 2.0, false));
            const ProductPoint P0 = random_point(rng);
            OrbitStream s(T, P0);
            for (const std::int64_t n : {1, 10, 100, 10000}) {
                while (s.index() < n) s.advance();
                worst = std::max(worst, coord_gap(orbit_closed_form(T, P0, n), s.current()));
                worst = std::max(worst, coord_gap(orbit_closed_form(T, P0, n, SumMethod::geometric), s.current()));
            }
        }
        return Outcome{worst <= 1e-8, fmt("max coordinate gap mod 1 = %.3e, 10 fixtures, n in {1,10,100,1e4} (tol 1e-8)", worst)};
    });

    criterion(4, "conjugacy identity at truncation 64", 30.0, [] {
        std::mt19937_64 rng(404);
        const auto cf = cf_expand(alpha_spec::Quotients{{}, {1}}, 64);
        const auto cls = classify(cf, 3.0);
        const auto phi = random_series(rng, 64, 0.5, 6.0, true);
        const auto psi = random_series(rng, 64, 0.5, 6.0, false);
        const auto c = build_conjugacy(phi, psi, cf, cls, {0.5, 6.0}, 64);
        std::vector<ProductPoint> sample;
        for (int i = 0; i < 1000; ++i) sample.push_back(random_point(rng));
        const double residual = conjugacy_residual(c.T, c, sample);
        double eta0 = 0.0;
        for (const auto& t : phi.terms()) eta0 += std::norm(t.c);
        const double shift = -0.5 * eta0 + psi.coeff(0).real();
        double affine = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const auto e = cocycle(c.T1, unif(rng));
            affine = std::max({affine, std::abs(e.x), std::abs(e.y), std::abs(e.z - shift)});
        }
        const bool ok = c.sharp_empty && residual <= c.tail_bound && affine <= 1e-9;
        return Outcome{ok, fmt("residual %.3e <= tail bound %.3e (uncertified remainder %.1e); Q_sharp empty: %s, "
                               "affine T1 deviation %.3e (tol 1e-9)",
                               residual, c.tail_bound, c.uncertified_remainder, c.sharp_empty ? "yes" : "no", affine)};
    });

    criterion(5, "convergent inequalities and best approximations", 10.0, [] {
        std::mt19937_64 rng(505);
        int violations = 0, checked = 0, scanned = 0;
        for (int trial = 0; trial < 50; ++trial) {
            std::string digits = "0.";
            for (int i = 0; i < 80; ++i) digits += static_cast<char>('0' + rng() % 10);
            const auto cf = cf_expand(alpha_from_decimal(digits), 22);
            for (int k = 1; k <= 20; ++k) {
                const hpfloat nq = cf.norm_q_alpha(k);
                const hpfloat q1 = hpfloat(cf.q(k + 1));
                violations += !(1 / (2 * q1) < nq && nq < 1 / q1);
                ++checked;
            }
            const hpfloat a = cf.alpha_hp();
            for (std::int64_t q = 1; q <= 200; ++q) {
                const hpfloat qa = hpfloat(q) * a;
                const hpfloat l = boost::multiprecision::round(qa);
                if (boost::multiprecision::abs(qa - l) * 2 * q < 1 && std::gcd(l.convert_to<std::int64_t>(), q) == 1) {
                    bool conv = false;
                    for (int k = 0; k <= cf.size(); ++k) conv = conv || (cf.q(k) == q && hpfloat(cf.l(k)) == l);
                    violations += !conv;
                    ++scanned;
                }
            }
        }
        return Outcome{violations == 0, fmt("%d violations in %d inequality pairs and %d scanned fractions with q <= 200",
                                            violations, checked, scanned)};
    });

    criterion(6, "resonant Birkhoff sums along sharp denominators", 30.0, [] {
        // Same frequencies and coefficients, two alpha sharing q_1, q_2 but with different tails.
        std::vector<double> C;
        std::string per;
        for (const std::vector<std::int64_t>& tail : {std::vector<std::int64_t>{1}, std::vector<std::int64_t>{2}}) {
            const auto cf = liouville_alpha(3.0, 2, 64, 1'000'000'000'000'000, 2, tail);
            const auto cls = classify(cf, 3.0);
            std::map<std::int64_t, complex> c;
            for (std::int64_t m = -64; m <= 64; ++m)
                if (m != 0 && m1_member(m, cls, cf)) c[m] = 0.5 * std::pow(static_cast<double>(std::abs(m)), -6.0);
            const auto f1 = decompose(FourierSeries(c, true), cls, cf).first;
            std::vector<double> grid;
            for (int i = 0; i < 4096; ++i) grid.push_back(i / 4096.0);
            double fit = 0.0;
            for (const int k : cls.sharp_indices()) {
                const double q = static_cast<double>(cf.q(k));
                const double dev = phi_bound_check(f1, cf, cls, k, grid);
                fit = std::max(fit, dev * q * q);
                per += fmt(" q=%g dev=%.3e;", q, dev);
            }
            C.push_back(fit);
        }
        const double spread = std::abs(C[0] - C[1]) / std::max(C[0], C[1]);
        return Outcome{spread <= 0.2, fmt("fitted C = %.6e and %.6e, relative spread %.2e (tol 0.2);%s", C[0], C[1], spread,
                                          per.c_str())};
    });

    criterion(7, "F(k) shadowing and covering bound", 300.0, [] {
        const double eps = 0.01;
        const auto cf = liouville_alpha(3.0, 2);
        const auto cls = classify(cf, 3.0);
        const auto c = build_conjugacy(shadow_phi(), shadow_psi(), cf, cls, {1.0, 6.0}, 64);
        const int k = cls.sharp_indices().front();
        const std::int64_t L = grid_lipschitz(c.T1, eps);
        std::mt19937_64 rng(707);
        std::vector<ProductPoint> trials;
        for (int i = 0; i < 100; ++i) trials.push_back(random_point(rng));
        const auto r = verify_shadowing(c.T1, cf, cls, k, eps, L, trials);
        const auto sample = empirical_sample(c.T1, random_point(rng), 1000, 400, 7);
        const auto cover = estimate_sn(c.T1, sample, r.n_k, 20 * eps);
        const bool ok = r.success && cover.centers_used <= r.grid_cardinality;
        return Outcome{ok, fmt("q_k=%lld n_k=%lld L=%lld: max pointwise %.4f < 20 eps = %.2f over 100 trials; "
                               "greedy centers %lld <= #F(k) = %lld",
                               static_cast<long long>(r.q), static_cast<long long>(r.n_k), static_cast<long long>(L),
                               r.max_pointwise, 20 * eps, static_cast<long long>(cover.centers_used),
                               static_cast<long long>(r.grid_cardinality))};
    });

    criterion(8, "Mobius correlation decay, alpha = 1/2", 60.0, [] {
        const auto T = make_T(Rotation::rational(1, 2), FourierSeries::cos_mode(), {});
        std::mt19937_64 rng(808);
        const ProductPoint P0 = random_point(rng);
        const std::vector<std::int64_t> cps{10000, 1000000};
        const auto r = mobius_correlation(T, preset_fA(), P0, 1000000, cps, &mu_table());
        const double a4 = std::abs(r[0].average), a6 = std::abs(r[1].average);
        const auto ctl = control_stats(mu_table(), 1000000);
        const bool ok = a6 * 2.0 <= a4 && std::abs(ctl.squarefree_density - 0.607927) <= 0.001;
        return Outcome{ok, fmt("|avg| %.3e at 1e4, %.3e at 1e6 (ratio %.1f, need >= 2); squarefree density %.6f "
                               "(target 0.607927 +- 0.001)",
                               a4, a6, a4 / a6, ctl.squarefree_density)};
    });

    criterion(9, "exponential sums over progressions", 60.0, [] {
        std::mt19937_64 rng(909);
        int bad = 0;
        double worst = 0.0;
        for (int i = 0; i < 5; ++i) {
            const std::vector<double> poly{unif(rng), unif(rng), unif(rng)};
            for (const auto& [q, a] : std::vector<std::pair<int, int>>{{1, 0}, {3, 1}, {4, 3}}) {
                const double s4 = std::abs(mu_exponential_sum(poly, a, q, 10000, mu_table())) / 1e4;
                const double s6 = std::abs(mu_exponential_sum(poly, a, q, 1000000, mu_table())) / 1e6;
                worst = std::max(worst, s6 / s4);
                bad += s6 > 0.5 * s4;
            }
        }
        return Outcome{bad == 0, fmt("%d of 15 cases fail; largest ratio (|S|/N at 1e6) / (|S|/N at 1e4) = %.3f (need <= 0.5)",
                                     bad, worst)};
    });

    criterion(10, "distality probe for general skew products", 60.0, [] {
        // Pairs share the base point, so the whole separation lives in the fiber.
        std::mt19937_64 rng(1010);
        const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
        const std::vector<FlowSpec> flows{
            make_S(Rotation::irrational(golden), FourierSeries::cos_mode(1, 0.3), FourierSeries::cos_mode(1, 0.6),
                   FourierSeries::sin_mode(1, 0.2)),
            make_S(Rotation::irrational(std::sqrt(2.0) - 1.0), FourierSeries::sin_mode(1, 0.25),
                   FourierSeries::cos_mode(2, 0.4), FourierSeries::cos_mode(1, 0.1))};
        const std::vector<std::int64_t> cps{1000, 10000, 100000};
        double worst_ratio = 1e300, worst_trend = 1e300;
        int bad = 0;
        for (std::size_t f = 0; f < flows.size(); ++f)
            for (int i = 0; i < (f == 0 ? 10 : 10); ++i) {
                const double t = unif(rng);
                const ProductPoint P{t, NilPoint::from_unit_cube(unif(rng), unif(rng), unif(rng))};
                const ProductPoint Q{t, NilPoint::from_unit_cube(unif(rng), unif(rng), unif(rng))};
                const double d0 = d_prod(P, Q);
                const auto r = distality_probe(flows[f], P, Q, 100000, 3, cps);
                const double early = r.window_min[0];
                const double later = std::min(r.window_min[1], r.window_min[2]);
                worst_ratio = std::min(worst_ratio, r.min_dist / d0);
                worst_trend = std::min(worst_trend, later / early);
                bad += !(r.min_dist > 1e-3 * d0 && later >= 0.5 * early);
            }
        return Outcome{bad == 0, fmt("%d of 20 pairs fail; min over n <= 1e5 / d(P,Q) >= %.3f (need > 1e-3); "
                                     "decade minima ratio (1e3,1e5] / [0,1e3] >= %.3f (need >= 0.5)",
                                     bad, worst_ratio, worst_trend)};
    });

    criterion(11, "rational alpha residue-class reassembly", 30.0, [] {
        double worst = 0.0;
        std::string per;
        for (const auto& [p, q] : std::vector<std::pair<int, int>>{{1, 2}, {1, 3}, {2, 5}}) {
            const auto phi = FourierSeries::cos_mode(1, 0.3) + FourierSeries::sin_mode(7, 0.1);
            const auto psi = FourierSeries::cos_mode(30, 0.2) + FourierSeries::sin_mode(1, 0.1);
            const auto T = make_T(Rotation::rational(p, q), phi, psi);
            std::mt19937_64 rng(1100 + q);
            const ProductPoint P0 = random_point(rng);
            const std::int64_t N = 100000;
            const std::vector<std::int64_t> cps{N};
            const complex stream = mobius_correlation(T, preset_fA(), P0, N, cps, &mu_table())[0].average;
            const auto R = rational_alpha_reduction(T, preset_fA(), P0);
            const complex again = reassembled_correlation(R, preset_fA(), P0, N, mu_table()) / static_cast<double>(N);
            const double d = std::abs(stream - again);
            worst = std::max(worst, d);
            per += fmt(" %d/%d: %.2e;", p, q, d);
        }
        return Outcome{worst <= 1e-9, fmt("max |streaming - reassembled| average at N = 1e5 = %.3e (tol 1e-9);%s", worst,
                                          per.c_str())};
    });

    criterion(12, "central-fiber projection of psi_10", 10.0, [] {
        const ThetaObservable psi10(1, 0);
        const auto fn = [&](const NilPoint& p) { return psi10.eval(p); };
        double e1 = 0.0, e0 = 0.0;
        for (int a = 0; a < 10; ++a)
            for (int b = 0; b < 10; ++b)
                for (int c = 0; c < 10; ++c) {
                    const auto p = NilPoint::from_unit_cube(a / 10.0, b / 10.0, c / 10.0);
                    e1 = std::max(e1, std::abs(project_pm(fn, p, 1, 256) - psi10.eval(p)));
                    e0 = std::max(e0, std::abs(project_pm(fn, p, 0, 256)));
                }
        return Outcome{e1 <= 1e-10 && e0 <= 1e-10,
                       fmt("max |p_1 psi - psi| = %.3e, max |p_0 psi| = %.3e on 10^3 points (tol 1e-10)", e1, e0)};
    });

    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
