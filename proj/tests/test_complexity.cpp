#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "skewmu/complexity.hpp"

using namespace skewmu;

namespace {

const double golden = (std::sqrt(5.0) - 1.0) / 2.0;

ProductPoint random_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {u(rng), NilPoint::from_unit_cube(u(rng), u(rng), u(rng))};
}

FlowSpec rotation_flow(double a = golden) { return make_T(Rotation::irrational(a), {}, {}); }

FlowSpec twisted_flow() {
    return make_T(Rotation::irrational(golden), FourierSeries::cos_mode(1, 0.3) + FourierSeries::sin_mode(2, 0.1),
                  FourierSeries::cos_mode(1, 0.2));
}

// Resonant-part fixture on the Liouville number with B = 3.
struct Fixture {
    ContinuedFraction cf = liouville_alpha(3.0, 2);
    DenominatorClassification cls = classify(cf, 3.0);
    Conjugacy conj = build_conjugacy(FourierSeries::cos_mode(2, 0.25) + FourierSeries::cos_mode(3, 0.1),
                                     FourierSeries::sin_mode(2, 0.1) + FourierSeries::sin_mode(5, 0.05), cf, cls,
                                     {1.0, 6.0}, 64);
};

}  // namespace

TEST(Dbar, Basics) {
    std::mt19937_64 rng(1);
    const auto T = twisted_flow();
    const auto P = random_point(rng), Q = random_point(rng);
    EXPECT_DOUBLE_EQ(dbar_n(T, P, Q, 1), d_prod(P, Q));
    EXPECT_EQ(dbar_n(T, P, P, 50), 0.0);
    for (const std::int64_t n : {1, 7, 100}) EXPECT_NEAR(dbar_n(rotation_flow(), P, Q, n), d_prod(P, Q), 1e-12);
    EXPECT_THROW(dbar_n(T, P, Q, 0), validation_error);
}

TEST(Dbar, MatchesExplicitAverage) {
    std::mt19937_64 rng(2);
    const auto T = twisted_flow();
    const auto P = random_point(rng), Q = random_point(rng);
    ProductPoint a = P, b = Q;
    double s = 0.0;
    for (int j = 0; j < 40; ++j) {
        s += d_prod(a, b);
        a = step(T, a);
        b = step(T, b);
    }
    EXPECT_NEAR(dbar_n(T, P, Q, 40), s / 40.0, 1e-12);
}

TEST(Dbar, MetricOnSample) {
    std::mt19937_64 rng(3);
    const auto T = twisted_flow();
    std::vector<ProductPoint> pts;
    for (int i = 0; i < 12; ++i) pts.push_back(random_point(rng));
    const auto D = dbar_matrix(T, pts, 30);
    const std::size_t S = pts.size();
    for (std::size_t i = 0; i < S; ++i) {
        EXPECT_EQ(D[i * S + i], 0.0);
        for (std::size_t j = 0; j < S; ++j) {
            EXPECT_EQ(D[i * S + j], D[j * S + i]);
            for (std::size_t k = 0; k < S; ++k) EXPECT_LE(D[i * S + k], D[i * S + j] + D[j * S + k] + 1e-12);
        }
    }
    EXPECT_NEAR(D[1], dbar_n(T, pts[0], pts[1], 30), 1e-12);
}

TEST(Sample, Trivial) {
    std::mt19937_64 rng(4);
    const auto P0 = random_point(rng);
    const auto one = empirical_sample(twisted_flow(), P0, 0, 1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].t, P0.t);
    EXPECT_EQ(one[0].p, P0.p);
    for (const auto& P : empirical_sample(make_T(Rotation::irrational(0.0), {}, {}), P0, 5, 20, 3)) {
        EXPECT_EQ(P.t, P0.t);
        EXPECT_EQ(P.p, P0.p);
    }
    EXPECT_THROW(empirical_sample(twisted_flow(), P0, 0, 0), validation_error);
}

TEST(Sample, RotationEquidistributes) {
    const auto s = empirical_sample(rotation_flow(), {0.0, {}}, 0, 10000);
    std::vector<double> t;
    for (const auto& P : s) t.push_back(P.t);
    std::sort(t.begin(), t.end());
    // Oracle: star discrepancy of the sorted sample.
    double D = 0.0;
    const double n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        D = std::max({D, (static_cast<double>(i) + 1) / n - t[i], t[i] - static_cast<double>(i) / n});
    EXPECT_LE(D, 0.05);
    const auto strided = empirical_sample(twisted_flow(), {0.1, {}}, 7, 5, 4);
    EXPECT_EQ(strided[2].p, orbit_iterate(twisted_flow(), {0.1, {}}, 15).p);
}

TEST(Covering, Trivial) {
    std::mt19937_64 rng(5);
    std::vector<ProductPoint> one{random_point(rng)};
    const auto r1 = estimate_sn(twisted_flow(), one, 10, 0.1);
    EXPECT_EQ(r1.centers_used, 1);
    EXPECT_EQ(r1.covered_mass, 1.0);
    std::vector<ProductPoint> pts;
    for (int i = 0; i < 30; ++i) pts.push_back(random_point(rng));
    // Radius above the sampled diameter: one ball.
    const auto D = dbar_matrix(twisted_flow(), pts, 5);
    const double diam = *std::max_element(D.begin(), D.end());
    ASSERT_LT(diam, 0.99);
    EXPECT_EQ(estimate_sn(twisted_flow(), pts, 5, 0.99).centers_used, 1);
    EXPECT_THROW(estimate_sn(twisted_flow(), pts, 5, 0.0), validation_error);
    EXPECT_THROW(estimate_sn(twisted_flow(), std::vector<ProductPoint>{}, 5, 0.1), validation_error);
}

TEST(Covering, CircleArithmetic) {
    std::vector<ProductPoint> pts;
    for (int i = 0; i < 1000; ++i) pts.push_back({(i + 0.5) / 1000.0, {}});
    const auto r = estimate_sn(rotation_flow(), pts, 3, 0.26);
    EXPECT_EQ(r.centers_used, 2);
    EXPECT_GT(r.covered_mass, 0.74);
    const auto r1 = estimate_sn(rotation_flow(), pts, 3, 0.45);
    EXPECT_EQ(r1.centers_used, 1);  // one ball of radius 0.45 holds 0.9 > 0.55 of the mass
}

TEST(Covering, MonotoneInEpsilon) {
    std::mt19937_64 rng(6);
    const auto T = twisted_flow();
    const auto sample = empirical_sample(T, random_point(rng), 100, 200, 13);
    std::int64_t prev = std::numeric_limits<std::int64_t>::max();
    for (const double eps : {0.05, 0.1, 0.2}) {
        const auto r = estimate_sn(T, sample, 20, eps);
        EXPECT_LE(r.centers_used, prev);
        EXPECT_GT(r.covered_mass, 1.0 - eps);
        EXPECT_GE(r.centers_used, 1);
        prev = r.centers_used;
    }
}

TEST(Covering, Budget) {
    std::vector<ProductPoint> pts(1000);
    EXPECT_THROW(dbar_matrix(twisted_flow(), pts, 100000), budget_error);
}

TEST(Lipschitz, Examples) {
    EXPECT_DOUBLE_EQ(lipschitz(FourierSeries::constant(3.0), 0.01), 100.0);
    EXPECT_DOUBLE_EQ(lipschitz(FourierSeries::cos_mode(), 0.5), 2.0 * std::numbers::pi);
    EXPECT_DOUBLE_EQ(lipschitz(FourierSeries::cos_mode(), 0.01), 100.0);
    const auto f = FourierSeries::cos_mode(3, 0.5) + FourierSeries::sin_mode(7, 0.25);
    EXPECT_NEAR(lipschitz(f.scaled(40.0), 0.5), 40.0 * lipschitz_bound(f), 1e-9);
    EXPECT_THROW(lipschitz(f, 0.0), validation_error);
}

TEST(Grid, Cardinality) {
    const FkGrid g(1, 2, 2);
    EXPECT_EQ(g.cardinality(), 32);
    EXPECT_EQ(static_cast<std::int64_t>(g.materialize(100).size()), 32);
    for (const std::int64_t q : {1, 2, 3, 5})
        for (const std::int64_t L : {1, 2, 4})
            for (const std::int64_t e : {1, 2, 10}) {
                const FkGrid G(q, e, L);
                EXPECT_EQ(G.cardinality(), e * L * L * L * L * q * q * q * q * q * q * q);
            }
    EXPECT_THROW(FkGrid(11, 100, 100000), overflow_error);
    EXPECT_THROW(g.materialize(10), budget_error);
    EXPECT_THROW(FkGrid(0, 1, 1), validation_error);
}

TEST(Grid, PointsOnLattices) {
    const FkGrid g(2, 4, 3);
    // epsilon / (L q) = 1/24, 1/(q^2 L) = 1/12.
    EXPECT_NEAR(g.t_spacing(), 1.0 / 24.0, 1e-15);
    EXPECT_NEAR(g.fiber_spacing(), 1.0 / 12.0, 1e-15);
    for (const auto& P : g.materialize(1'000'000)) {
        EXPECT_NEAR(P.t * 24.0, std::round(P.t * 24.0), 1e-9);
        const auto& r = P.p.rep();
        for (const double c : {r.x, r.y, r.z}) EXPECT_NEAR(c * 12.0, std::round(c * 12.0), 1e-9);
    }
}

TEST(Grid, NearestWithinSpacing) {
    std::mt19937_64 rng(7);
    const FkGrid g(11, 100, 50);
    for (int i = 0; i < 2000; ++i) {
        const auto P = random_point(rng);
        const auto G = g.nearest(P);
        EXPECT_LE(circle_dist(P.t, G.t), g.t_spacing() / 2 + 1e-15);
        const auto &a = P.p.rep(), &b = G.p.rep();
        EXPECT_LE(circle_dist(a.x, b.x), g.fiber_spacing() + 1e-15);
        EXPECT_LE(std::abs(a.y - b.y), g.fiber_spacing() + 1e-15);
        EXPECT_LE(circle_dist(a.z, b.z), g.fiber_spacing() + 1e-15);
    }
    const auto on = g.point(5, 7, 9, 11);
    const auto back = g.nearest(on);
    EXPECT_EQ(back.t, on.t);
    EXPECT_EQ(back.p, on.p);
}

TEST(Grid, Horizon) {
    EXPECT_EQ(shadow_horizon(2, 3.0), 4);
    EXPECT_EQ(shadow_horizon(11, 3.0), 121);
    EXPECT_EQ(shadow_horizon(10, 2.5), 31);
    EXPECT_THROW(shadow_horizon(1'000'000'000, 4.0), overflow_error);
    EXPECT_EQ(integral_inverse(0.01), 100);
    EXPECT_THROW(integral_inverse(0.3), validation_error);
}

TEST(Shadowing, TrivialFlow) {
    const Fixture fx;
    const auto T1 = make_T1(Rotation::irrational(fx.cf.alpha()), {}, {}, {});
    std::mt19937_64 rng(8);
    std::vector<ProductPoint> trials;
    for (int i = 0; i < 20; ++i) trials.push_back(random_point(rng));
    const auto r = verify_shadowing(T1, fx.cf, fx.cls, 1, 0.1, 10, trials);
    for (const auto& tr : r.trials) {
        EXPECT_NEAR(tr.max_pointwise, tr.initial_distance, 1e-12);
        EXPECT_LT(tr.initial_distance, 0.1);
    }
    EXPECT_TRUE(r.success);
}

TEST(Shadowing, OnGridTrial) {
    const Fixture fx;
    const std::int64_t L = grid_lipschitz(fx.conj.T1, 0.01);
    const FkGrid g = build_Fk(fx.cf, 1, 0.01, L);
    const std::vector<ProductPoint> trials{g.point(3, 1, 4, 1), g.point(0, 0, 0, 0)};
    const auto r = verify_shadowing(fx.conj.T1, fx.cf, fx.cls, 1, 0.01, L, trials);
    for (const auto& tr : r.trials) {
        EXPECT_EQ(tr.average, 0.0);
        EXPECT_EQ(tr.max_pointwise, 0.0);
    }
}

TEST(Shadowing, LiouvilleFixture) {
    const Fixture fx;
    const double eps = 0.01;
    const std::int64_t L = grid_lipschitz(fx.conj.T1, eps);
    EXPECT_EQ(L, 100);
    std::mt19937_64 rng(9);
    std::vector<ProductPoint> trials;
    for (int i = 0; i < 100; ++i) trials.push_back(random_point(rng));
    for (const int k : fx.cls.sharp_indices()) {
        const auto r = verify_shadowing(fx.conj.T1, fx.cf, fx.cls, k, eps, L, trials);
        EXPECT_EQ(r.n_k, fx.cf.q(k) * fx.cf.q(k));
        EXPECT_TRUE(r.success) << "k=" << k << " max=" << r.max_pointwise;
        EXPECT_LE(r.max_average, r.max_pointwise);
    }
}

TEST(Shadowing, Preconditions) {
    const Fixture fx;
    std::vector<ProductPoint> trials(3);
    EXPECT_THROW(verify_shadowing(fx.conj.T, fx.cf, fx.cls, 1, 0.01, 100, trials), validation_error);
    EXPECT_THROW(verify_shadowing(fx.conj.T1, fx.cf, fx.cls, 3, 0.01, 100, trials), validation_error);
    const auto biased = make_T1(fx.conj.T1.rot, FourierSeries::constant(0.1), {}, {});
    EXPECT_THROW(verify_shadowing(biased, fx.cf, fx.cls, 1, 0.01, 100, trials), validation_error);
    std::vector<ProductPoint> many(1000);
    EXPECT_THROW(verify_shadowing(fx.conj.T1, fx.cf, fx.cls, 2, 0.01, 100, many, 1000), budget_error);
}

TEST(Shadowing, CoveringBoundedByGrid) {
    const Fixture fx;
    const double eps = 0.01;
    const std::int64_t L = grid_lipschitz(fx.conj.T1, eps);
    const auto grid = build_Fk(fx.cf, 1, eps, L);
    std::mt19937_64 rng(10);
    const auto sample = empirical_sample(fx.conj.T1, random_point(rng), 0, 300, 17);
    const auto r = estimate_sn(fx.conj.T1, sample, shadow_horizon(fx.cf.q(1), 3.0), 20 * eps);
    EXPECT_LE(r.centers_used, grid.cardinality());
    EXPECT_GT(r.covered_mass, 1.0 - 20 * eps);
}

TEST(Shadowing, FiniteSharpBranchIsIsometric) {
    const auto cf = cf_expand(alpha_spec::Quotients{{}, {1}}, 40);
    const auto cls = classify(cf, 3.0);
    const auto c = build_conjugacy(FourierSeries::cos_mode(1, 0.3) + FourierSeries::sin_mode(2, 0.2),
                                   FourierSeries::cos_mode(1, 0.1) + FourierSeries::constant(0.2), cf, cls, {1.0, 6.0}, 64);
    ASSERT_TRUE(c.sharp_empty);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10; ++i) {
        const auto P = random_point(rng), Q = random_point(rng);
        const double d0 = d_prod(P, Q);
        for (const std::int64_t n : {1, 10, 100, 1000}) EXPECT_NEAR(dbar_n(c.T1, P, Q, n), d0, 1e-10);
    }
}

TEST(Distality, Examples) {
    std::mt19937_64 rng(12);
    const auto S = make_S(Rotation::irrational(golden), FourierSeries::cos_mode(1, 0.3),
                          FourierSeries::cos_mode(1, 0.6), FourierSeries::sin_mode(1, 0.2));
    const auto P = random_point(rng), Q = random_point(rng);
    const auto same = distality_probe(S, P, P, 100);
    EXPECT_EQ(same.min_dist, 0.0);
    EXPECT_EQ(same.argmin_n, 0);
    for (const std::int64_t N : {1, 100, 10000}) {
        const auto r = distality_probe(S, P, Q, N);
        EXPECT_GE(r.min_dist, circle_dist(P.t, Q.t) - 1e-12);
        EXPECT_LE(r.min_dist, d_prod(P, Q));
        EXPECT_NEAR(distality_probe(rotation_flow(), P, Q, N).min_dist, d_prod(P, Q), 1e-12);
    }
    const std::vector<std::int64_t> cps{10, 100, 1000};
    const auto w = distality_probe(S, P, Q, 1000, 3, cps);
    ASSERT_EQ(w.window_min.size(), 3u);
    EXPECT_EQ(*std::min_element(w.window_min.begin(), w.window_min.end()), w.min_dist);
    EXPECT_THROW(distality_probe(S, P, Q, 0), validation_error);
}
