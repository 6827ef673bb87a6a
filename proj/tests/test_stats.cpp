#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "nbs/states.hpp"
#include "nbs/stats.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using nbs::NbsParams;

namespace {

constexpr double kPi = std::numbers::pi;

NbsParams at(double eta2, double theta, int m) { return NbsParams::from_eta2(eta2, theta, m); }

}  // namespace

TEST_CASE("closed-form photon statistics") {
    SECTION("eta^2 = 0.5, M = 1 gives Q = 1") {
        const auto s = nbs::photon_stats_closed(at(0.5, 0.0, 1));
        CHECK_THAT(s.mandel_q, WithinRel(1.0, 1e-15));
        // brute-force sum of n B_n and n^2 B_n
        const double eta = std::sqrt(0.5);
        double s1 = 0.0, s2 = 0.0;
        for (int n = 0; n < 200; ++n) {
            s1 += n * nbs::nbd_pmf(n, eta, 1);
            s2 += n * n * nbs::nbd_pmf(n, eta, 1);
        }
        CHECK_THAT((s2 - s1 * s1 - s1) / s1, WithinRel(1.0, 1e-12));
    }
    SECTION("M = 1 gives g2 = 2 for any eta") {
        for (double e2 : {0.01, 0.4, 0.98}) CHECK(nbs::photon_stats_closed(at(e2, 0.0, 1)).g2 == 2.0);
    }
    SECTION("Q -> 0 as eta -> 0") {
        CHECK(nbs::photon_stats_closed(at(1e-10, 0.0, 3)).mandel_q < 1e-9);
    }
}

TEST_CASE("direct photon statistics on reference states") {
    SECTION("coherent alpha = 1 is Poissonian") {
        const auto s = nbs::photon_stats_direct(nbs::coherent_state({1.0, 0.0}, {1e-20, 1 << 20}));
        CHECK_THAT(s.mandel_q, WithinAbs(0.0, 1e-12));
        CHECK_THAT(s.g2, WithinAbs(1.0, 1e-12));
    }
    SECTION("|3> has Q = -1 and g2 = 2/3") {
        const auto s = nbs::photon_stats_direct(nbs::FockVector::number_state(3));
        CHECK_THAT(s.mandel_q, WithinRel(-1.0, 1e-15));
        CHECK_THAT(s.g2, WithinRel(2.0 / 3.0, 1e-15));
    }
    SECTION("vacuum is degenerate") {
        CHECK_THROWS_AS(nbs::photon_stats_direct(nbs::FockVector::number_state(0)), nbs::Degenerate);
    }
}

TEST_CASE("direct statistics match the closed forms on the NBS grid") {
    for (int i = 1; i <= 9; ++i)
        for (int m : {1, 2, 5, 50}) {
            const auto p = at(0.1 * i, 0.3, m);
            const auto c = nbs::photon_stats_closed(p);
            const auto d = nbs::photon_stats_direct(nbs::nbs_state(p, nbs::kTightPolicy));
            CHECK_THAT(d.mean_n, WithinRel(c.mean_n, 1e-9));
            CHECK_THAT(d.var_n, WithinRel(c.var_n, 1e-9));
            CHECK_THAT(d.mandel_q, WithinRel(c.mandel_q, 1e-9));
            CHECK_THAT(d.g2, WithinRel(c.g2, 1e-9));
            CHECK(d.mandel_q > 0.0);
            CHECK(d.g2 > 1.0);
        }
}

TEST_CASE("quadratures of minimum-uncertainty states") {
    SECTION("vacuum") {
        const auto q = nbs::quadrature_direct(nbs::FockVector::number_state(0));
        CHECK(q.var_x == 0.5);
        CHECK(q.var_p == 0.5);
        CHECK(q.uncertainty_product == 0.25);
    }
    SECTION("coherent states") {
        for (double a : {0.5, 1.0, 3.0}) {
            const auto q = nbs::quadrature_direct(nbs::coherent_state({a, 0.9}, {1e-20, 1 << 20}));
            CHECK_THAT(q.var_x, WithinAbs(0.5, 1e-10));
            CHECK_THAT(q.var_p, WithinAbs(0.5, 1e-10));
            CHECK_THAT(q.mean_x, WithinAbs(std::sqrt(2.0) * a * std::cos(0.9), 1e-10));
            CHECK_THAT(q.mean_p, WithinAbs(std::sqrt(2.0) * a * std::sin(0.9), 1e-10));
        }
    }
}

TEST_CASE("var_p series") {
    SECTION("eta^2 = 0.5, M = 1, theta = 0 is squeezed") {
        const double v = nbs::var_p_series(at(0.5, 0.0, 1));
        CHECK(v < 0.5);
        CHECK_THAT(v, WithinAbs(0.2815, 5e-5));
    }
    SECTION("matches the direct computation across the Fig. 1 grid") {
        for (int m : {1, 5, 50})
            for (int i = 1; i <= 99; ++i) {
                const auto p = at(0.01 * i, 0.0, m);
                const auto q = nbs::quadrature_direct(nbs::nbs_state(p, nbs::kTightPolicy));
                const double vp = nbs::var_p_series(p, 1e-30);
                const double vx = nbs::var_x_series(p, 1e-30);
                CHECK_THAT(vp, WithinAbs(q.var_p, 1e-9));
                CHECK_THAT(vx, WithinAbs(q.var_x, 1e-9));
                CHECK(vp < 0.5);
                CHECK(vx > 0.5);
                CHECK(vp * vx >= 0.25 - 1e-10);
            }
    }
    SECTION("eta^2 = 0.9, M = 1, theta = pi/2 is not squeezed") {
        CHECK(nbs::var_p_series(at(0.9, kPi / 2, 1)) > 0.5);
    }
    SECTION("reference values at theta = 0") {
        CHECK_THAT(nbs::var_p_series(at(0.5, 0.0, 5)), WithinAbs(0.2565, 5e-5));
        CHECK_THAT(nbs::var_p_series(at(0.5, 0.0, 50)), WithinAbs(0.2506, 5e-5));
        CHECK_THAT(nbs::var_p_series(at(0.99, 0.0, 1)), WithinAbs(0.01005, 5e-6));
        CHECK_THAT(nbs::var_p_series(at(0.99, 0.0, 50)), WithinAbs(0.005025, 5e-7));
        CHECK_THAT(nbs::var_x_series(at(0.99, 0.0, 50)), WithinRel(49.87, 1e-3));
    }
}

TEST_CASE("var_p at theta = 0 decreases as eta^2 grows") {
    // Squeezing deepens monotonically with eta^2 for every order tested.
    for (int m : {1, 5, 50}) {
        double prev = nbs::var_p_series(at(0.01, 0.0, m));
        for (int i = 2; i <= 99; ++i) {
            const double v = nbs::var_p_series(at(0.01 * i, 0.0, m));
            CHECK(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("var_p at theta = 0 is ordered in M") {
    for (int i = 1; i <= 99; ++i) {
        const double e2 = 0.01 * i;
        const double v1 = nbs::var_p_series(at(e2, 0.0, 1));
        const double v5 = nbs::var_p_series(at(e2, 0.0, 5));
        const double v50 = nbs::var_p_series(at(e2, 0.0, 50));
        CHECK(v50 <= v5);
        CHECK(v5 <= v1);
    }
}

TEST_CASE("var_p is pi-periodic and symmetric about pi/2") {
    for (double e2 : {0.2, 0.5, 0.7, 0.9})
        for (double th : {0.0, 0.3, 1.0, 1.4}) {
            const double v = nbs::var_p_series(at(e2, th, 1));
            CHECK_THAT(nbs::var_p_series(at(e2, th + kPi, 1)), WithinAbs(v, 1e-10));
            CHECK_THAT(nbs::var_p_series(at(e2, kPi - th, 1)), WithinAbs(v, 1e-10));
        }
}

TEST_CASE("Fig. 2 maxima at theta = pi/2") {
    CHECK_THAT(nbs::var_p_series(at(0.2, kPi / 2, 1)), WithinAbs(0.602, 5e-4));
    CHECK_THAT(nbs::var_p_series(at(0.5, kPi / 2, 1)), WithinAbs(0.903, 5e-4));
    CHECK_THAT(nbs::var_p_series(at(0.7, kPi / 2, 1)), WithinAbs(1.446, 5e-4));
    CHECK_THAT(nbs::var_p_series(at(0.9, kPi / 2, 1)), WithinAbs(4.240, 5e-4));
}

TEST_CASE("resummation identity") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> e2(0.01, 0.99), th(0.0, 2 * kPi);
    std::uniform_int_distribution<int> m(1, 50);
    for (int i = 0; i < 50; ++i) {
        const auto r = nbs::var_p_series_detailed(at(e2(rng), th(rng), m(rng)));
        CHECK(r.identity_rel_error <= 1e-10);
        CHECK(r.terms > 0);
    }
}

TEST_CASE("b^k shift relation") {
    CHECK(nbs::bk_shift_check(at(0.5, 0.0, 1), 1) < 1e-10);
    CHECK(nbs::bk_shift_check(at(0.3, 0.7, 3), 2) < 1e-10);
    CHECK(nbs::bk_shift_check({1e-9, 0.0, 2}, 1) < 1e-10);
    CHECK(nbs::bk_shift_check({1e-9, 0.0, 2}, 3) < 1e-10);
}

TEST_CASE("series rejects eta = 0") {
    CHECK_THROWS_AS(nbs::var_p_series({0.0, 0.0, 1}), nbs::DomainError);
}
