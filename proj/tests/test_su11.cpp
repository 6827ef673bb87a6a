#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "nbs/states.hpp"
#include "nbs/stats.hpp"
#include "nbs/su11.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using nbs::complex;
using nbs::FockVector;
namespace su = nbs::su11;

namespace {

FockVector random_vector(std::mt19937_64& rng, std::size_t n_max) {
    std::normal_distribution<double> g;
    std::vector<complex> a(n_max + 1);
    for (auto& c : a) c = {g(rng), g(rng)};
    FockVector v(std::move(a));
    return (1.0 / v.norm()) * v;
}

}  // namespace

TEST_CASE("K+ on the vacuum") {
    CHECK(su::k_plus_apply(FockVector::number_state(0), 1).amplitude(1) == complex{1.0, 0.0});
    CHECK_THAT(su::k_plus_apply(FockVector::number_state(0), 3).amplitude(1).real(), WithinRel(std::sqrt(3.0), 1e-15));
}

TEST_CASE("both K+ orderings agree componentwise") {
    std::mt19937_64 rng(5);
    for (int m : {1, 2, 7}) {
        const auto v = random_vector(rng, 15);
        const auto a = su::k_plus_apply(v, m);
        const auto b = su::k_plus_apply_reordered(v, m);
        REQUIRE(a.size() == b.size());
        for (std::size_t n = 0; n < a.size(); ++n) CHECK(std::abs(a[n] - b[n]) <= 1e-14 * (1.0 + std::abs(a[n])));
    }
}

TEST_CASE("K- on the vacuum and adjointness") {
    CHECK(su::k_minus_apply(FockVector::number_state(0), 4).norm() == 0.0);
    std::mt19937_64 rng(9);
    for (int m : {1, 3, 10}) {
        // Pad u by one so K+ u stays inside v's support comparison.
        const auto u = random_vector(rng, 12);
        const auto v = random_vector(rng, 13);
        const complex lhs = nbs::inner(su::k_plus_apply(u, m), v);
        const complex rhs = nbs::inner(u, su::k_minus_apply(v, m));
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("K0 eigenvalues") {
    CHECK(su::k_zero_apply(FockVector::number_state(0), 2)[0] == complex{1.0, 0.0});
    CHECK(su::k_zero_apply(FockVector::number_state(5), 1)[5] == complex{5.5, 0.0});
}

TEST_CASE("su(1,1) commutation relations") {
    SECTION("[K+, K-]|n> = -(M + 2n)|n>") {
        for (int m : {1, 4})
            for (std::size_t n : {0u, 1u, 6u}) {
                const auto e = FockVector::number_state(n, n + 2);
                const auto pm = su::k_plus_apply(su::k_minus_apply(e, m), m);
                const auto mp = su::k_minus_apply(su::k_plus_apply(e, m), m);
                const auto c = pm - mp;
                CHECK_THAT(c.amplitude(n).real(), WithinRel(-(m + 2.0 * n), 1e-14));
                CHECK_THAT(c.norm(), WithinRel(m + 2.0 * n, 1e-14));
            }
    }
    SECTION("[K0, K+] = K+ on random vectors") {
        std::mt19937_64 rng(21);
        for (int m : {1, 2, 9}) {
            const auto v = random_vector(rng, 10);
            const auto lhs = su::k_zero_apply(su::k_plus_apply(v, m), m) - su::k_plus_apply(su::k_zero_apply(v, m), m);
            const auto want = su::k_plus_apply(v, m);
            CHECK(nbs::distance(lhs, want) <= 1e-12 * want.norm());
        }
    }
}

TEST_CASE("exponential form") {
    SECTION("vacuum at eta = 0") {
        const auto v = su::nbs_exponential_form({0.0, 0.0, 3});
        CHECK(v.n_max() == 0);
        CHECK(v[0] == complex{1.0, 0.0});
    }
    SECTION("M = 1, eta^2 = 0.5 matches the geometric state") {
        const double eta = std::sqrt(0.5);
        const auto e = su::nbs_exponential_form({eta, 0.0, 1});
        const auto g = nbs::geometric_state(eta, 0.0);
        for (std::size_t n = 0; n <= std::min(e.n_max(), g.n_max()); ++n) CHECK(std::abs(e[n] - g[n]) < 1e-13);
    }
    SECTION("identity behind the disentangling for n <= 20") {
        for (int m : {1, 2, 5, 11})
            for (std::size_t n = 0; n <= 20; ++n) CHECK(su::exponential_identity_check(m, n) <= 1e-12);
    }
}

TEST_CASE("displacement form") {
    SECTION("zeta = 0 gives the vacuum") {
        const auto v = su::nbs_displacement_form({2, 0.0, 0.0});
        CHECK(std::abs(v[0] - complex{1.0, 0.0}) < 1e-15);
        CHECK_THAT(v.norm(), WithinAbs(1.0, 1e-15));
    }
    SECTION("M = 1, |zeta| = artanh(sqrt 0.5) reproduces the NBS") {
        const su::Su11Params p{1, std::atanh(std::sqrt(0.5)), 0.0};
        const auto d = su::nbs_displacement_form_detailed(p);
        CHECK(nbs::fidelity(d.state, nbs::nbs_state(nbs::NbsParams::from_eta2(0.5, 0.0, 1))) >= 1.0 - 1e-10);
        CHECK(d.max_norm_drift < 1e-12);
    }
    SECTION("norm is monitored at every step for larger squeezing") {
        const su::Su11Params p{4, std::atanh(std::sqrt(0.9)), 0.8};
        const auto d = su::nbs_displacement_form_detailed(p);
        CHECK(d.max_norm_drift < 1e-12);
        CHECK(d.steps >= 1);
        CHECK(nbs::fidelity(d.state, nbs::nbs_state({p.eta(), 0.8, 4})) >= 1.0 - 1e-10);
    }
}

TEST_CASE("three forms agree") {
    for (double e2 : {0.3, 0.7})
        for (int m : {1, 4}) {
            const auto p = nbs::NbsParams::from_eta2(e2, 0.4, m);
            const auto a = nbs::nbs_state(p);
            const auto b = su::nbs_exponential_form(p);
            const auto c = su::nbs_displacement_form(su::Su11Params::from_nbs(p));
            CHECK(1.0 - nbs::fidelity(a, b) < 1e-9);
            CHECK(1.0 - nbs::fidelity(a, c) < 1e-9);
            CHECK(1.0 - nbs::fidelity(b, c) < 1e-9);
        }
}

TEST_CASE("ladder eigenvalue equation") {
    SECTION("eta = 0 reduces to K- on the vacuum") {
        CHECK(su::ladder_residual({0.0, 0.3, 2}).residual == 0.0);
    }
    SECTION("eta^2 = 0.3, theta = 1.1, M = 4") {
        const auto r = su::ladder_residual(nbs::NbsParams::from_eta2(0.3, 1.1, 4), nbs::kTightPolicy);
        CHECK(r.residual < 1e-8);
    }
    SECTION("at the default tail the residual sits inside its tail bound") {
        for (double e2 : {0.3, 0.7})
            for (int m : {1, 4}) {
                const auto r = su::ladder_residual(nbs::NbsParams::from_eta2(e2, 1.1, m));
                CHECK(r.residual <= 1.01 * r.bound + 1e-13);
            }
    }
}

TEST_CASE("coherent limit residual shrinks with M") {
    double prev = 1e300;
    for (int m : {25, 100, 400}) {
        const double r = su::coherent_limit_residual(1.0, 0.6, m, nbs::kTightPolicy);
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("E-_M") {
    SECTION("M = 1 is the unit shift") {
        for (std::size_t n = 0; n < 8; ++n) {
            const auto w = su::em_apply(FockVector::number_state(n + 1), 1);
            CHECK(w[n] == complex{1.0, 0.0});
        }
        CHECK(su::em_apply(FockVector::number_state(0), 1).norm() == 0.0);
    }
    SECTION("composed and fused forms agree") {
        std::mt19937_64 rng(17);
        for (int m : {1, 2, 6}) {
            const auto v = random_vector(rng, 20);
            CHECK(nbs::distance(su::em_apply(v, m), su::em_apply_composed(v, m)) < 1e-14);
        }
    }
    SECTION("NBS eigenvalue eta e^{i theta} for M >= 2") {
        for (double e2 : {0.3, 0.7})
            for (int m : {2, 4, 9}) CHECK(su::em_residual(nbs::NbsParams::from_eta2(e2, 1.1, m), nbs::kTightPolicy) < 1e-10);
    }
    SECTION("geometric state is a Susskind-Glogower eigenstate") {
        for (double eta : {0.2, 0.6, 0.95}) {
            const auto g = nbs::geometric_state(eta, 2.2, nbs::kTightPolicy);
            const auto r = nbs::axpy(-std::polar(eta, 2.2), g, su::em_apply(g, 1));
            CHECK(r.norm() < 1e-10);
        }
    }
}

TEST_CASE("order and parameter validation") {
    CHECK_THROWS_AS(su::k_plus_apply(FockVector::number_state(0), 0), nbs::DomainError);
    CHECK_THROWS_AS(su::em_apply(FockVector::number_state(0), -1), nbs::DomainError);
    CHECK_THROWS_AS((su::Su11Params{1, 40.0, 0.0}.validate()), nbs::DomainError);
}
