#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "nbs/fock.hpp"
#include "nbs/states.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using nbs::complex;
using nbs::FockVector;

namespace {

FockVector random_vector(std::mt19937_64& rng, std::size_t n_max) {
    std::normal_distribution<double> g;
    std::vector<complex> a(n_max + 1);
    for (auto& c : a) c = {g(rng), g(rng)};
    FockVector v(std::move(a));
    return (1.0 / v.norm()) * v;
}

// Dense sqrt(n) matrix for b, the oracle for apply_annihilate.
std::vector<complex> dense_annihilate(const FockVector& v) {
    const std::size_t d = v.size();
    std::vector<std::vector<double>> b(d, std::vector<double>(d, 0.0));
    for (std::size_t n = 1; n < d; ++n) b[n - 1][n] = std::sqrt(static_cast<double>(n));
    std::vector<complex> out(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) out[i] += b[i][j] * v[j];
    return out;
}

}  // namespace

TEST_CASE("annihilation on number states") {
    const auto zero = nbs::apply_annihilate(FockVector::number_state(0));
    CHECK(zero.norm() == 0.0);

    const auto one = nbs::apply_annihilate(FockVector::number_state(1));
    CHECK(one[0] == complex{1.0, 0.0});
    CHECK(one[1] == complex{0.0, 0.0});
}

TEST_CASE("annihilation on (|0> + |2>)/sqrt2 matches the dense matrix") {
    const double s = 1.0 / std::sqrt(2.0);
    const FockVector v({s, 0.0, s});
    const auto got = nbs::apply_annihilate(v);
    const auto want = dense_annihilate(v);
    for (std::size_t n = 0; n < 3; ++n) CHECK(std::abs(got[n] - want[n]) < 1e-15);
    CHECK_THAT(got[1].real(), WithinAbs(1.0, 1e-15));
}

TEST_CASE("annihilation agrees with the dense matrix on random vectors") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto v = random_vector(rng, 3 + trial);
        const auto got = nbs::apply_annihilate(v);
        const auto want = dense_annihilate(v);
        for (std::size_t n = 0; n < v.size(); ++n) CHECK(std::abs(got[n] - want[n]) < 1e-13);
    }
}

TEST_CASE("creation then annihilation gives N+1") {
    CHECK(nbs::apply_create(FockVector::number_state(0)).amplitude(1) == complex{1.0, 0.0});
    for (std::size_t n : {0u, 1u, 4u, 17u}) {
        const auto v = nbs::apply_annihilate(nbs::apply_create(FockVector::number_state(n)));
        CHECK_THAT(v[n].real(), WithinRel(static_cast<double>(n + 1), 1e-14));
        CHECK_THAT(v.norm(), WithinRel(static_cast<double>(n + 1), 1e-14));
    }
}

TEST_CASE("commutator [b, b^dagger] = 1 on random vectors") {
    std::mt19937_64 rng(11);
    const nbs::TruncationPolicy policy;
    for (int trial = 0; trial < 10; ++trial) {
        const auto v = random_vector(rng, 12);
        const auto ab = nbs::apply_annihilate(nbs::apply_create(v, policy));
        const auto ba = nbs::apply_create(nbs::apply_annihilate(v), policy);
        CHECK(nbs::distance(ab - ba, v) < 1e-12);
    }
}

TEST_CASE("creation at the hard cap") {
    nbs::TruncationPolicy policy;
    policy.hard_cap = 2;
    policy.tail_tol = 1e-6;

    SECTION("negligible top amplitude is folded into the tail bound") {
        const FockVector v({1.0, 0.0, 1e-5});
        const auto w = nbs::apply_create(v, policy);
        CHECK(w.n_max() == 2);
        CHECK_THAT(w.tail_bound(), WithinRel(3e-10, 1e-12));
    }
    SECTION("significant mass throws") {
        CHECK_THROWS_AS(nbs::apply_create(FockVector::number_state(2), policy), nbs::CapExceeded);
    }
}

TEST_CASE("inner products of number states") {
    CHECK(nbs::inner(FockVector::number_state(3), FockVector::number_state(3)) == complex{1.0, 0.0});
    CHECK(nbs::inner(FockVector::number_state(2), FockVector::number_state(3)) == complex{0.0, 0.0});
    // Different lengths are zero-padded.
    CHECK(nbs::inner(FockVector::number_state(2, 10), FockVector::number_state(2)) == complex{1.0, 0.0});
}

TEST_CASE("inner product is conjugate symmetric and linear") {
    std::mt19937_64 rng(3);
    const auto u = random_vector(rng, 9);
    const auto v = random_vector(rng, 14);
    const auto w = random_vector(rng, 6);
    CHECK(std::abs(nbs::inner(u, v) - std::conj(nbs::inner(v, u))) < 1e-15);
    const complex a{0.3, -1.2};
    const auto lhs = nbs::inner(u, nbs::axpy(a, v, w));
    const auto rhs = a * nbs::inner(u, v) + nbs::inner(u, w);
    CHECK(std::abs(lhs - rhs) < 1e-14);
}

TEST_CASE("NBS has unit norm") {
    for (double e2 : {0.1, 0.5, 0.9})
        for (int m : {1, 3, 20}) {
            const auto v = nbs::nbs_state(nbs::NbsParams::from_eta2(e2, 0.7, m));
            CHECK(std::abs(nbs::inner(v, v).real() - 1.0) <= 1e-12 + 1e-15);
        }
}

TEST_CASE("expectations on simple states") {
    SECTION("number state |5>") {
        const auto mo = nbs::expectations(FockVector::number_state(5));
        CHECK(mo.mean_n == 5.0);
        CHECK(mo.mean_n2 == 25.0);
        CHECK(mo.mean_b == complex{0.0, 0.0});
    }
    SECTION("coherent alpha = 1") {
        const auto mo = nbs::expectations(nbs::coherent_state({1.0, 0.0}));
        CHECK_THAT(mo.mean_n, WithinAbs(1.0, 1e-11));
        CHECK_THAT(mo.mean_b.real(), WithinAbs(1.0, 1e-11));
        CHECK_THAT(mo.mean_b.imag(), WithinAbs(0.0, 1e-15));
    }
    SECTION("NBS eta^2 = 0.5, M = 2 against brute-force pmf sums") {
        const auto p = nbs::NbsParams::from_eta2(0.5, 0.0, 2);
        const auto mo = nbs::expectations(nbs::nbs_state(p, {1e-20, 1 << 20}));
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t n = 0; n < 200; ++n) {
            const double w = nbs::nbd_pmf(n, p.eta, 2);
            s1 += n * w;
            s2 += static_cast<double>(n * n) * w;
        }
        CHECK_THAT(s1, WithinRel(2.0, 1e-12));
        CHECK_THAT(s2, WithinRel(8.0, 1e-12));
        CHECK_THAT(mo.mean_n, WithinRel(2.0, 1e-12));
        CHECK_THAT(mo.mean_n2, WithinRel(8.0, 1e-12));
        CHECK_THAT(mo.mean_n2 - mo.mean_n * mo.mean_n, WithinRel(4.0, 1e-12));
    }
    SECTION("<b^dagger b> for NBS eta^2 = 0.5, M = 1") {
        const auto v = nbs::nbs_state(nbs::NbsParams::from_eta2(0.5, 0.0, 1), {1e-20, 1 << 20});
        CHECK_THAT(nbs::inner(v, nbs::apply_create(nbs::apply_annihilate(v))).real(), WithinRel(1.0, 1e-12));
    }
}

TEST_CASE("expectations rejects unnormalized input") {
    const FockVector v({1.0, 1.0});
    CHECK_THROWS_AS(nbs::expectations(v), nbs::NotNormalized);
}

TEST_CASE("rotate_phase multiplies amplitude n by e^{i n phi}") {
    const FockVector v({0.5, 0.5, 0.5, 0.5});
    const auto w = nbs::rotate_phase(v, 0.4);
    for (std::size_t n = 0; n < 4; ++n) CHECK(std::abs(w[n] - 0.5 * std::polar(1.0, 0.4 * n)) < 1e-16);
}

TEST_CASE("truncation policy validation") {
    CHECK_THROWS_AS((nbs::TruncationPolicy{0.0, 10}.validate()), nbs::DomainError);
    CHECK_THROWS_AS((nbs::TruncationPolicy{1.0, 10}.validate()), nbs::DomainError);
    CHECK_THROWS_AS((nbs::TruncationPolicy{1e-12, 0}.validate()), nbs::DomainError);
    CHECK_NOTHROW((nbs::TruncationPolicy{}.validate()));
}
