#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "nbs/errors.hpp"
#include "nbs/fock.hpp"
#include "nbs/summation.hpp"

namespace nbs {

/// Negative binomial state |eta e^{i theta}; M>.
struct NbsParams {
    double eta = 0.0;
    double theta = 0.0;
    int m = 1;

    [[nodiscard]] double eta2() const noexcept { return eta * eta; }

    void validate() const {
        if (!std::isfinite(eta) || eta < 0.0) {
            throw DomainError("eta must be finite and >= 0, got " + format_value(eta));
        }
        if (!(eta * eta < 1.0)) {
            throw DomainError("eta^2 must be < 1, got " + format_value(eta * eta));
        }
        if (!std::isfinite(theta)) {
            throw DomainError("theta must be finite");
        }
        if (m < 1) {
            throw DomainError("m must be >= 1, got " + std::to_string(m));
        }
    }

    static NbsParams from_eta2(double eta2, double theta, int m) {
        if (!(eta2 >= 0.0)) {
            throw DomainError("eta2 must be >= 0, got " + format_value(eta2));
        }
        return {std::sqrt(eta2), theta, m};
    }
};

struct CoherentParams {
    double alpha_mag = 0.0;
    double theta = 0.0;
};

namespace detail {

// Value m * 2^e kept in long double so a recurrence can run through magnitudes
// far below the double range without underflow.
struct Scaled {
    long double mant = 1.0L;
    long long exp2 = 0;

    static Scaled from_log(long double log_value) {
        Scaled s;
        const long double ln2 = std::numbers::ln2_v<long double>;
        s.exp2 = static_cast<long long>(std::floor(log_value / ln2));
        s.mant = std::exp(log_value - static_cast<long double>(s.exp2) * ln2);
        s.normalize();
        return s;
    }

    void normalize() {
        if (mant == 0.0L) return;
        int e = 0;
        mant = std::frexp(mant, &e);
        exp2 += e;
    }

    Scaled& operator*=(long double r) {
        mant *= r;
        normalize();
        return *this;
    }

    [[nodiscard]] long double value() const {
        if (exp2 < std::numeric_limits<long double>::min_exponent - 64) return 0.0L;
        return std::ldexp(mant, static_cast<int>(exp2));
    }
};

struct TruncatedPmf {
    std::vector<double> probs;  // p_0 .. p_nmax
    double tail_bound = 0.0;
};

// Runs p_{n+1} = p_n * ratio(n) from p_0 = exp(log_p0) and stops at the first n
// where ratio(n) < 1 and p_n ratio(n) / (1 - ratio(n)) < tail_tol. The ratios
// must be nonincreasing in n, which makes that expression a bound on the mass
// beyond n.
template <typename Ratio>
TruncatedPmf truncated_pmf(long double log_p0, Ratio ratio, const TruncationPolicy& policy,
                           const char* what) {
    policy.validate();
    TruncatedPmf out;
    Scaled p = Scaled::from_log(log_p0);
    for (std::size_t n = 0;; ++n) {
        if (n > policy.hard_cap) {
            throw CapExceeded(std::string(what) + ": tail mass still above " +
                              format_value(policy.tail_tol) + " at hard cap " +
                              std::to_string(policy.hard_cap));
        }
        const long double pn = p.value();
        out.probs.push_back(static_cast<double>(pn));
        const long double r = ratio(n);
        if (r < 1.0L) {
            const long double tail = pn * r / (1.0L - r);
            if (tail < policy.tail_tol) {
                out.tail_bound = static_cast<double>(tail);
                return out;
            }
        }
        p *= r;
    }
}

}  // namespace detail

/// log B_n(eta; M) through lgamma; -inf where the pmf is exactly zero.
inline double log_nbd_pmf(std::size_t n, double eta, int m) {
    NbsParams{eta, 0.0, m}.validate();
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    if (eta == 0.0) {
        return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    return std::lgamma(dm + dn) - std::lgamma(dn + 1.0) - std::lgamma(dm) +
           2.0 * dn * std::log(eta) + dm * std::log1p(-eta * eta);
}

/// Negative binomial pmf C(M+n-1, n) eta^{2n} (1-eta^2)^M.
inline double nbd_pmf(std::size_t n, double eta, int m) { return std::exp(log_nbd_pmf(n, eta, m)); }

/// Photon distribution of NBS(eta, M) cut by `policy`.
inline detail::TruncatedPmf nbd_truncated(double eta, int m, const TruncationPolicy& policy) {
    NbsParams{eta, 0.0, m}.validate();
    const long double e2 = static_cast<long double>(eta) * static_cast<long double>(eta);
    const long double log_p0 = static_cast<long double>(m) * std::log1p(-e2);
    const long double lm = static_cast<long double>(m);
    return detail::truncated_pmf(
        log_p0,
        [=](std::size_t n) {
            const long double dn = static_cast<long double>(n);
            return e2 * (lm + dn) / (dn + 1.0L);
        },
        policy, "nbs_state");
}

/// |eta e^{i theta}; M> = sum_n sqrt(B_n) e^{i n theta} |n>.
inline FockVector nbs_state(const NbsParams& p, const TruncationPolicy& policy = {}) {
    p.validate();
    const auto pmf = nbd_truncated(p.eta, p.m, policy);
    std::vector<complex> a(pmf.probs.size());
    for (std::size_t n = 0; n < a.size(); ++n) {
        a[n] = std::polar(std::sqrt(pmf.probs[n]), static_cast<double>(n) * p.theta);
    }
    return FockVector(std::move(a), pmf.tail_bound);
}

/// M = 1 member, built from its own closed form sqrt(1-eta^2) eta^n e^{i n theta}.
/// The discarded mass beyond n is exactly eta^{2(n+1)}.
inline FockVector geometric_state(double eta, double theta, const TruncationPolicy& policy = {}) {
    NbsParams{eta, theta, 1}.validate();
    policy.validate();
    const double e2 = eta * eta;
    const double front = std::sqrt(1.0 - e2);
    std::vector<complex> a;
    for (std::size_t n = 0;; ++n) {
        if (n > policy.hard_cap) {
            throw CapExceeded("geometric_state: hard cap reached");
        }
        const double dn = static_cast<double>(n);
        a.push_back(std::polar(front * std::pow(eta, dn), dn * theta));
        const double tail = std::pow(e2, dn + 1.0);
        if (tail < policy.tail_tol) {
            return FockVector(std::move(a), tail);
        }
    }
}

/// Glauber coherent state with amplitude alpha_mag e^{i theta}.
inline FockVector coherent_state(const CoherentParams& p, const TruncationPolicy& policy = {}) {
    if (!std::isfinite(p.alpha_mag) || p.alpha_mag < 0.0) {
        throw DomainError("alpha_mag must be finite and >= 0");
    }
    const long double a2 = static_cast<long double>(p.alpha_mag) * p.alpha_mag;
    const auto pmf = detail::truncated_pmf(
        -a2, [=](std::size_t n) { return a2 / (static_cast<long double>(n) + 1.0L); }, policy,
        "coherent_state");
    std::vector<complex> a(pmf.probs.size());
    for (std::size_t n = 0; n < a.size(); ++n) {
        a[n] = std::polar(std::sqrt(pmf.probs[n]), static_cast<double>(n) * p.theta);
    }
    return FockVector(std::move(a), pmf.tail_bound);
}

/// First n_check amplitudes of the geometric state times 1/sqrt(2 pi (1-eta^2)).
/// Tends to e^{i n theta}/sqrt(2 pi) as eta -> 1; the limit is not normalizable
/// so it is never built as a FockVector.
inline std::vector<complex> scaled_phase_amplitudes(double eta, double theta, std::size_t n_check) {
    if (!(eta > 0.0 && eta < 1.0)) {
        throw DomainError("scaled_phase_amplitudes needs 0 < eta < 1");
    }
    const double one_minus = 1.0 - eta * eta;
    const double scale = 1.0 / std::sqrt(2.0 * std::numbers::pi * one_minus);
    const double front = std::sqrt(one_minus);
    std::vector<complex> out(n_check);
    for (std::size_t n = 0; n < n_check; ++n) {
        const double dn = static_cast<double>(n);
        out[n] = scale * std::polar(front * std::pow(eta, dn), dn * theta);
    }
    return out;
}

/// Integrates |theta><theta| over [-pi, pi) with a uniform rule of
/// `quadrature_points` nodes, restricted to photon numbers 0..n_max, and returns
/// the max-norm distance of the result from the identity. The rule is exact
/// whenever quadrature_points > n_max.
inline double phase_identity_check(std::size_t n_max, std::size_t quadrature_points) {
    if (quadrature_points == 0) {
        throw DomainError("phase_identity_check: need at least one quadrature point");
    }
    const double pi = std::numbers::pi;
    const double weight = 2.0 * pi / static_cast<double>(quadrature_points);
    const double inv_2pi = 1.0 / (2.0 * pi);
    double worst = 0.0;
    for (std::size_t n = 0; n <= n_max; ++n) {
        for (std::size_t m = 0; m <= n_max; ++m) {
            CompensatedSum<complex> s;
            const double k = static_cast<double>(n) - static_cast<double>(m);
            for (std::size_t j = 0; j < quadrature_points; ++j) {
                const double th = -pi + weight * static_cast<double>(j);
                s += std::polar(weight * inv_2pi, k * th);
            }
            const complex target = n == m ? complex{1.0, 0.0} : complex{0.0, 0.0};
            worst = std::max(worst, std::abs(s.value() - target));
        }
    }
    return worst;
}

}  // namespace nbs
