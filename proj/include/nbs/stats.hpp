#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>

#include "nbs/errors.hpp"
#include "nbs/fock.hpp"
#include "nbs/states.hpp"
#include "nbs/summation.hpp"

namespace nbs {

/// Photon-number moments and the two derived indicators. mandel_q and g2 are NaN
/// when the mean photon number is below kVacuumMean.
struct PhotonStats {
    double mean_n = 0.0;
    double mean_n2 = 0.0;
    double var_n = 0.0;
    double mandel_q = 0.0;
    double g2 = 0.0;
};

struct QuadratureReport {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = 0.0;
    double var_p = 0.0;
    double uncertainty_product = 0.0;
};

inline constexpr double kVacuumMean = 1e-14;

/// Tail tolerance used by the residual-style checks, where the result is
/// dominated by the boundary amplitude sqrt(tail).
inline constexpr TruncationPolicy kTightPolicy{1e-30, std::size_t{1} << 20};

/// `p` with tail_tol lowered to kTightPolicy's; hard_cap is kept.
inline TruncationPolicy tightened(const TruncationPolicy& p) {
    TruncationPolicy t = p;
    t.tail_tol = std::min(p.tail_tol, kTightPolicy.tail_tol);
    return t;
}

/// Closed forms: <N> = M eta^2/(1-eta^2), <N^2> = (M eta^2 + M^2 eta^4)/(1-eta^2)^2,
/// Var N = M eta^2/(1-eta^2)^2, Q = eta^2/(1-eta^2), g2 = 1 + 1/M.
inline PhotonStats photon_stats_closed(const NbsParams& p) {
    p.validate();
    const double e2 = p.eta2();
    const double dm = static_cast<double>(p.m);
    const double one_minus = 1.0 - e2;
    PhotonStats s;
    s.mean_n = dm * e2 / one_minus;
    s.mean_n2 = (dm * e2 + dm * dm * e2 * e2) / (one_minus * one_minus);
    s.var_n = dm * e2 / (one_minus * one_minus);
    s.mandel_q = e2 / one_minus;
    s.g2 = 1.0 + 1.0 / dm;
    return s;
}

inline PhotonStats photon_stats_from_moments(const Moments& mo) {
    PhotonStats s;
    s.mean_n = mo.mean_n;
    s.mean_n2 = mo.mean_n2;
    s.var_n = mo.mean_n2 - mo.mean_n * mo.mean_n;
    if (mo.mean_n < kVacuumMean) {
        s.mandel_q = std::numeric_limits<double>::quiet_NaN();
        s.g2 = std::numeric_limits<double>::quiet_NaN();
    } else {
        s.mandel_q = (s.var_n - s.mean_n) / s.mean_n;
        s.g2 = mo.mean_bdag2_b2 / (mo.mean_n * mo.mean_n);
    }
    return s;
}

/// All fields from amplitude sums; g2 = <b^dag b^dag b b>/<b^dag b>^2.
inline PhotonStats photon_stats_direct(const FockVector& v, double slack = 1e-9) {
    const Moments mo = expectations(v, slack);
    if (mo.mean_n < kVacuumMean) {
        throw Degenerate("photon_stats_direct: <N> = " + format_value(mo.mean_n) +
                         " too small for Q and g2");
    }
    return photon_stats_from_moments(mo);
}

// x = (b^dag + b)/sqrt2, p = i(b^dag - b)/sqrt2:
//   <x> = sqrt2 Re<b>, <p> = sqrt2 Im<b>,
//   <x^2> = |psi|^2/2 + <N> + Re<b^2>, <p^2> = |psi|^2/2 + <N> - Re<b^2>.
inline QuadratureReport quadrature_from_moments(const Moments& mo) {
    QuadratureReport q;
    const double half = 0.5 * mo.norm_squared;
    q.mean_x = std::numbers::sqrt2 * mo.mean_b.real();
    q.mean_p = std::numbers::sqrt2 * mo.mean_b.imag();
    q.var_x = half + mo.mean_n + mo.mean_b2.real() - q.mean_x * q.mean_x;
    q.var_p = half + mo.mean_n - mo.mean_b2.real() - q.mean_p * q.mean_p;
    q.uncertainty_product = q.var_x * q.var_p;
    return q;
}

inline QuadratureReport quadrature_direct(const FockVector& v, double slack = 1e-9) {
    return quadrature_from_moments(expectations(v, slack));
}

/// Result of summing the closed-form quadrature series.
struct SeriesResult {
    double value = 0.0;
    std::size_t terms = 0;
    // eta^2 sum_n B_n (M+n), which must reproduce M eta^2/(1-eta^2).
    double identity_sum = 0.0;
    double identity_closed = 0.0;
    double identity_rel_error = 0.0;
};

namespace detail {

struct QuadratureSums {
    long double b_sqrt = 0;        // sum B_n sqrt(M+n)
    long double b_lin = 0;         // sum B_n (M+n)
    long double b_pair = 0;        // sum B_n sqrt((M+n)(M+n+1))
    long double b_gap = 0;         // sum B_n sqrt(M+n) (sqrt(M+n+1) - sqrt(M+n))
    std::size_t terms = 0;
};

// Sums over n with B_n built from accumulated log ratios
// log B_{n+1} = log B_n + log eta^2 + log(M+n) - log(n+1). Stops once the
// geometric bound on every remaining weighted sum is below terms_tol.
inline QuadratureSums quadrature_sums(const NbsParams& p, double terms_tol, std::size_t max_terms) {
    const long double e2 = static_cast<long double>(p.eta) * p.eta;
    const long double lm = static_cast<long double>(p.m);
    const long double log_e2 = std::log(e2);
    long double log_b = lm * std::log1p(-e2);
    CompensatedSum<long double> s_sqrt, s_lin, s_pair, s_gap;
    QuadratureSums out;
    for (std::size_t n = 0;; ++n) {
        if (n >= max_terms) {
            throw ConvergenceError("quadrature series did not converge within " +
                                   std::to_string(max_terms) + " terms");
        }
        const long double dn = static_cast<long double>(n);
        const long double a = lm + dn;
        const long double b = std::exp(log_b);
        const long double ra = std::sqrt(a);
        const long double ra1 = std::sqrt(a + 1.0L);
        s_sqrt += b * ra;
        s_lin += b * a;
        s_pair += b * ra * ra1;
        s_gap += b * ra / (ra1 + ra);
        const long double rho = e2 * a / (dn + 1.0L);
        if (rho < 1.0L) {
            const long double tail = b * ((a + 1.0L) * rho / (1.0L - rho) + rho / ((1.0L - rho) * (1.0L - rho)));
            if (tail < terms_tol) {
                out.terms = n + 1;
                break;
            }
        }
        log_b += log_e2 + std::log(a) - std::log(dn + 1.0L);
    }
    out.b_sqrt = s_sqrt.value();
    out.b_lin = s_lin.value();
    out.b_pair = s_pair.value();
    out.b_gap = s_gap.value();
    return out;
}

inline void check_series_params(const NbsParams& p) {
    p.validate();
    if (!(p.eta > 0.0)) {
        throw DomainError("series evaluation needs 0 < eta^2 < 1");
    }
}

inline SeriesResult identity_part(const NbsParams& p, const QuadratureSums& s, double value) {
    SeriesResult r;
    const long double e2 = static_cast<long double>(p.eta) * p.eta;
    r.value = value;
    r.terms = s.terms;
    r.identity_sum = static_cast<double>(e2 * s.b_lin);
    r.identity_closed = static_cast<double>(static_cast<long double>(p.m) * e2 / (1.0L - e2));
    r.identity_rel_error = std::abs(r.identity_sum - r.identity_closed) / r.identity_closed;
    return r;
}

}  // namespace detail

/// <Delta p^2> from the closed series
///   1/2 - eta^2 sum B_n sqrt(M+n) (cos 2theta sqrt(M+n+1) - sqrt(M+n))
///       - 2 sin^2 theta eta^2 (sum B_n sqrt(M+n))^2,
/// where eta^2 sum B_n (M+n) is the resummed <N>. The bracket is split as
/// cos 2theta (sqrt(M+n+1) - sqrt(M+n)) - 2 sin^2 theta sqrt(M+n) so that no
/// term cancels at theta = 0.
inline SeriesResult var_p_series_detailed(const NbsParams& p, double terms_tol = 1e-12,
                                          std::size_t max_terms = std::size_t{1} << 24) {
    detail::check_series_params(p);
    const auto s = detail::quadrature_sums(p, terms_tol, max_terms);
    const long double e2 = static_cast<long double>(p.eta) * p.eta;
    const long double c2 = std::cos(2.0L * p.theta);
    const long double sn = std::sin(static_cast<long double>(p.theta));
    const long double sin2 = sn * sn;
    const long double spread = s.b_lin - s.b_sqrt * s.b_sqrt;
    const long double v = 0.5L - e2 * c2 * s.b_gap + 2.0L * sin2 * e2 * spread;
    auto r = detail::identity_part(p, s, static_cast<double>(v));
    if (r.identity_rel_error > 10.0 * terms_tol + 1e-14) {
        throw ConvergenceError("resummation identity violated: relative error " +
                               format_value(r.identity_rel_error));
    }
    return r;
}

inline double var_p_series(const NbsParams& p, double terms_tol = 1e-12) {
    return var_p_series_detailed(p, terms_tol).value;
}

/// <Delta x^2> = 1/2 + M eta^2/(1-eta^2) + cos 2theta eta^2 sum B_n sqrt((M+n+1)(M+n))
///               - 2 cos^2 theta eta^2 (sum B_n sqrt(M+n))^2.
inline SeriesResult var_x_series_detailed(const NbsParams& p, double terms_tol = 1e-12,
                                          std::size_t max_terms = std::size_t{1} << 24) {
    detail::check_series_params(p);
    const auto s = detail::quadrature_sums(p, terms_tol, max_terms);
    const long double e2 = static_cast<long double>(p.eta) * p.eta;
    const long double lm = static_cast<long double>(p.m);
    const long double c2 = std::cos(2.0L * p.theta);
    const long double cs = std::cos(static_cast<long double>(p.theta));
    const long double v = 0.5L + lm * e2 / (1.0L - e2) + c2 * e2 * s.b_pair -
                          2.0L * cs * cs * e2 * s.b_sqrt * s.b_sqrt;
    auto r = detail::identity_part(p, s, static_cast<double>(v));
    if (r.identity_rel_error > 10.0 * terms_tol + 1e-14) {
        throw ConvergenceError("resummation identity violated: relative error " +
                               format_value(r.identity_rel_error));
    }
    return r;
}

inline double var_x_series(const NbsParams& p, double terms_tol = 1e-12) {
    return var_x_series_detailed(p, terms_tol).value;
}

/// Distance between b^k |eta e^{i theta}; M> and
/// (eta e^{i theta}/sqrt(1-eta^2))^k sqrt(M(M+1)...(M+k-1)) |eta e^{i theta}; M+k>.
inline double bk_shift_check(const NbsParams& p, int k, const TruncationPolicy& policy = kTightPolicy) {
    p.validate();
    if (k < 1) throw DomainError("bk_shift_check: k must be >= 1");
    FockVector lhs = nbs_state(p, policy);
    for (int j = 0; j < k; ++j) lhs = apply_annihilate(lhs);

    double rising = 1.0;
    for (int j = 0; j < k; ++j) rising *= static_cast<double>(p.m + j);
    const complex z = std::polar(p.eta / std::sqrt(1.0 - p.eta2()), p.theta);
    const complex factor = std::pow(z, k) * std::sqrt(rising);
    const FockVector rhs = factor * nbs_state({p.eta, p.theta, p.m + k}, policy);
    return distance(lhs, rhs);
}

}  // namespace nbs
