#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "nbs/errors.hpp"
#include "nbs/fock.hpp"
#include "nbs/propagate.hpp"
#include "nbs/states.hpp"

// Holstein-Primakoff realization of su(1,1) with Bargmann index M/2:
//   K+ = b^dagger sqrt(M+N),  K- = sqrt(M+N) b,  K0 = M/2 + N.
namespace nbs::su11 {

/// Displacement parameter zeta_C = e^{i theta} |zeta|, |zeta| = artanh(eta).
struct Su11Params {
    int m = 1;
    double zeta_mag = 0.0;
    double theta = 0.0;

    void validate() const {
        if (m < 1) throw DomainError("m must be >= 1");
        if (!std::isfinite(zeta_mag) || zeta_mag < 0.0) {
            throw DomainError("zeta_mag must be finite and >= 0");
        }
        if (!(std::tanh(zeta_mag) < 1.0)) {
            throw DomainError("tanh(zeta_mag) rounds to 1; state is not representable");
        }
    }

    [[nodiscard]] double eta() const { return std::tanh(zeta_mag); }

    static Su11Params from_nbs(const NbsParams& p) {
        p.validate();
        return {p.m, std::atanh(p.eta), p.theta};
    }
};

inline void check_order(int m) {
    if (m < 1) throw DomainError("su(1,1) order m must be >= 1, got " + std::to_string(m));
}

// <n+1|K+|n> = sqrt(n+1) sqrt(M+n)
inline double k_plus_element(std::size_t n, int m) {
    const double dn = static_cast<double>(n);
    return std::sqrt(dn + 1.0) * std::sqrt(static_cast<double>(m) + dn);
}

/// Multiplies amplitude n by f(n).
template <typename F>
FockVector apply_diagonal(const FockVector& v, F f) {
    std::vector<complex> a(v.amplitudes().begin(), v.amplitudes().end());
    for (std::size_t n = 0; n < a.size(); ++n) a[n] *= f(n);
    return FockVector(std::move(a), v.tail_bound());
}

/// K+ = b^dagger sqrt(M+N). Grows n_max by one; cap handling follows apply_create.
inline FockVector k_plus_apply(const FockVector& v, int m, const TruncationPolicy& policy = {}) {
    check_order(m);
    const std::size_t n_max = v.n_max();
    const bool grow = n_max < policy.hard_cap;
    std::vector<complex> a(grow ? n_max + 2 : n_max + 1, complex{0.0, 0.0});
    for (std::size_t n = 0; n + 1 < a.size(); ++n) a[n + 1] = k_plus_element(n, m) * v[n];
    double tail = v.tail_bound();
    if (!grow) {
        const double lost = std::norm(k_plus_element(n_max, m) * v[n_max]);
        if (lost > policy.tail_tol) {
            throw CapExceeded("k_plus_apply: mass pushed past hard cap");
        }
        tail += lost;
    }
    return FockVector(std::move(a), tail);
}

/// K+ in the other ordering, sqrt(M-1+N) b^dagger, built by composition.
inline FockVector k_plus_apply_reordered(const FockVector& v, int m,
                                         const TruncationPolicy& policy = {}) {
    check_order(m);
    const double dm = static_cast<double>(m);
    return apply_diagonal(apply_create(v, policy), [dm](std::size_t n) {
        return std::sqrt(dm - 1.0 + static_cast<double>(n));
    });
}

/// K- = sqrt(M+N) b = (K+)^dagger.
inline FockVector k_minus_apply(const FockVector& v, int m) {
    check_order(m);
    std::vector<complex> a(v.size(), complex{0.0, 0.0});
    for (std::size_t n = 0; n + 1 < a.size(); ++n) a[n] = k_plus_element(n, m) * v[n + 1];
    return FockVector(std::move(a), v.tail_bound());
}

inline FockVector k_zero_apply(const FockVector& v, int m) {
    check_order(m);
    const double half_m = 0.5 * static_cast<double>(m);
    return apply_diagonal(v, [half_m](std::size_t n) { return half_m + static_cast<double>(n); });
}

/// Relative deviation between (b^dagger g(N))^n |0> and (b^dagger)^n g(0)...g(n-1) |0>
/// with g(N) = sqrt(M+N), both sides by repeated operator application.
inline double exponential_identity_check(int m, std::size_t n) {
    check_order(m);
    const double dm = static_cast<double>(m);
    auto g = [dm](std::size_t k) { return std::sqrt(dm + static_cast<double>(k)); };
    FockVector lhs = FockVector::number_state(0);
    FockVector rhs = FockVector::number_state(0);
    double prod = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        lhs = apply_create(apply_diagonal(lhs, g));
        rhs = apply_create(rhs);
        prod *= g(k);
    }
    rhs = complex{prod, 0.0} * rhs;
    return distance(lhs, rhs) / rhs.norm();
}

/// (1-|eta_C|^2)^{M/2} exp(eta_C K+) |0>, summed term by term with the closed
/// action K+^n|0> = sqrt(M(M+1)...(M+n-1)) sqrt(n!) |n>. The series is cut with
/// the same certified tail rule as nbs_state.
inline FockVector nbs_exponential_form(const NbsParams& p, const TruncationPolicy& policy = {}) {
    p.validate();
    policy.validate();
    const long double e2 = static_cast<long double>(p.eta) * p.eta;
    const long double lm = static_cast<long double>(p.m);
    const complex step_phase = std::polar(1.0, p.theta);

    // |term_n| tracked as a scaled magnitude, arg(term_n) by repeated multiplication.
    detail::Scaled mag = detail::Scaled::from_log(0.5L * lm * std::log1p(-e2));
    complex phase{1.0, 0.0};
    std::vector<complex> a;
    for (std::size_t n = 0;; ++n) {
        if (n > policy.hard_cap) throw CapExceeded("nbs_exponential_form: hard cap reached");
        const long double m_n = mag.value();
        a.push_back(static_cast<double>(m_n) * phase);
        const long double dn = static_cast<long double>(n);
        // |term_{n+1}| / |term_n| = eta sqrt(M+n) sqrt(n+1) / (n+1)
        const long double ratio = std::sqrt(e2) * std::sqrt(lm + dn) / std::sqrt(dn + 1.0L);
        const long double r2 = ratio * ratio;
        if (r2 < 1.0L) {
            const long double tail = m_n * m_n * r2 / (1.0L - r2);
            if (tail < policy.tail_tol) return FockVector(std::move(a), static_cast<double>(tail));
        }
        mag *= ratio;
        phase *= step_phase;
    }
}

struct DisplacementResult {
    FockVector state;
    std::size_t steps = 0;
    double max_norm_drift = 0.0;
};

/// Generator zeta_C K+ - zeta_C^* K- truncated to |0>..|dim-1>.
inline TridiagonalGenerator displacement_generator(const Su11Params& p, std::size_t dim) {
    std::vector<double> beta(dim > 0 ? dim - 1 : 0);
    for (std::size_t n = 0; n < beta.size(); ++n) beta[n] = k_plus_element(n, p.m);
    return TridiagonalGenerator(std::polar(p.zeta_mag, p.theta), std::move(beta));
}

/// exp(zeta_C K+ - zeta_C^* K-) |0> by propagation. The working dimension is the
/// target NBS's n_max plus a 25% margin.
inline DisplacementResult nbs_displacement_form_detailed(const Su11Params& p,
                                                         const TruncationPolicy& policy = {},
                                                         const PropagationOptions& opt = {}) {
    p.validate();
    const auto target = nbd_truncated(p.eta(), p.m, policy);
    const std::size_t target_nmax = target.probs.size() - 1;
    const std::size_t dim = target_nmax + target_nmax / 4 + 2;
    if (dim - 1 > policy.hard_cap) {
        throw CapExceeded("nbs_displacement_form: working dimension exceeds hard cap");
    }
    const auto gen = displacement_generator(p, dim);
    auto run = propagate(gen, FockVector(std::vector<complex>{1.0}, target.tail_bound), opt);
    return {std::move(run.state), run.steps, run.max_norm_drift};
}

inline FockVector nbs_displacement_form(const Su11Params& p, const TruncationPolicy& policy = {}) {
    return nbs_displacement_form_detailed(p, policy).state;
}

struct LadderResidual {
    double residual = 0.0;
    double bound = 0.0;  // contribution expected from the truncated tail alone
};

/// ||(e^{-i theta} K- - eta^2 e^{i theta} K+ - M eta) |psi>|| for psi = nbs_state(p).
/// The exact state is annihilated, so what remains comes from the cut tail; `bound`
/// estimates it from the boundary amplitude and the pmf ratio there.
inline LadderResidual ladder_residual(const NbsParams& p, const TruncationPolicy& policy = {}) {
    p.validate();
    const FockVector psi = nbs_state(p, policy);
    const double e2 = p.eta2();
    const double dm = static_cast<double>(p.m);
    const complex lower = std::polar(1.0, -p.theta);
    const complex raise = std::polar(e2, p.theta);
    FockVector r = lower * k_minus_apply(psi, p.m);
    r = axpy(-raise, k_plus_apply(psi, p.m, policy), r);
    r = axpy(-dm * p.eta, psi, r);

    LadderResidual out;
    out.residual = r.norm();
    // |c_k|^2 <= |c_nmax|^2 rho^{k-nmax} beyond the cut, rho = ratio at n_max.
    const std::size_t nm = psi.n_max();
    const double dn = static_cast<double>(nm);
    const double rho = e2 * (dm + dn) / (dn + 1.0);
    const double edge = std::norm(psi[nm]);
    double weighted = 0.0;
    double rj = 1.0;
    for (std::size_t j = 1; j < 100000; ++j) {
        rj *= rho;
        const double dk = dn + static_cast<double>(j);
        const double term = rj * (dk + 1.0) * (dm + dk);
        weighted += term;
        if (term < 1e-18 * weighted) break;
    }
    const double tail_norm = std::sqrt(psi.tail_bound());
    out.bound = (1.0 + e2) * std::sqrt(edge * weighted) + dm * p.eta * tail_norm;
    return out;
}

/// ||b psi - alpha e^{i theta} psi|| for psi = NBS(eta = alpha/sqrt(M), theta, M);
/// vanishes in the coherent limit M -> infinity.
inline double coherent_limit_residual(double alpha, double theta, int m,
                                      const TruncationPolicy& policy = {}) {
    check_order(m);
    const NbsParams p{alpha / std::sqrt(static_cast<double>(m)), theta, m};
    const FockVector psi = nbs_state(p, policy);
    return axpy(-std::polar(alpha, theta), psi, apply_annihilate(psi)).norm();
}

/// E-_M = b (N+M-1)^{-1/2}: amplitude n becomes sqrt(n+1)/sqrt(n+M) v_{n+1}.
/// For M = 1 this is the Susskind-Glogower shift sum_n |n><n+1| with E-_1|0> = 0.
inline FockVector em_apply(const FockVector& v, int m) {
    check_order(m);
    const double dm = static_cast<double>(m);
    std::vector<complex> a(v.size(), complex{0.0, 0.0});
    for (std::size_t n = 0; n + 1 < a.size(); ++n) {
        const double dn = static_cast<double>(n);
        a[n] = std::sqrt((dn + 1.0) / (dn + dm)) * v[n + 1];
    }
    return FockVector(std::move(a), v.tail_bound());
}

/// E-_M built as b after the diagonal (N+M-1)^{-1/2}; the 1/0 entry at M = 1,
/// n = 0 is replaced by 0.
inline FockVector em_apply_composed(const FockVector& v, int m) {
    check_order(m);
    const double dm = static_cast<double>(m);
    return apply_annihilate(apply_diagonal(v, [dm](std::size_t n) {
        const double d = static_cast<double>(n) + dm - 1.0;
        return d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }));
}

/// ||E-_M psi - eta e^{i theta} psi|| for psi = nbs_state(p).
inline double em_residual(const NbsParams& p, const TruncationPolicy& policy = {}) {
    p.validate();
    const FockVector psi = nbs_state(p, policy);
    return axpy(-std::polar(p.eta, p.theta), psi, em_apply(psi, p.m)).norm();
}

}  // namespace nbs::su11
