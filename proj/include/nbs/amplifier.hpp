#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "nbs/errors.hpp"
#include "nbs/fock.hpp"
#include "nbs/propagate.hpp"
#include "nbs/states.hpp"

// Nondegenerate parametric amplifier
//   H = w1 a1^dag a1 + w2 a2^dag a2 + i chi (a1^dag a2^dag e^{-2iwt} - a1 a2 e^{2iwt}),
// simulated inside the pair subspace |n, n+K> that the interaction conserves.
//
// The pair-creation element there is sqrt(n+1) sqrt(n+K+1), the K+ element of
// order K+1, so starting from |0, K> produces the negative binomial state of
// order M = K+1. AmplifierConfig::m is that order; the prepared state is
// |0, m-1>.
namespace nbs::amplifier {

struct AmplifierConfig {
    double chi = 1.0;
    double omega1 = 1.0;
    double omega2 = 1.0;
    int m = 1;
    double t = 0.0;

    void validate() const {
        if (!(chi > 0.0) || !std::isfinite(chi)) throw DomainError("chi must be > 0");
        if (!(omega1 > 0.0) || !(omega2 > 0.0)) throw DomainError("omega1, omega2 must be > 0");
        if (m < 1) throw DomainError("m must be >= 1");
        if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("t must be finite and >= 0");
    }

    // Pump matching: 2 omega = omega1 + omega2.
    [[nodiscard]] double omega() const noexcept { return 0.5 * (omega1 + omega2); }
    [[nodiscard]] int idler_excess() const noexcept { return m - 1; }
    [[nodiscard]] double squeeze() const noexcept { return chi * t; }
    [[nodiscard]] double eta() const { return std::tanh(chi * t); }
    [[nodiscard]] double theta() const noexcept { return (omega1 + omega2) * t; }
};

/// Amplitudes over |n> = |n signal, n+K idler>, index-aligned with a FockVector.
struct PairSubspaceVector {
    FockVector amplitudes;
    int idler_excess = 0;
    // n-independent phase left by the H0 sandwich. e^{-iH0 t}|0,K> = e^{-i w2 K t}|0,K>
    // and e^{iH0 t} restores e^{+i w2 K t} on every component, so it is zero.
    double global_phase = 0.0;

    [[nodiscard]] const FockVector& to_fock() const noexcept { return amplitudes; }
    [[nodiscard]] std::size_t signal_photons(std::size_t n) const noexcept { return n; }
    [[nodiscard]] std::size_t idler_photons(std::size_t n) const noexcept {
        return n + static_cast<std::size_t>(idler_excess);
    }
};

/// chi t (a1^dag a2^dag - a1 a2) on |0,K>..|dim-1, dim-1+K>.
/// <n+1, n+1+K| a1^dag a2^dag |n, n+K> = sqrt(n+1) * sqrt(n+K+1).
inline TridiagonalGenerator pair_generator(double chi_t, int idler_excess, std::size_t dim) {
    std::vector<double> beta(dim > 0 ? dim - 1 : 0);
    const double k = static_cast<double>(idler_excess);
    for (std::size_t n = 0; n < beta.size(); ++n) {
        const double signal = std::sqrt(static_cast<double>(n) + 1.0);       // a1^dag on n
        const double idler = std::sqrt(static_cast<double>(n) + k + 1.0);    // a2^dag on n+K
        beta[n] = signal * idler;
    }
    return TridiagonalGenerator(complex{chi_t, 0.0}, std::move(beta));
}

struct EvolveResult {
    PairSubspaceVector state;
    std::size_t steps = 0;
    double max_norm_drift = 0.0;
};

// Working dimension for squeeze parameter chi_t: the n_max of the expected NBS
// plus 25%.
inline std::size_t working_dim(double chi_t, int m, const TruncationPolicy& policy) {
    const double eta = std::tanh(chi_t);
    if (!(eta * eta < 1.0)) {
        throw CapExceeded("tanh(chi t) rounds to 1; no finite truncation exists");
    }
    const auto target = nbd_truncated(eta, m, policy);
    const std::size_t nm = target.probs.size() - 1;
    const std::size_t dim = nm + nm / 4 + 2;
    if (dim - 1 > policy.hard_cap) {
        throw CapExceeded("amplifier: working dimension exceeds hard cap");
    }
    return dim;
}

/// Rotating-frame evolution exp(chi_t (a1^dag a2^dag - a1 a2)) applied to `from`.
inline EvolveResult squeeze(const PairSubspaceVector& from, double chi_t, std::size_t dim,
                            const PropagationOptions& opt = {}) {
    if (from.amplitudes.size() > dim) dim = from.amplitudes.size();
    const auto gen = pair_generator(chi_t, from.idler_excess, dim);
    auto run = propagate(gen, from.amplitudes, opt);
    return {PairSubspaceVector{std::move(run.state), from.idler_excess, from.global_phase}, run.steps,
            run.max_norm_drift};
}

inline PairSubspaceVector pair_vacuum(int m) {
    return PairSubspaceVector{FockVector::number_state(0), m - 1, 0.0};
}

/// Applies e^{iH0 t} (.) e^{-iH0 t}'s effect on the rotating-frame state:
/// component n picks up e^{i (w1 + w2) t n}.
inline PairSubspaceVector apply_frame_phase(const PairSubspaceVector& v, const AmplifierConfig& cfg) {
    return PairSubspaceVector{rotate_phase(v.amplitudes, cfg.theta()), v.idler_excess, v.global_phase};
}

/// U(t)|0, m-1> by norm-monitored propagation followed by the H0 phase sandwich.
inline EvolveResult evolve_detailed(const AmplifierConfig& cfg, const TruncationPolicy& policy = {},
                                    const PropagationOptions& opt = {}) {
    cfg.validate();
    policy.validate();
    if (cfg.t == 0.0) return {pair_vacuum(cfg.m), 0, 0.0};
    const std::size_t dim = working_dim(cfg.squeeze(), cfg.m, policy);
    auto run = squeeze(pair_vacuum(cfg.m), cfg.squeeze(), dim, opt);
    run.state = apply_frame_phase(run.state, cfg);
    return run;
}

inline PairSubspaceVector evolve(const AmplifierConfig& cfg, const TruncationPolicy& policy = {}) {
    return evolve_detailed(cfg, policy).state;
}

/// Closed-form evolved state:
///   sum_n [C(n+M-1, n) (1 - tanh^2 chi t)^M tanh^{2n} chi t]^{1/2} e^{i 2 w t n} |n>.
inline PairSubspaceVector analytic_evolved_state(const AmplifierConfig& cfg,
                                                 const TruncationPolicy& policy = {}) {
    cfg.validate();
    const double x = cfg.squeeze();
    const double th = std::tanh(x);
    if (!(th * th < 1.0)) throw CapExceeded("tanh(chi t) rounds to 1; no finite truncation exists");
    const auto cut = nbd_truncated(th, cfg.m, policy);
    const double dm = static_cast<double>(cfg.m);
    // log(1 - tanh^2 x) = -2 log cosh x
    const double log_sech2 = -2.0 * std::log(std::cosh(x));
    const double log_t2 = th > 0.0 ? 2.0 * std::log(th) : 0.0;
    std::vector<complex> a(cut.probs.size());
    for (std::size_t n = 0; n < a.size(); ++n) {
        const double dn = static_cast<double>(n);
        double log_w = std::lgamma(dn + dm) - std::lgamma(dn + 1.0) - std::lgamma(dm) + dm * log_sech2;
        if (n > 0) log_w += dn * log_t2;
        const double mag = (n > 0 && th == 0.0) ? 0.0 : std::exp(0.5 * log_w);
        a[n] = std::polar(mag, cfg.theta() * dn);
    }
    return PairSubspaceVector{FockVector(std::move(a), cut.tail_bound), cfg.idler_excess(), 0.0};
}

}  // namespace nbs::amplifier
