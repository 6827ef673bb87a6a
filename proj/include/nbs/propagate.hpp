#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "nbs/errors.hpp"
#include "nbs/fock.hpp"
#include "nbs/summation.hpp"

namespace nbs {

/// Anti-Hermitian tridiagonal generator on |0>..|dim-1>:
///   A|n> = z beta_n |n+1> - conj(z) beta_{n-1} |n-1>.
/// Covers both zeta K+ - zeta* K- and the amplifier's pair-subspace generator.
class TridiagonalGenerator {
public:
    TridiagonalGenerator(complex z, std::vector<double> couplings)
        : z_(z), beta_(std::move(couplings)) {}

    /// beta_n for n = 0..dim-2.
    [[nodiscard]] std::size_t dim() const noexcept { return beta_.size() + 1; }
    [[nodiscard]] complex z() const noexcept { return z_; }
    [[nodiscard]] double coupling(std::size_t n) const noexcept { return beta_[n]; }

    // y[0..hi+1] = A x, where x vanishes above hi. Returns the new support end.
    std::size_t apply(const std::vector<complex>& x, std::vector<complex>& y, std::size_t hi) const {
        const std::size_t top = std::min(hi + 1, dim() - 1);
        const complex zc = std::conj(z_);
        for (std::size_t n = 0; n <= top; ++n) {
            complex acc{0.0, 0.0};
            if (n > 0) acc += z_ * beta_[n - 1] * x[n - 1];
            if (n + 1 < dim() && n + 1 <= hi) acc -= zc * beta_[n] * x[n + 1];
            y[n] = acc;
        }
        return top;
    }

private:
    complex z_;
    std::vector<double> beta_;
};

struct PropagationOptions {
    double term_tol = 1e-17;     // Taylor series cut, relative to the state norm
    int max_order = 40;
    double max_term_growth = 1e2;  // rejects steps whose series would cancel badly
    double norm_tol = 1e-12;     // per-step norm drift allowed
    double min_step = 1e-12;
};

struct PropagationResult {
    FockVector state;
    std::size_t steps = 0;
    std::size_t rejected = 0;
    double max_norm_drift = 0.0;
};

/// psi(1) for d psi/ds = A psi, psi(0) = initial, by adaptive Taylor steps.
/// Each step sums the local series until its terms fall below term_tol, and the
/// norm is checked after every accepted step (A is anti-Hermitian, so any drift
/// is numerical error).
inline PropagationResult propagate(const TridiagonalGenerator& gen, const FockVector& initial,
                                   const PropagationOptions& opt = {}) {
    const std::size_t dim = gen.dim();
    if (initial.size() > dim) {
        throw IntegrationFailure("propagate: initial state longer than generator dimension");
    }
    std::vector<complex> psi(dim, complex{0.0, 0.0});
    std::size_t hi = 0;
    for (std::size_t n = 0; n < initial.size(); ++n) {
        psi[n] = initial[n];
        if (psi[n] != complex{0.0, 0.0}) hi = n;
    }
    const double norm0 = initial.norm();
    if (norm0 == 0.0) {
        return {FockVector(std::move(psi), initial.tail_bound()), 0, 0, 0.0};
    }

    auto vec_norm = [](const std::vector<complex>& v, std::size_t top) {
        CompensatedSum<double> s;
        for (std::size_t n = 0; n <= top; ++n) s += std::norm(v[n]);
        return std::sqrt(s.value());
    };

    PropagationResult result;
    std::vector<complex> term(dim), next(dim), acc(dim);
    double s = 0.0;
    double h = 1.0;
    while (s < 1.0) {
        h = std::min(h, 1.0 - s);
        if (h < opt.min_step) {
            throw IntegrationFailure("propagate: step size underflow at s = " + format_value(s));
        }
        std::copy(psi.begin(), psi.end(), term.begin());
        std::copy(psi.begin(), psi.end(), acc.begin());
        std::size_t term_hi = hi;
        std::size_t acc_hi = hi;
        bool converged = false;
        bool blown = false;
        int order = 0;
        for (int k = 1; k <= opt.max_order; ++k) {
            term_hi = gen.apply(term, next, term_hi);
            const double scale = h / static_cast<double>(k);
            for (std::size_t n = 0; n <= term_hi; ++n) {
                next[n] *= scale;
                acc[n] += next[n];
            }
            acc_hi = std::max(acc_hi, term_hi);
            std::swap(term, next);
            const double tn = vec_norm(term, term_hi);
            if (tn > opt.max_term_growth * norm0) {
                blown = true;
                break;
            }
            if (tn <= opt.term_tol * norm0) {
                converged = true;
                order = k;
                break;
            }
        }
        if (!converged || blown) {
            h *= 0.5;
            ++result.rejected;
            continue;
        }
        std::copy(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(acc_hi + 1), psi.begin());
        hi = acc_hi;
        while (hi > 0 && psi[hi] == complex{0.0, 0.0}) --hi;
        s += h;
        ++result.steps;

        const double drift = std::abs(vec_norm(psi, hi) - norm0) / norm0;
        result.max_norm_drift = std::max(result.max_norm_drift, drift);
        if (drift > opt.norm_tol) {
            throw IntegrationFailure("propagate: norm drift " + format_value(drift) +
                                     " exceeds tolerance at s = " + format_value(s));
        }
        if (order < opt.max_order / 2) h *= 1.5;
    }
    result.state = FockVector(std::move(psi), initial.tail_bound());
    return result;
}

}  // namespace nbs
