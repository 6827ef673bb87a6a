#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nbs/errors.hpp"
#include "nbs/summation.hpp"

namespace nbs {

using complex = std::complex<double>;

/// Controls where the infinite Fock expansion of a state is cut.
///
/// `tail_tol` is the largest probability mass a constructor may discard;
/// `hard_cap` is the largest photon number it may keep.
struct TruncationPolicy {
    double tail_tol = 1e-12;
    std::size_t hard_cap = std::size_t{1} << 20;

    void validate() const {
        if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
            throw DomainError("tail_tol must lie in (0, 1), got " + format_value(tail_tol));
        }
        if (hard_cap < 1) {
            throw DomainError("hard_cap must be >= 1");
        }
    }
};

/// Amplitudes c_0..c_nmax of a single-mode state in the number basis, plus a
/// bound on the probability mass that was dropped when the expansion was cut.
/// Immutable after construction.
class FockVector {
public:
    FockVector() : amps_(1, complex{0.0, 0.0}) {}

    explicit FockVector(std::vector<complex> amplitudes, double tail_bound = 0.0)
        : amps_(std::move(amplitudes)), tail_bound_(tail_bound) {
        if (amps_.empty()) {
            throw DomainError("FockVector needs at least one amplitude");
        }
        if (!(tail_bound_ >= 0.0)) {
            throw DomainError("tail_bound must be >= 0");
        }
    }

    static FockVector number_state(std::size_t n, std::size_t n_max) {
        if (n > n_max) {
            throw DomainError("number_state: n exceeds n_max");
        }
        std::vector<complex> a(n_max + 1, complex{0.0, 0.0});
        a[n] = 1.0;
        return FockVector(std::move(a));
    }

    static FockVector number_state(std::size_t n) { return number_state(n, n); }

    [[nodiscard]] std::size_t n_max() const noexcept { return amps_.size() - 1; }
    [[nodiscard]] std::size_t size() const noexcept { return amps_.size(); }
    [[nodiscard]] double tail_bound() const noexcept { return tail_bound_; }
    [[nodiscard]] std::span<const complex> amplitudes() const noexcept { return amps_; }

    [[nodiscard]] complex operator[](std::size_t n) const noexcept { return amps_[n]; }

    // Amplitude with implicit zero padding beyond n_max.
    [[nodiscard]] complex amplitude(std::size_t n) const noexcept {
        return n < amps_.size() ? amps_[n] : complex{0.0, 0.0};
    }

    [[nodiscard]] double norm_squared() const noexcept {
        CompensatedSum<double> s;
        for (const auto& c : amps_) s += std::norm(c);
        return s.value();
    }

    [[nodiscard]] double norm() const noexcept { return std::sqrt(norm_squared()); }

    /// Same state, zero-padded (or cut, if the dropped entries are exactly zero)
    /// to a new n_max.
    [[nodiscard]] FockVector resized(std::size_t new_n_max) const {
        std::vector<complex> a(new_n_max + 1, complex{0.0, 0.0});
        for (std::size_t n = 0; n < amps_.size(); ++n) {
            if (n <= new_n_max) {
                a[n] = amps_[n];
            } else if (amps_[n] != complex{0.0, 0.0}) {
                throw DomainError("resized: would drop a nonzero amplitude");
            }
        }
        return FockVector(std::move(a), tail_bound_);
    }

private:
    std::vector<complex> amps_;
    double tail_bound_ = 0.0;
};

inline FockVector operator*(complex s, const FockVector& v) {
    std::vector<complex> a(v.amplitudes().begin(), v.amplitudes().end());
    for (auto& c : a) c *= s;
    return FockVector(std::move(a), v.tail_bound());
}

// Elementwise combination, zero-padding the shorter operand.
inline FockVector axpy(complex alpha, const FockVector& x, const FockVector& y) {
    const std::size_t len = std::max(x.size(), y.size());
    std::vector<complex> a(len);
    for (std::size_t n = 0; n < len; ++n) a[n] = alpha * x.amplitude(n) + y.amplitude(n);
    return FockVector(std::move(a), std::max(x.tail_bound(), y.tail_bound()));
}

inline FockVector operator+(const FockVector& x, const FockVector& y) { return axpy(1.0, x, y); }
inline FockVector operator-(const FockVector& x, const FockVector& y) { return axpy(-1.0, y, x); }

/// b|n> = sqrt(n)|n-1>. Keeps n_max; the top amplitude of the result is 0.
inline FockVector apply_annihilate(const FockVector& v) {
    const std::size_t len = v.size();
    std::vector<complex> a(len, complex{0.0, 0.0});
    for (std::size_t n = 0; n + 1 < len; ++n) {
        a[n] = std::sqrt(static_cast<double>(n + 1)) * v[n + 1];
    }
    return FockVector(std::move(a), v.tail_bound());
}

/// b^dagger|n> = sqrt(n+1)|n+1>. Grows n_max by one until the policy's hard cap;
/// at the cap the pushed-out amplitude is folded into tail_bound, and CapExceeded
/// is thrown if that mass exceeds tail_tol.
inline FockVector apply_create(const FockVector& v, const TruncationPolicy& policy = {}) {
    const std::size_t n_max = v.n_max();
    const bool grow = n_max < policy.hard_cap;
    std::vector<complex> a(grow ? n_max + 2 : n_max + 1, complex{0.0, 0.0});
    for (std::size_t n = 0; n + 1 < a.size(); ++n) {
        a[n + 1] = std::sqrt(static_cast<double>(n + 1)) * v[n];
    }
    double tail = v.tail_bound();
    if (!grow) {
        const double lost = std::norm(std::sqrt(static_cast<double>(n_max + 1)) * v[n_max]);
        if (lost > policy.tail_tol) {
            throw CapExceeded("apply_create: mass " + format_value(lost) +
                              " pushed past hard cap " + std::to_string(policy.hard_cap));
        }
        tail += lost;
    }
    return FockVector(std::move(a), tail);
}

/// c_n -> c_n e^{i n phi}; free evolution under omega N for time -phi/omega.
inline FockVector rotate_phase(const FockVector& v, double phi) {
    std::vector<complex> a(v.amplitudes().begin(), v.amplitudes().end());
    for (std::size_t n = 0; n < a.size(); ++n) a[n] *= std::polar(1.0, static_cast<double>(n) * phi);
    return FockVector(std::move(a), v.tail_bound());
}

/// <u|v> with the shorter vector zero-padded.
inline complex inner(const FockVector& u, const FockVector& v) {
    const std::size_t len = std::min(u.size(), v.size());
    CompensatedSum<complex> s;
    for (std::size_t n = 0; n < len; ++n) s += std::conj(u[n]) * v[n];
    return s.value();
}

/// |<u|v>|; both arguments are assumed normalized.
inline double fidelity(const FockVector& u, const FockVector& v) { return std::abs(inner(u, v)); }

/// Euclidean norm of u - v with zero padding.
inline double distance(const FockVector& u, const FockVector& v) {
    const std::size_t len = std::max(u.size(), v.size());
    CompensatedSum<double> s;
    for (std::size_t n = 0; n < len; ++n) s += std::norm(u.amplitude(n) - v.amplitude(n));
    return std::sqrt(s.value());
}

struct Moments {
    double mean_n = 0.0;       // <N> = <b^dagger b>
    double mean_n2 = 0.0;      // <N^2>
    complex mean_b{};          // <b>
    complex mean_b2{};         // <b^2>
    double mean_bdag2_b2 = 0.0;  // <b^dagger^2 b^2> = <N(N-1)>
    double norm_squared = 0.0;
};

/// Raw moments by direct amplitude summation. Throws NotNormalized when
/// |sum |c_n|^2 - 1| > slack.
inline Moments expectations(const FockVector& v, double slack = 1e-9) {
    const auto c = v.amplitudes();
    CompensatedSum<double> norm, n1, n2, fact2;
    CompensatedSum<complex> b1, b2;
    for (std::size_t n = 0; n < c.size(); ++n) {
        const double p = std::norm(c[n]);
        const double dn = static_cast<double>(n);
        norm += p;
        n1 += dn * p;
        n2 += dn * dn * p;
        fact2 += dn * (dn - 1.0) * p;
        if (n + 1 < c.size()) b1 += std::conj(c[n]) * c[n + 1] * std::sqrt(dn + 1.0);
        if (n + 2 < c.size()) {
            b2 += std::conj(c[n]) * c[n + 2] * std::sqrt((dn + 1.0) * (dn + 2.0));
        }
    }
    Moments m;
    m.norm_squared = norm.value();
    if (std::abs(m.norm_squared - 1.0) > slack) {
        throw NotNormalized("state norm^2 = " + format_value(m.norm_squared) +
                            " deviates from 1 by more than " + format_value(slack));
    }
    m.mean_n = n1.value();
    m.mean_n2 = n2.value();
    m.mean_b = b1.value();
    m.mean_b2 = b2.value();
    m.mean_bdag2_b2 = fact2.value();
    return m;
}

}  // namespace nbs
