#pragma once

#include <cmath>
#include <complex>

namespace nbs {

// Neumaier compensated accumulator. Works for real floating types and
// std::complex of them (each component is compensated independently).
template <typename T>
class CompensatedSum {
public:
    CompensatedSum& operator+=(T x) noexcept {
        add(x);
        return *this;
    }

    void add(T x) noexcept {
        T t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    [[nodiscard]] T value() const noexcept { return sum_ + comp_; }

private:
    T sum_{};
    T comp_{};
};

template <typename T>
class CompensatedSum<std::complex<T>> {
public:
    CompensatedSum& operator+=(std::complex<T> x) noexcept {
        add(x);
        return *this;
    }

    void add(std::complex<T> x) noexcept {
        re_.add(x.real());
        im_.add(x.imag());
    }

    [[nodiscard]] std::complex<T> value() const noexcept { return {re_.value(), im_.value()}; }

private:
    CompensatedSum<T> re_;
    CompensatedSum<T> im_;
};

}  // namespace nbs
