#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace bistable {

// Complex value stored as mantissa * exp(log_scale), with |mantissa| kept
// near 1. Exponential growth factors accumulated along long integrations go
// into log_scale so products and ratios never overflow; phases stay in the
// mantissa, so the represented value is exact (not just a magnitude).
struct LogComplex {
    std::complex<double> mantissa{0.0, 0.0};
    double log_scale = -std::numeric_limits<double>::infinity();

    LogComplex() = default;
    LogComplex(std::complex<double> m, double lg) : mantissa(m), log_scale(lg) { normalize(); }
    explicit LogComplex(std::complex<double> v) : mantissa(v), log_scale(0.0) { normalize(); }

    void normalize() {
        double a = std::abs(mantissa);
        if (a == 0.0 || !std::isfinite(a)) {
            mantissa = {0.0, 0.0};
            log_scale = -std::numeric_limits<double>::infinity();
            return;
        }
        mantissa /= a;
        log_scale += std::log(a);
    }

    bool is_zero() const { return mantissa == std::complex<double>(0.0, 0.0); }

    // Value as a plain complex; may under/overflow for extreme scales.
    std::complex<double> value() const {
        if (is_zero()) return {0.0, 0.0};
        return mantissa * std::exp(log_scale);
    }

    double abs_log() const { return log_scale; }
    double arg() const { return std::arg(mantissa); }

    friend LogComplex operator*(const LogComplex& a, const LogComplex& b) {
        if (a.is_zero() || b.is_zero()) return LogComplex{};
        return LogComplex(a.mantissa * b.mantissa, a.log_scale + b.log_scale);
    }
    friend LogComplex operator/(const LogComplex& a, const LogComplex& b) {
        return LogComplex(a.mantissa / b.mantissa, a.log_scale - b.log_scale);
    }
    LogComplex& operator*=(std::complex<double> c) {
        mantissa *= c;
        normalize();
        return *this;
    }

    // exp(z) for complex z: magnitude to log_scale, phase to mantissa.
    static LogComplex exponential(std::complex<double> z) {
        return LogComplex(std::complex<double>(std::cos(z.imag()), std::sin(z.imag())), z.real());
    }

    // a - b evaluated at a common scale; meaningful when scales are close.
    friend LogComplex operator-(const LogComplex& a, const LogComplex& b) {
        if (a.is_zero()) return LogComplex(-b.mantissa, b.log_scale);
        if (b.is_zero()) return a;
        double ref = std::max(a.log_scale, b.log_scale);
        std::complex<double> v =
            a.mantissa * std::exp(a.log_scale - ref) - b.mantissa * std::exp(b.log_scale - ref);
        return LogComplex(v, ref);
    }
};

}  // namespace bistable
