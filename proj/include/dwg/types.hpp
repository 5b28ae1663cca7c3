#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dwg {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr Complex kI{0.0, 1.0};

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent graph input.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Edge lengths that are not integer multiples of a common unit.
class IncommensurateError : public Error {
public:
    using Error::Error;
};

/// Numerical failure inside a solver (overflow, nonconvergence, ...).
class SolverError : public Error {
public:
    using Error::Error;
};

/// The vertex scattering system is singular at the requested spectral parameter.
class ResonanceError : public SolverError {
public:
    ResonanceError(const std::string& what, Complex lambda)
        : SolverError(what), lambda_(lambda) {}
    Complex lambda() const { return lambda_; }

private:
    Complex lambda_;
};

/// A complex number stored as mantissa * exp(log_scale).
///
/// Determinants of the secular matrices grow like exp(|Re| * total length)
/// times powers of |lambda|; keeping the exponent separate avoids overflow
/// while preserving the phase exactly.
struct ScaledComplex {
    Complex mantissa{0.0, 0.0};
    double log_scale = 0.0;

    ScaledComplex() = default;
    ScaledComplex(Complex m, double s = 0.0) : mantissa(m), log_scale(s) { normalize(); }

    void normalize() {
        const double a = std::abs(mantissa);
        if (a == 0.0 || !std::isfinite(a)) return;
        const double e = std::log(a);
        mantissa /= a;
        log_scale += e;
    }

    bool is_zero() const { return mantissa == Complex{0.0, 0.0}; }
    double log_abs() const {
        return is_zero() ? -std::numeric_limits<double>::infinity()
                         : std::log(std::abs(mantissa)) + log_scale;
    }
    double arg() const { return std::arg(mantissa); }

    /// Value as a plain complex number (may overflow to inf).
    Complex value() const { return mantissa * std::exp(log_scale); }

    ScaledComplex operator*(const ScaledComplex& o) const {
        return {mantissa * o.mantissa, log_scale + o.log_scale};
    }
    ScaledComplex operator*(Complex c) const { return {mantissa * c, log_scale}; }

    /// this / o as a plain complex number.
    Complex ratio(const ScaledComplex& o) const {
        return (mantissa / o.mantissa) * std::exp(log_scale - o.log_scale);
    }

    ScaledComplex operator-(const ScaledComplex& o) const {
        if (is_zero()) return {-o.mantissa, o.log_scale};
        if (o.is_zero()) return *this;
        const double s = std::max(log_scale, o.log_scale);
        return {mantissa * std::exp(log_scale - s) - o.mantissa * std::exp(o.log_scale - s), s};
    }
    ScaledComplex operator+(const ScaledComplex& o) const {
        return *this - ScaledComplex{-o.mantissa, o.log_scale};
    }
};

}  // namespace dwg
