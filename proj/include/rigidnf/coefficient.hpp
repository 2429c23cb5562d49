#pragma once

#include <complex>
#include <gmpxx.h>
#include <string>
#include <variant>

namespace rigidnf {

enum class Mode { Float, Exact };

const char* mode_name(Mode m);

/// Gaussian rational re + im*I.
struct GaussRat {
    mpq_class re, im;
};

/// A scalar of the active arithmetic. Exact values never silently become
/// floats except when combined with a float operand.
class Coeff {
public:
    Coeff() : v_(std::complex<double>(0.0, 0.0)) {}
    Coeff(std::complex<double> z) : v_(z) {}
    Coeff(double x) : v_(std::complex<double>(x, 0.0)) {}
    Coeff(GaussRat g) : v_(std::move(g)) {}

    static Coeff zero(Mode m);
    static Coeff one(Mode m);
    static Coeff integer(long v, Mode m);
    static Coeff rational(const mpq_class& q, Mode m);
    static Coeff complex(const mpq_class& re, const mpq_class& im, Mode m);

    bool exact() const { return v_.index() == 1; }
    Mode mode() const { return exact() ? Mode::Exact : Mode::Float; }
    std::complex<double> to_complex() const;
    const GaussRat& gauss() const { return std::get<GaussRat>(v_); }
    const std::complex<double>& cplx() const { return std::get<std::complex<double>>(v_); }
    Coeff in_mode(Mode m) const;

    Coeff operator+(const Coeff& o) const;
    Coeff operator-(const Coeff& o) const;
    Coeff operator*(const Coeff& o) const;
    Coeff operator/(const Coeff& o) const;
    Coeff operator-() const;
    Coeff& operator+=(const Coeff& o) { return *this = *this + o; }
    Coeff& operator-=(const Coeff& o) { return *this = *this - o; }
    Coeff& operator*=(const Coeff& o) { return *this = *this * o; }

    Coeff conj() const;
    Coeff pow(long e) const;

    /// Exact: literal zero. Float: |z| <= tol.
    bool is_zero(double tol) const;
    bool is_one(double tol) const { return (*this - Coeff::one(mode())).is_zero(tol); }
    bool is_real(double tol) const;
    bool equals(const Coeff& o, double tol) const { return (*this - o).is_zero(tol); }
    double abs() const { return std::abs(to_complex()); }

    /// Canonical text: exact "p/q", "a+b*I"; float with 17 significant digits.
    std::string str() const;

private:
    std::variant<std::complex<double>, GaussRat> v_;
};

/// Best rational approximation with bounded denominator (continued fractions).
mpq_class rationalize(double x, long max_den);

}  // namespace rigidnf
