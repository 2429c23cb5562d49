#include "rigidnf/coefficient.hpp"

#include "rigidnf/errors.hpp"

#include <cmath>
#include <cstdio>

namespace rigidnf {

const char* mode_name(Mode m) { return m == Mode::Exact ? "exact" : "float"; }

const char* error_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::NotRigid: return "not-rigid";
    case ErrorKind::NotContracting: return "not-contracting";
    case ErrorKind::NonInjective: return "non-injective";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Unresolved: return "unresolved-class";
    }
    return "unknown";
}

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Parse: return 2;
    case ErrorKind::NotRigid: return 3;
    case ErrorKind::NotContracting: return 4;
    case ErrorKind::NonInjective: return 5;
    case ErrorKind::Solver: return 6;
    case ErrorKind::Unresolved: return 7;
    case ErrorKind::Domain: return 2;
    }
    return 1;
}

Coeff Coeff::zero(Mode m) { return integer(0, m); }
Coeff Coeff::one(Mode m) { return integer(1, m); }

Coeff Coeff::integer(long v, Mode m) {
    if (m == Mode::Exact) return Coeff(GaussRat{mpq_class(v), mpq_class(0)});
    return Coeff(static_cast<double>(v));
}

Coeff Coeff::rational(const mpq_class& q, Mode m) {
    if (m == Mode::Exact) return Coeff(GaussRat{q, mpq_class(0)});
    return Coeff(q.get_d());
}

Coeff Coeff::complex(const mpq_class& re, const mpq_class& im, Mode m) {
    if (m == Mode::Exact) return Coeff(GaussRat{re, im});
    return Coeff(std::complex<double>(re.get_d(), im.get_d()));
}

std::complex<double> Coeff::to_complex() const {
    if (!exact()) return cplx();
    const auto& g = gauss();
    return {g.re.get_d(), g.im.get_d()};
}

Coeff Coeff::in_mode(Mode m) const {
    if (m == mode()) return *this;
    if (m == Mode::Float) return Coeff(to_complex());
    auto z = cplx();
    // Float to exact conversion is exact on the binary value.
    return Coeff(GaussRat{mpq_class(z.real()), mpq_class(z.imag())});
}

Coeff Coeff::operator+(const Coeff& o) const {
    if (exact() && o.exact()) {
        const auto &a = gauss(), &b = o.gauss();
        return Coeff(GaussRat{a.re + b.re, a.im + b.im});
    }
    return Coeff(to_complex() + o.to_complex());
}

Coeff Coeff::operator-(const Coeff& o) const {
    if (exact() && o.exact()) {
        const auto &a = gauss(), &b = o.gauss();
        return Coeff(GaussRat{a.re - b.re, a.im - b.im});
    }
    return Coeff(to_complex() - o.to_complex());
}

Coeff Coeff::operator*(const Coeff& o) const {
    if (exact() && o.exact()) {
        const auto &a = gauss(), &b = o.gauss();
        if (sgn(a.im) == 0 && sgn(b.im) == 0) return Coeff(GaussRat{a.re * b.re, mpq_class(0)});
        return Coeff(GaussRat{a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re});
    }
    return Coeff(to_complex() * o.to_complex());
}

Coeff Coeff::operator/(const Coeff& o) const {
    if (exact() && o.exact()) {
        const auto &a = gauss(), &b = o.gauss();
        mpq_class n = b.re * b.re + b.im * b.im;
        if (sgn(n) == 0) fail(ErrorKind::Domain, "division by exact zero");
        if (sgn(a.im) == 0 && sgn(b.im) == 0) return Coeff(GaussRat{a.re / b.re, mpq_class(0)});
        return Coeff(GaussRat{(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n});
    }
    auto d = o.to_complex();
    if (d == std::complex<double>(0.0, 0.0)) fail(ErrorKind::Domain, "division by zero");
    return Coeff(to_complex() / d);
}

Coeff Coeff::operator-() const {
    if (exact()) return Coeff(GaussRat{-gauss().re, -gauss().im});
    return Coeff(-cplx());
}

Coeff Coeff::conj() const {
    if (exact()) return Coeff(GaussRat{gauss().re, -gauss().im});
    return Coeff(std::conj(cplx()));
}

Coeff Coeff::pow(long e) const {
    if (e < 0) return (Coeff::one(mode()) / *this).pow(-e);
    Coeff r = Coeff::one(mode()), b = *this;
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

bool Coeff::is_zero(double tol) const {
    if (exact()) return sgn(gauss().re) == 0 && sgn(gauss().im) == 0;
    return std::abs(cplx()) <= tol;
}

bool Coeff::is_real(double tol) const {
    if (exact()) return sgn(gauss().im) == 0;
    return std::abs(cplx().imag()) <= tol;
}

namespace {

std::string fmt_double(double x) {
    if (x == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s(buf);
    // Keep a decimal marker so the parser reads the literal as a float value.
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

std::string join_parts(const std::string& re, const std::string& im, bool re_zero, bool im_zero) {
    if (im_zero) return re;
    std::string imag = im == "1" ? "I" : (im == "-1" ? "-I" : im + "*I");
    if (re_zero) return imag;
    if (imag[0] == '-') return re + imag;
    return re + "+" + imag;
}

}  // namespace

std::string Coeff::str() const {
    if (exact()) {
        const auto& g = gauss();
        return join_parts(g.re.get_str(), g.im.get_str(), sgn(g.re) == 0, sgn(g.im) == 0);
    }
    auto z = cplx();
    return join_parts(fmt_double(z.real()), fmt_double(z.imag()), z.real() == 0.0, z.imag() == 0.0);
}

mpq_class rationalize(double x, long max_den) {
    if (!std::isfinite(x)) fail(ErrorKind::Domain, "cannot rationalize a non-finite value");
    bool neg = x < 0;
    double a = std::fabs(x);
    // Continued-fraction convergents h/k.
    mpz_class h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = a;
    for (int it = 0; it < 64; ++it) {
        double fl = std::floor(r);
        mpz_class q(fl);
        mpz_class h2 = q * h1 + h0, k2 = q * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1; h1 = h2; k0 = k1; k1 = k2;
        double frac = r - fl;
        if (frac < 1e-15) break;
        r = 1.0 / frac;
        if (std::fabs(h1.get_d() / k1.get_d() - a) <= 1e-15 * std::max(1.0, a)) break;
    }
    mpq_class out(h1, k1);
    out.canonicalize();
    return neg ? mpq_class(-out) : out;
}

}  // namespace rigidnf
