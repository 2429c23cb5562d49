#pragma once

#include "rigidnf/coefficient.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace rigidnf {

/// Rational matrix. Used for exponent blocks (B, C, D, E, P), their products
/// and the rational powers D^{-n}.
class QMatrix {
public:
    QMatrix() = default;
    QMatrix(int rows, int cols) : r_(rows), c_(cols), a_(static_cast<size_t>(rows) * cols) {}
    static QMatrix identity(int n);
    static QMatrix from_ints(const std::vector<std::vector<long>>& rows);

    int rows() const { return r_; }
    int cols() const { return c_; }
    mpq_class& operator()(int i, int j) { return a_[static_cast<size_t>(i) * c_ + j]; }
    const mpq_class& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * c_ + j]; }
    long int_at(int i, int j) const;

    QMatrix operator*(const QMatrix& o) const;
    bool operator==(const QMatrix& o) const;
    QMatrix transpose() const;
    QMatrix block(int r0, int c0, int nr, int nc) const;
    /// Result(i,j) = this(rp[i], cp[j]).
    QMatrix permuted(const std::vector<int>& rp, const std::vector<int>& cp) const;
    QMatrix pow(long n) const;
    mpq_class det() const;
    std::optional<QMatrix> inverse() const;

    bool is_integer() const;
    bool is_nonneg_integer() const;
    bool is_permutation() const;
    bool is_zero() const;
    std::vector<std::vector<std::string>> str_rows() const;

private:
    int r_ = 0, c_ = 0;
    std::vector<mpq_class> a_;
};

using ExponentMatrix = QMatrix;

/// Dense matrix over the active coefficient field.
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(int rows, int cols, Mode m) : r_(rows), c_(cols), a_(static_cast<size_t>(rows) * cols, Coeff::zero(m)) {}
    static CMatrix identity(int n, Mode m);
    static CMatrix from_q(const QMatrix& q, Mode m);

    int rows() const { return r_; }
    int cols() const { return c_; }
    Coeff& operator()(int i, int j) { return a_[static_cast<size_t>(i) * c_ + j]; }
    const Coeff& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * c_ + j]; }

    CMatrix operator*(const CMatrix& o) const;
    CMatrix operator+(const CMatrix& o) const;
    CMatrix operator-(const CMatrix& o) const;
    CMatrix scaled(const Coeff& s) const;
    CMatrix pow(long n) const;
    CMatrix block(int r0, int c0, int nr, int nc) const;
    double max_abs() const;

private:
    int r_ = 0, c_ = 0;
    std::vector<Coeff> a_;
};

/// Elimination-based routines. In float mode a pivot counts as zero when its
/// modulus is at most tol times the largest entry (or tol when that is < 1).
Coeff det(const CMatrix& a, double tol);
int rank(const CMatrix& a, double tol);
/// Basis of the right kernel; each vector has a 1 at its free column.
std::vector<std::vector<Coeff>> nullspace(const CMatrix& a, double tol);
/// Solves a square system; nullopt when singular.
std::optional<std::vector<Coeff>> solve(const CMatrix& a, const std::vector<Coeff>& b, double tol);
std::optional<CMatrix> inverse(const CMatrix& a, double tol);
/// One solution of a consistent system, free variables set to 0.
std::vector<Coeff> solve_particular(const CMatrix& a, const std::vector<Coeff>& b, double tol);
/// Component of b orthogonal to the column space of a (Hermitian inner product).
std::vector<Coeff> project_off_range(const CMatrix& a, const std::vector<Coeff>& b, double tol);
/// Numerical eigenvalues (Eigen complex Schur), any mode.
std::vector<std::complex<double>> eigenvalues(const CMatrix& a);
double spectral_radius(const CMatrix& a);

}  // namespace rigidnf
