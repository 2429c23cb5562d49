#include "rigidnf/linalg.hpp"

#include "rigidnf/errors.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace rigidnf {

QMatrix QMatrix::identity(int n) {
    QMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

QMatrix QMatrix::from_ints(const std::vector<std::vector<long>>& rows) {
    int r = static_cast<int>(rows.size());
    int c = r ? static_cast<int>(rows[0].size()) : 0;
    QMatrix m(r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(rows[i].size()) != c) fail(ErrorKind::Domain, "ragged matrix");
        for (int j = 0; j < c; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

long QMatrix::int_at(int i, int j) const {
    const mpq_class& q = (*this)(i, j);
    if (q.get_den() != 1) fail(ErrorKind::Domain, "non-integer matrix entry");
    return q.get_num().get_si();
}

QMatrix QMatrix::operator*(const QMatrix& o) const {
    if (c_ != o.r_) fail(ErrorKind::Domain, "matrix shape mismatch");
    QMatrix m(r_, o.c_);
    for (int i = 0; i < r_; ++i)
        for (int k = 0; k < c_; ++k) {
            const mpq_class& a = (*this)(i, k);
            if (sgn(a) == 0) continue;
            for (int j = 0; j < o.c_; ++j) m(i, j) += a * o(k, j);
        }
    return m;
}

bool QMatrix::operator==(const QMatrix& o) const { return r_ == o.r_ && c_ == o.c_ && a_ == o.a_; }

QMatrix QMatrix::transpose() const {
    QMatrix m(c_, r_);
    for (int i = 0; i < r_; ++i)
        for (int j = 0; j < c_; ++j) m(j, i) = (*this)(i, j);
    return m;
}

QMatrix QMatrix::block(int r0, int c0, int nr, int nc) const {
    QMatrix m(nr, nc);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) m(i, j) = (*this)(r0 + i, c0 + j);
    return m;
}

QMatrix QMatrix::permuted(const std::vector<int>& rp, const std::vector<int>& cp) const {
    QMatrix m(static_cast<int>(rp.size()), static_cast<int>(cp.size()));
    for (size_t i = 0; i < rp.size(); ++i)
        for (size_t j = 0; j < cp.size(); ++j) m(i, j) = (*this)(rp[i], cp[j]);
    return m;
}

QMatrix QMatrix::pow(long n) const {
    if (r_ != c_) fail(ErrorKind::Domain, "power of a non-square matrix");
    if (n < 0) {
        auto inv = inverse();
        if (!inv) fail(ErrorKind::Domain, "negative power of a singular matrix");
        return inv->pow(-n);
    }
    QMatrix result = identity(r_), base = *this;
    while (n) {
        if (n & 1) result = result * base;
        n >>= 1;
        if (n) base = base * base;
    }
    return result;
}

mpq_class QMatrix::det() const {
    if (r_ != c_) fail(ErrorKind::Domain, "determinant of a non-square matrix");
    QMatrix m = *this;
    mpq_class d = 1;
    for (int col = 0; col < r_; ++col) {
        int piv = -1;
        for (int i = col; i < r_; ++i)
            if (sgn(m(i, col)) != 0) { piv = i; break; }
        if (piv < 0) return 0;
        if (piv != col) {
            for (int j = 0; j < c_; ++j) std::swap(m(piv, j), m(col, j));
            d = -d;
        }
        d *= m(col, col);
        for (int i = col + 1; i < r_; ++i) {
            if (sgn(m(i, col)) == 0) continue;
            mpq_class f = m(i, col) / m(col, col);
            for (int j = col; j < c_; ++j) m(i, j) -= f * m(col, j);
        }
    }
    return d;
}

std::optional<QMatrix> QMatrix::inverse() const {
    if (r_ != c_) return std::nullopt;
    int n = r_;
    QMatrix m = *this, inv = identity(n);
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int i = col; i < n; ++i)
            if (sgn(m(i, col)) != 0) { piv = i; break; }
        if (piv < 0) return std::nullopt;
        for (int j = 0; j < n; ++j) {
            std::swap(m(piv, j), m(col, j));
            std::swap(inv(piv, j), inv(col, j));
        }
        mpq_class p = m(col, col);
        for (int j = 0; j < n; ++j) { m(col, j) /= p; inv(col, j) /= p; }
        for (int i = 0; i < n; ++i) {
            if (i == col || sgn(m(i, col)) == 0) continue;
            mpq_class f = m(i, col);
            for (int j = 0; j < n; ++j) { m(i, j) -= f * m(col, j); inv(i, j) -= f * inv(col, j); }
        }
    }
    return inv;
}

bool QMatrix::is_integer() const {
    return std::all_of(a_.begin(), a_.end(), [](const mpq_class& q) { return q.get_den() == 1; });
}

bool QMatrix::is_nonneg_integer() const {
    return std::all_of(a_.begin(), a_.end(), [](const mpq_class& q) { return q.get_den() == 1 && sgn(q) >= 0; });
}

bool QMatrix::is_permutation() const {
    if (r_ != c_ || !is_nonneg_integer()) return false;
    for (int i = 0; i < r_; ++i) {
        int row = 0, col = 0;
        for (int j = 0; j < c_; ++j) {
            if ((*this)(i, j) > 1 || (*this)(j, i) > 1) return false;
            row += (*this)(i, j) == 1;
            col += (*this)(j, i) == 1;
        }
        if (row != 1 || col != 1) return false;
    }
    return true;
}

bool QMatrix::is_zero() const {
    return std::all_of(a_.begin(), a_.end(), [](const mpq_class& q) { return sgn(q) == 0; });
}

std::vector<std::vector<std::string>> QMatrix::str_rows() const {
    std::vector<std::vector<std::string>> out(r_);
    for (int i = 0; i < r_; ++i)
        for (int j = 0; j < c_; ++j) out[i].push_back((*this)(i, j).get_str());
    return out;
}

CMatrix CMatrix::identity(int n, Mode m) {
    CMatrix a(n, n, m);
    for (int i = 0; i < n; ++i) a(i, i) = Coeff::one(m);
    return a;
}

CMatrix CMatrix::from_q(const QMatrix& q, Mode m) {
    CMatrix a(q.rows(), q.cols(), m);
    for (int i = 0; i < q.rows(); ++i)
        for (int j = 0; j < q.cols(); ++j) a(i, j) = Coeff::rational(q(i, j), m);
    return a;
}

CMatrix CMatrix::operator*(const CMatrix& o) const {
    if (c_ != o.r_) fail(ErrorKind::Domain, "matrix shape mismatch");
    Mode m = !a_.empty() ? a_[0].mode() : Mode::Float;
    CMatrix out(r_, o.c_, m);
    for (int i = 0; i < r_; ++i)
        for (int k = 0; k < c_; ++k) {
            const Coeff& a = (*this)(i, k);
            if (a.is_zero(0.0)) continue;
            for (int j = 0; j < o.c_; ++j) out(i, j) += a * o(k, j);
        }
    return out;
}

CMatrix CMatrix::operator+(const CMatrix& o) const {
    CMatrix out = *this;
    for (size_t i = 0; i < a_.size(); ++i) out.a_[i] += o.a_[i];
    return out;
}

CMatrix CMatrix::operator-(const CMatrix& o) const {
    CMatrix out = *this;
    for (size_t i = 0; i < a_.size(); ++i) out.a_[i] -= o.a_[i];
    return out;
}

CMatrix CMatrix::scaled(const Coeff& s) const {
    CMatrix out = *this;
    for (auto& x : out.a_) x *= s;
    return out;
}

CMatrix CMatrix::pow(long n) const {
    Mode m = a_.empty() ? Mode::Float : a_[0].mode();
    if (n < 0) fail(ErrorKind::Domain, "negative power of a coefficient matrix");
    CMatrix result = identity(r_, m), base = *this;
    while (n) {
        if (n & 1) result = result * base;
        n >>= 1;
        if (n) base = base * base;
    }
    return result;
}

CMatrix CMatrix::block(int r0, int c0, int nr, int nc) const {
    Mode m = a_.empty() ? Mode::Float : a_[0].mode();
    CMatrix out(nr, nc, m);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
    return out;
}

double CMatrix::max_abs() const {
    double m = 0;
    for (const auto& x : a_) m = std::max(m, x.abs());
    return m;
}

namespace {

struct Echelon {
    CMatrix m;
    std::vector<int> pivots;  // pivot column per row
    Coeff det;
};

// Reduced row echelon form with deterministic pivoting.
Echelon rref(CMatrix m, double tol, bool full) {
    int R = m.rows(), C = m.cols();
    Mode mode = (R > 0 && C > 0) ? m(0, 0).mode() : Mode::Float;
    double thresh = tol * std::max(1.0, m.max_abs());
    Echelon e{m, {}, Coeff::one(mode)};
    CMatrix& a = e.m;
    int row = 0;
    for (int col = 0; col < C && row < R; ++col) {
        int piv = -1;
        if (mode == Mode::Exact) {
            for (int i = row; i < R; ++i)
                if (!a(i, col).is_zero(0)) { piv = i; break; }
        } else {
            double best = thresh;
            for (int i = row; i < R; ++i) {
                double v = a(i, col).abs();
                if (v > best) { best = v; piv = i; }
            }
        }
        if (piv < 0) {
            e.det = Coeff::zero(mode);
            continue;
        }
        if (piv != row) {
            for (int j = 0; j < C; ++j) std::swap(a(piv, j), a(row, j));
            e.det = -e.det;
        }
        Coeff p = a(row, col);
        e.det *= p;
        for (int j = col; j < C; ++j) a(row, j) = a(row, j) / p;
        for (int i = full ? 0 : row + 1; i < R; ++i) {
            if (i == row || a(i, col).is_zero(0)) continue;
            Coeff f = a(i, col);
            for (int j = col; j < C; ++j) a(i, j) -= f * a(row, j);
            a(i, col) = Coeff::zero(mode);
        }
        e.pivots.push_back(col);
        ++row;
    }
    if (row < R) e.det = Coeff::zero(mode);
    return e;
}

}  // namespace

Coeff det(const CMatrix& a, double tol) {
    if (a.rows() != a.cols()) fail(ErrorKind::Domain, "determinant of a non-square matrix");
    if (a.rows() == 0) return Coeff::one(Mode::Exact);
    Mode mode = a(0, 0).mode();
    if (mode == Mode::Float) {
        // Plain partial-pivoting determinant, no rank truncation.
        CMatrix m = a;
        int n = a.rows();
        Coeff d = Coeff::one(mode);
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int i = col + 1; i < n; ++i)
                if (m(i, col).abs() > m(piv, col).abs()) piv = i;
            if (m(piv, col).abs() == 0.0) return Coeff::zero(mode);
            if (piv != col) {
                for (int j = 0; j < n; ++j) std::swap(m(piv, j), m(col, j));
                d = -d;
            }
            d *= m(col, col);
            for (int i = col + 1; i < n; ++i) {
                Coeff f = m(i, col) / m(col, col);
                for (int j = col; j < n; ++j) m(i, j) -= f * m(col, j);
            }
        }
        return d;
    }
    return rref(a, tol, false).det;
}

int rank(const CMatrix& a, double tol) { return static_cast<int>(rref(a, tol, false).pivots.size()); }

std::vector<std::vector<Coeff>> nullspace(const CMatrix& a, double tol) {
    auto e = rref(a, tol, true);
    int C = a.cols();
    Mode mode = (a.rows() > 0 && C > 0) ? a(0, 0).mode() : Mode::Float;
    std::vector<char> is_pivot(C, 0);
    for (int p : e.pivots) is_pivot[p] = 1;
    std::vector<std::vector<Coeff>> basis;
    for (int f = 0; f < C; ++f) {
        if (is_pivot[f]) continue;
        std::vector<Coeff> v(C, Coeff::zero(mode));
        v[f] = Coeff::one(mode);
        for (size_t r = 0; r < e.pivots.size(); ++r) v[e.pivots[r]] = -e.m(static_cast<int>(r), f);
        basis.push_back(std::move(v));
    }
    return basis;
}

std::vector<Coeff> project_off_range(const CMatrix& a, const std::vector<Coeff>& b, double tol) {
    const int n = a.rows();
    if (static_cast<int>(b.size()) != n) fail(ErrorKind::Domain, "project_off_range: shape mismatch");
    if (n == 0) return {};
    const Mode mode = b[0].mode();
    CMatrix ah(a.cols(), n, mode);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < a.cols(); ++j) ah(j, i) = a(i, j).conj();
    // range(a)^perp = ker(a^H); project b onto that kernel through its Gram matrix.
    auto K = nullspace(ah, tol);
    const int m = static_cast<int>(K.size());
    std::vector<Coeff> out(n, Coeff::zero(mode));
    if (m == 0) return out;
    CMatrix G(m, m, mode);
    std::vector<Coeff> kb(m, Coeff::zero(mode));
    for (int p = 0; p < m; ++p) {
        for (int q = 0; q < m; ++q)
            for (int i = 0; i < n; ++i) G(p, q) += K[p][i].conj() * K[q][i];
        for (int i = 0; i < n; ++i) kb[p] += K[p][i].conj() * b[i];
    }
    auto c = solve(G, kb, tol);
    if (!c) fail(ErrorKind::Solver, "project_off_range: kernel basis is degenerate");
    for (int p = 0; p < m; ++p)
        for (int i = 0; i < n; ++i) out[i] += (*c)[p] * K[p][i];
    return out;
}

std::vector<Coeff> solve_particular(const CMatrix& a, const std::vector<Coeff>& b, double tol) {
    const int R = a.rows(), C = a.cols();
    if (static_cast<int>(b.size()) != R) fail(ErrorKind::Domain, "solve_particular: shape mismatch");
    const Mode mode = R ? b[0].mode() : Mode::Float;
    CMatrix aug(R, C + 1, mode);
    for (int i = 0; i < R; ++i) {
        for (int j = 0; j < C; ++j) aug(i, j) = a(i, j);
        aug(i, C) = b[i];
    }
    auto e = rref(aug, tol, true);
    std::vector<Coeff> x(C, Coeff::zero(mode));
    for (size_t r = 0; r < e.pivots.size(); ++r) {
        if (e.pivots[r] == C) fail(ErrorKind::Solver, "solve_particular: inconsistent system");
        x[e.pivots[r]] = e.m(static_cast<int>(r), C);
    }
    return x;
}

std::optional<std::vector<Coeff>> solve(const CMatrix& a, const std::vector<Coeff>& b, double tol) {
    int n = a.rows();
    if (n != a.cols() || static_cast<int>(b.size()) != n) fail(ErrorKind::Domain, "solve: shape mismatch");
    if (n == 0) return std::vector<Coeff>{};
    Mode mode = a(0, 0).mode();
    CMatrix aug(n, n + 1, mode);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) aug(i, j) = a(i, j);
        aug(i, n) = b[i];
    }
    // Pivot only over the coefficient columns.
    double thresh = tol * std::max(1.0, a.max_abs());
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        if (mode == Mode::Exact) {
            for (int i = col; i < n; ++i)
                if (!aug(i, col).is_zero(0)) { piv = i; break; }
        } else {
            double best = thresh;
            for (int i = col; i < n; ++i)
                if (aug(i, col).abs() > best) { best = aug(i, col).abs(); piv = i; }
        }
        if (piv < 0) return std::nullopt;
        if (piv != col)
            for (int j = 0; j <= n; ++j) std::swap(aug(piv, j), aug(col, j));
        Coeff p = aug(col, col);
        for (int j = col; j <= n; ++j) aug(col, j) = aug(col, j) / p;
        for (int i = 0; i < n; ++i) {
            if (i == col || aug(i, col).is_zero(0)) continue;
            Coeff f = aug(i, col);
            for (int j = col; j <= n; ++j) aug(i, j) -= f * aug(col, j);
        }
    }
    std::vector<Coeff> x(n);
    for (int i = 0; i < n; ++i) x[i] = aug(i, n);
    return x;
}

std::optional<CMatrix> inverse(const CMatrix& a, double tol) {
    int n = a.rows();
    if (n != a.cols()) return std::nullopt;
    Mode mode = n ? a(0, 0).mode() : Mode::Float;
    CMatrix inv(n, n, mode);
    for (int j = 0; j < n; ++j) {
        std::vector<Coeff> e(n, Coeff::zero(mode));
        e[j] = Coeff::one(mode);
        auto x = solve(a, e, tol);
        if (!x) return std::nullopt;
        for (int i = 0; i < n; ++i) inv(i, j) = (*x)[i];
    }
    return inv;
}

std::vector<std::complex<double>> eigenvalues(const CMatrix& a) {
    int n = a.rows();
    if (n == 0) return {};
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = a(i, j).to_complex();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    std::vector<std::complex<double>> out(n);
    for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()(i);
    return out;
}

double spectral_radius(const CMatrix& a) {
    double r = 0;
    for (auto z : eigenvalues(a)) r = std::max(r, std::abs(z));
    return r;
}

}  // namespace rigidnf
