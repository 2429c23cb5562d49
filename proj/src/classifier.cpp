#include "rigidnf/classifier.hpp"

#include "rigidnf/errors.hpp"
#include "rigidnf/germlang.hpp"
#include "rigidnf/resonance.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

namespace rigidnf {

const Coeff* ClassRow::coefficient(const std::string& name) const {
    for (const auto& [n, c] : coefficients)
        if (n == name) return &c;
    return nullptr;
}

long ClassRow::exponent(const std::string& name, long fallback) const {
    for (const auto& [n, v] : exponents)
        if (n == name) return v;
    return fallback;
}

int ClassRow::flag(const std::string& name, int fallback) const {
    for (const auto& [n, v] : flags)
        if (n == name) return v;
    return fallback;
}

namespace {

struct RowSpec {
    int q, r, s, eta;  // eta 0: any
    const char* crit;
    const char* id;
    const char* form;
    bool unresolved;
};

const RowSpec kRows[] = {
    {0, 0, 3, 0, "{}", "q0-r0-s3", "(lambda1 X, lambda2 Y + rho1(X), lambda3 Z + rho2(X, Y))", false},
    {1, 0, 0, 0, "{X=0}", "q1-r0-s0", "(beta X^d, ?, ?)", true},
    {1, 0, 1, 0, "{Y=0}", "q1-r0-s1", "(lambda1 X, Y^d, nu Y^m Z + omega(X, Y)), omega - eps Y in m^2", false},
    {1, 0, 2, 0, "{Z=0}", "q1-r0-s2", "(lambda1 X, lambda2 Y + rho X^n, Z^d)", false},
    {1, 1, 1, 0, "{X=0}", "q1-r1-s1", "(lambda1 X, ?, ?)", true},
    {1, 1, 2, 0, "{X=0}", "q1-r1-s2-X", "(lambda1 X, lambda2 Y + rho X^n, X^l Z + omega(X, Y)), omega in m^2", false},
    {1, 1, 2, 0, "{Y=0}", "q1-r1-s2-Y", "(lambda1 X, lambda2 Y, Y^l Z + omega(X, Y)), omega in m^2", false},
    {2, 0, 0, 0, "{XY=0}", "q2-r0-s0",
     "(beta1 X^d_1^1 Y^d_2^1, beta2 X^d_1^2 Y^d_2^2, nu X^l Y^m Z + omega(X, Y)), omega in m^2", false},
    {2, 0, 1, 0, "{YZ=0}", "q2-r0-s1", "(lambda1 X, beta1 Y^d_1^1 Z^d_2^1 (1 + g X^n), beta2 Y^d_1^2 Z^d_2^2)", false},
    {2, 1, 1, 0, "{XY=0}", "q2-r1-s1", "(lambda1 X, X^c Y^d, nu X^l Y^m Z + omega(X, Y)), omega - eps Y in m^2", false},
    {2, 1, 2, 0, "{XZ=0}", "q2-r1-s2-X", "(lambda1 X, lambda2 Y + rho X^n, X^c Z^d)", false},
    {2, 1, 2, 0, "{YZ=0}", "q2-r1-s2-Y", "(lambda1 X, lambda2 Y, Y^c Z^d)", false},
    {2, 2, 2, 1, "{XY=0}", "q2-r2-s2-eta1", "(lambda1 X, lambda2 Y, X^l Y^m Z + omega(X, Y)), omega in m^2", false},
    {2, 2, 2, 2, "{XY=0}", "q2-r2-s2-eta2",
     "(alpha1 Y, alpha2 X, X^l Y^m Z + omega(X, Y)), alpha1 alpha2 = -lambda1 lambda2, omega in m^2", false},
    {3, 0, 0, 0, "{XYZ=0}", "q3-r0-s0", "(beta^j X^d_1^j Y^d_2^j Z^d_3^j) for j = 1, 2, 3, det D != 0", false},
    {3, 1, 1, 0, "{XYZ=0}", "q3-r1-s1",
     "(lambda1 X, beta1 X^c_1 Y^d_1^1 Z^d_2^1 (1 + g X^n), beta2 X^c_2 Y^d_1^2 Z^d_2^2)", false},
    {3, 2, 2, 1, "{XYZ=0}", "q3-r2-s2-eta1", "(lambda1 X, lambda2 Y, X^c_1 Y^c_2 Z^d)", false},
    {3, 2, 2, 2, "{XYZ=0}", "q3-r2-s2-eta2", "(alpha1 Y, alpha2 X, X^c_1 Y^c_2 Z^d), alpha1 alpha2 = -lambda1 lambda2",
     false},
};

const char* kUnresolvedCitation =
    "q = 1 with s + p = 1: examples \"anycurve\" and \"manyimages\" show that the images of the critical set can be any "
    "curve or a sequence of distinct curves, so the table gives no explicit form";

const std::vector<std::string> kLetters = {"X", "Y", "Z"};

MultiIndex idx(long a, long b, long c) { return {static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)}; }

/// Diagonal rescale X_i -> kappa_i X_i. A coefficient c of x^n in component j
/// becomes c kappa_j kappa^{-n}; `log_kappa` holds log kappa.
struct Rescale {
    Eigen::Vector3cd log_kappa = Eigen::Vector3cd::Zero();
    std::vector<std::pair<int, MultiIndex>> unit_targets;

    bool is_target(int j, const MultiIndex& n) const {
        return std::find(unit_targets.begin(), unit_targets.end(), std::make_pair(j, n)) != unit_targets.end();
    }
    Coeff apply(int j, const MultiIndex& n, const Coeff& c) const {
        if (is_target(j, n)) return Coeff::one(c.mode());
        std::complex<double> e = log_kappa(j);
        for (int i = 0; i < 3; ++i) e -= static_cast<double>(n[i]) * log_kappa(i);
        if (e == std::complex<double>(0.0, 0.0)) return c;
        return Coeff(c.to_complex() * std::exp(e));
    }
};

struct Target {
    int comp;
    MultiIndex n;
};

// Greedy: a target is used when its exponent row e_j - n raises the rank.
Rescale solve_rescale(const SeriesMap& G, const std::vector<Target>& prio) {
    Rescale out;
    std::vector<Eigen::Vector3d> rows;
    std::vector<std::complex<double>> rhs;
    for (const auto& t : prio) {
        Coeff c = G[t.comp].coeff(t.n);
        if (c.is_zero(0)) continue;
        Eigen::Vector3d a;
        for (int i = 0; i < 3; ++i) a(i) = (i == t.comp ? 1.0 : 0.0) - t.n[i];
        Eigen::MatrixXd A(rows.size() + 1, 3);
        for (size_t k = 0; k < rows.size(); ++k) A.row(k) = rows[k].transpose();
        A.row(rows.size()) = a.transpose();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        lu.setThreshold(1e-9);
        if (lu.rank() <= static_cast<int>(rows.size())) continue;
        rows.push_back(a);
        rhs.push_back(-std::log(c.to_complex()));
        out.unit_targets.push_back({t.comp, t.n});
    }
    if (rows.empty()) return out;
    Eigen::MatrixXcd A(rows.size(), 3);
    Eigen::VectorXcd b(rows.size());
    for (size_t k = 0; k < rows.size(); ++k) {
        A.row(k) = rows[k].transpose().cast<std::complex<double>>();
        b(k) = rhs[k];
    }
    // Least-norm solution of A log(kappa) = b; the rows are independent.
    out.log_kappa = A.adjoint() * (A * A.adjoint()).lu().solve(b);
    return out;
}

int matrix_rank(const std::vector<Eigen::Vector3d>& rows) {
    if (rows.empty()) return 0;
    Eigen::MatrixXd A(rows.size(), 3);
    for (size_t k = 0; k < rows.size(); ++k) A.row(k) = rows[k].transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-9);
    return static_cast<int>(lu.rank());
}

class Reader {
public:
    Reader(SeriesMap G, Mode mode, const Tolerances& tol, ClassRow& row)
        : G_(std::move(G)), mode_(mode), zt_(mode == Mode::Exact ? 0.0 : std::max(1e-7, tol.coeff)), row_(row) {}

    const SeriesMap& germ() const { return G_; }
    bool zero(const Coeff& c) const { return c.is_zero(zt_); }

    std::vector<std::pair<MultiIndex, Coeff>> terms(int j) const {
        std::vector<std::pair<MultiIndex, Coeff>> out;
        for (const auto& [r, c] : G_[j].terms())
            if (!zero(c)) out.emplace_back(G_[j].exps(r), c);
        return out;
    }
    Coeff at(int j, const MultiIndex& n) const { return G_[j].coeff(n); }

    void bad(const std::string& what) { problems_.push_back(what); }
    void check(bool ok, const std::string& what) {
        if (!ok) bad("constraint " + what + " fails");
    }
    const std::vector<std::string>& problems() const { return problems_; }

    void coeff(const std::string& name, const Coeff& c) { row_.coefficients.emplace_back(name, c); }
    void expo(const std::string& name, long v) { row_.exponents.emplace_back(name, v); }
    void flag(const std::string& name, int v) { row_.flags.emplace_back(name, v); }
    void text(const std::string& name, const Series& s) { row_.series.emplace_back(name, series_to_text(s, kLetters)); }
    void relation(const std::string& s) { row_.relations.push_back(s); }

    /// Component j is exactly c X_i; returns c.
    Coeff single_linear(int j, int i, const std::string& label) {
        auto t = terms(j);
        MultiIndex e = unit_index(3, i);
        if (t.size() != 1 || t[0].first != e) {
            bad(label + " component " + kLetters[j] + " is not a multiple of " + kLetters[i]);
            return Coeff::zero(mode_);
        }
        return t[0].second;
    }

    /// Component j is lambda X_j + rho(X) with only resonant X^n, (lambda_X)^n = lambda.
    /// Returns (rho flag, n).
    std::pair<int, long> linear_plus_rho(int j, const Coeff& lambda_x, const Coeff& lambda) {
        int flag = 0;
        long n = 0;
        for (const auto& [m, c] : terms(j)) {
            if (m == unit_index(3, j)) continue;
            if (m[1] || m[2]) {
                bad("component " + kLetters[j] + " has a term outside lambda " + kLetters[j] + " + rho(X)");
                continue;
            }
            if (!lambda_x.pow(m[0]).equals(lambda, mode_ == Mode::Exact ? 0.0 : 1e-9))
                bad("component " + kLetters[j] + " keeps the non-resonant term X^" + std::to_string(m[0]));
            if (flag && n != m[0]) bad("component " + kLetters[j] + " has more than one rho term");
            flag = 1;
            n = m[0];
        }
        return {flag, n};
    }

    /// Component j is beta x^a times a unit; returns (a, beta, unit).
    std::tuple<MultiIndex, Coeff, Series> monomial(int j) {
        auto mu = monomial_unit_factor(G_[j]);
        Coeff beta = mu.unit.constant_term();
        return {mu.monomial, beta, mu.unit.scaled(Coeff::one(mode_) / beta)};
    }

    /// Unit must be 1 up to resonant X^n terms; returns the X^n coefficients.
    std::vector<std::pair<long, Coeff>> unit_terms(int j, const Series& unit) {
        std::vector<std::pair<long, Coeff>> out;
        for (const auto& [r, c] : unit.terms()) {
            const MultiIndex& m = unit.exps(r);
            if (r == 0 || zero(c)) continue;
            if (m[1] || m[2]) bad("unit of component " + kLetters[j] + " depends on Y or Z");
            else out.emplace_back(m[0], c);
        }
        return out;
    }

    /// Component Z = nu X^l Y^m Z + omega(X, Y); returns (l, m, nu, omega).
    std::tuple<long, long, Coeff, Series> affine_z() {
        Series omega(3, G_[2].trunc(), G_[2].ring());
        MultiIndex lin;
        Coeff nu = Coeff::zero(mode_);
        int count = 0;
        for (const auto& [m, c] : terms(2)) {
            if (m[2] == 0) omega.add_term(m, c);
            else if (m[2] == 1) {
                lin = m;
                nu = c;
                ++count;
            } else bad("component Z has Z-degree above 1");
        }
        if (count != 1) {
            bad("component Z is not nu X^l Y^m Z + omega(X, Y)");
            return {0, 0, nu, omega};
        }
        return {lin[0], lin[1], nu, omega};
    }

    Mode mode() const { return mode_; }

private:
    SeriesMap G_;
    Mode mode_;
    double zt_;
    ClassRow& row_;
    std::vector<std::string> problems_;
};

// Z -> Z + p X + q Y removes the linear part of omega along X and Y wherever
// the (X, Y) block of the linear part allows it.
SeriesMap clean_omega_linear(const SeriesMap& G, double zt) {
    const Ring ring = G[0].ring();
    const Mode mode = ring.mode;
    const int N = G[0].trunc();
    CMatrix L = linear_part(G);
    Coeff wx = L(2, 0), wy = L(2, 1);
    if (wx.is_zero(zt) && wy.is_zero(zt)) return G;
    Coeff p = Coeff::zero(mode), q = Coeff::zero(mode);
    // new linear part of Z: w + (p, q) M with M the (X, Y) block
    Coeff a = L(0, 0), b = L(0, 1), c = L(1, 0), d = L(1, 1);
    Coeff det = a * d - b * c;
    if (!det.is_zero(zt)) {
        p = (wy * c - wx * d) / det;
        q = (wx * b - wy * a) / det;
    } else {
        if (!a.is_zero(zt) && b.is_zero(zt) && c.is_zero(zt)) p = -wx / a;
        if (!d.is_zero(zt) && b.is_zero(zt) && c.is_zero(zt)) q = -wy / d;
    }
    if (p.is_zero(0) && q.is_zero(0)) return G;
    SeriesMap psi = identity_map(3, N, ring), inv = identity_map(3, N, ring);
    Series shift = Series::variable(3, N, ring, 0).scaled(p) + Series::variable(3, N, ring, 1).scaled(q);
    psi[2] = psi[2] + shift;
    inv[2] = inv[2] - shift;
    return compose(psi, compose(G, inv));
}

}  // namespace

ClassRow classify(const ConjugacyCertificate& cert, const Tolerances& tol) {
    const GermMap& g = cert.normalized;
    const BlockStructure& b = cert.blocks;
    if (g.dim() != 3) fail(ErrorKind::Domain, "classify: the table covers dimension 3 only (got " + std::to_string(g.dim()) + ")");
    if (!b.split) fail(ErrorKind::Domain, "classify: the certificate has no v/z split");
    const Mode mode = g.mode();

    ClassRow row;
    row.q = b.q;
    row.r = b.r;
    row.s = b.s;
    row.eta = b.eta;

    // Table coordinates.
    std::vector<double> modulus(3, 0.0);
    auto xi = xi_values(b);
    for (int k = 0; k < b.r; ++k) modulus[k] = std::pow(xi[k].abs(), 1.0 / b.eta);
    for (int k = 0; k < b.e; ++k) modulus[b.v0() + k] = b.mu[k].abs();
    std::vector<int> order(b.s);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        double scale = std::max(modulus[i], modulus[j]);
        if (std::abs(modulus[i] - modulus[j]) > 1e-9 * scale) return modulus[i] > modulus[j];
        return b.perm[i] < b.perm[j];
    });
    std::vector<int> rest;
    for (int i = b.y0(); i < b.z0(); ++i) rest.push_back(i);
    std::stable_sort(rest.begin(), rest.end(), [&](int i, int j) { return b.perm[i] < b.perm[j]; });
    for (int i : rest) order.push_back(i);
    for (int i = b.z0(); i < 3; ++i) order.push_back(i);
    for (int i : order) row.coordinates.push_back(b.perm[i]);

    std::string crit;
    for (int i = 0; i < 3; ++i) {
        int c = order[i];
        if (c < b.r || (c >= b.y0() && c < b.z0())) crit += kLetters[i];
    }
    row.crit_shape = crit.empty() ? "{}" : "{" + crit + "=0}";

    const RowSpec* spec = nullptr;
    for (const auto& rs : kRows)
        if (rs.q == row.q && rs.r == row.r && rs.s == row.s && row.crit_shape == rs.crit && (rs.eta == 0 || rs.eta == row.eta))
            spec = &rs;
    if (!spec)
        fail(ErrorKind::Solver, "classify: no table row for q=" + std::to_string(row.q) + " r=" + std::to_string(row.r) +
                                    " s=" + std::to_string(row.s) + " eta=" + std::to_string(row.eta) + " " + row.crit_shape);
    if (spec->eta == 0) row.eta = b.eta;
    row.form_id = spec->id;
    row.form = spec->form;
    if (spec->unresolved) {
        row.unresolved = true;
        row.citation = kUnresolvedCitation;
        return row;
    }

    // The germ in table coordinates: new coordinate i is old coordinate order[i].
    SeriesMap sub(3);
    for (int i = 0; i < 3; ++i) sub[order[i]] = Series::variable(3, g.trunc(), g.ring(), i);
    SeriesMap G;
    for (int i = 0; i < 3; ++i) G.push_back(compose(g.comps[order[i]], sub));
    const double zt = mode == Mode::Exact ? 0.0 : std::max(1e-7, tol.coeff);
    const std::string id = spec->id;
    const bool z_affine = id == "q1-r0-s1" || id == "q1-r1-s2-X" || id == "q1-r1-s2-Y" || id == "q2-r0-s0" ||
                          id == "q2-r1-s1" || id == "q2-r2-s2-eta1" || id == "q2-r2-s2-eta2";
    if (z_affine) G = clean_omega_linear(G, zt);

    Reader rd(G, mode, tol, row);
    const Coeff one = Coeff::one(mode);
    const double rtol = mode == Mode::Exact ? 0.0 : 1e-9;

    // omega in m^2, or omega - eps Y in m^2 when `with_eps`.
    auto read_omega = [&](const Series& omega, bool with_eps) {
        rd.text("omega", omega);
        Coeff ox = omega.coeff(idx(1, 0, 0)), oy = omega.coeff(idx(0, 1, 0));
        if (with_eps) {
            if (!rd.zero(ox)) rd.bad("omega has a linear X term");
            rd.flag("epsilon", rd.zero(oy) ? 0 : 1);
        } else if (!rd.zero(ox) || !rd.zero(oy)) {
            // Not removable by Z -> Z + pX + qY when X and Y have no linear dynamics.
            rd.relation("omega has a linear part that a linear change of Z cannot remove");
        }
    };
    auto scaled_coeff = [&](const Rescale& sc, const std::string& name, int j, const MultiIndex& n) {
        rd.coeff(name, sc.apply(j, n, rd.at(j, n)));
    };
    auto require_unit = [&](const Rescale& sc, int j, const MultiIndex& n, const std::string& what) {
        if (!sc.is_target(j, n)) rd.bad(what + " cannot be rescaled to 1");
    };
    // Secondary resonance flag for two y components with units 1 + g_k X^n.
    auto secondary_flag = [&](const Coeff& lambda, long D11, long D21, long D12, long D22, const Series& u1,
                              const Series& u2, int j1, int j2) {
        auto t1 = rd.unit_terms(j1, u1), t2 = rd.unit_terms(j2, u2);
        std::vector<long> ns;
        for (const auto& [n, c] : t1) ns.push_back(n);
        for (const auto& [n, c] : t2) ns.push_back(n);
        std::sort(ns.begin(), ns.end());
        ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
        int flag = 0;
        long nres = 0;
        for (long n : ns) {
            Coeff ln = lambda.pow(n);
            // (lambda^n - d_1^1)(lambda^n - d_2^2) = d_1^2 d_2^1
            Coeff rel = (ln - Coeff::integer(D11, mode)) * (ln - Coeff::integer(D22, mode)) - Coeff::integer(D12 * D21, mode);
            if (!rel.is_zero(rtol)) {
                rd.bad("y units keep the non-resonant term X^" + std::to_string(n));
                continue;
            }
            Coeff g1 = u1.coeff(idx(n, 0, 0)), g2 = u2.coeff(idx(n, 0, 0));
            // M = lambda^n I - D^T acts on the unit coefficients; its left kernel
            // detects a slot vector outside the range of M.
            Coeff m00 = ln - Coeff::integer(D11, mode), m01 = -Coeff::integer(D21, mode);
            Coeff m10 = -Coeff::integer(D12, mode), m11 = ln - Coeff::integer(D22, mode);
            Coeff w0 = m10, w1 = -m00;
            if (w0.is_zero(rtol) && w1.is_zero(rtol)) {
                w0 = m11;
                w1 = -m01;
            }
            if (w0.is_zero(rtol) && w1.is_zero(rtol)) {
                w0 = one;
                w1 = Coeff::zero(mode);
            }
            if (!rd.zero(w0 * g1 + w1 * g2)) {
                flag = 1;
                nres = n;
            }
        }
        rd.flag("g", flag);
        if (flag) rd.expo("n", nres);
    };

    if (id == "q0-r0-s3") {
        Coeff l1 = rd.single_linear(0, 0, "Poincare-Dulac");
        rd.coeff("lambda1", l1);
        rd.coeff("lambda2", rd.at(1, idx(0, 1, 0)));
        rd.coeff("lambda3", rd.at(2, idx(0, 0, 1)));
        Series rho1(3, G[1].trunc(), G[1].ring()), rho2(3, G[2].trunc(), G[2].ring());
        for (const auto& [m, c] : rd.terms(1)) {
            if (m == idx(0, 1, 0)) continue;
            if (m[1] || m[2]) rd.bad("component Y depends on Y or Z beyond lambda2 Y");
            rho1.add_term(m, c);
        }
        for (const auto& [m, c] : rd.terms(2)) {
            if (m == idx(0, 0, 1)) continue;
            if (m[2]) rd.bad("component Z depends on Z beyond lambda3 Z");
            rho2.add_term(m, c);
        }
        rd.text("rho1", rho1);
        rd.text("rho2", rho2);
    } else if (id == "q1-r0-s1") {
        Coeff l1 = rd.single_linear(0, 0, "");
        rd.coeff("lambda1", l1);
        auto [a, beta, unit] = rd.monomial(1);
        if (!rd.unit_terms(1, unit).empty()) rd.bad("unit of component Y is not 1");
        if (a[0] || a[2]) rd.bad("component Y is not a power of Y");
        long d = a[1];
        auto [l, m, nu, omega] = rd.affine_z();
        Rescale sc = solve_rescale(rd.germ(), {{1, a}});
        require_unit(sc, 1, a, "the coefficient of Y^d");
        rd.expo("d", d);
        rd.expo("m", m);
        scaled_coeff(sc, "nu", 2, idx(l, m, 1));
        if (l) rd.bad("component Z has an X factor in front of Z");
        read_omega(omega, true);
        rd.check(d >= 2, "d >= 2");
        rd.check(m >= 1, "m >= 1");
    } else if (id == "q1-r0-s2" || id == "q2-r1-s2-X") {
        Coeff l1 = rd.single_linear(0, 0, "");
        Coeff l2 = rd.at(1, idx(0, 1, 0));
        rd.coeff("lambda1", l1);
        rd.coeff("lambda2", l2);
        auto [rho, n] = rd.linear_plus_rho(1, l1, l2);
        rd.flag("rho", rho);
        if (rho) rd.expo("n", n);
        auto [a, beta, unit] = rd.monomial(2);
        if (!rd.unit_terms(2, unit).empty()) rd.bad("unit of component Z is not 1");
        if (a[1]) rd.bad("component Z involves Y");
        Rescale sc = solve_rescale(rd.germ(), {{2, a}});
        require_unit(sc, 2, a, "the monomial coefficient of component Z");
        rd.expo("d", a[2]);
        rd.check(a[2] >= 2, "d >= 2");
        if (id == "q1-r0-s2") {
            if (a[0]) rd.bad("component Z involves X");
        } else {
            rd.expo("c", a[0]);
            rd.check(a[0] >= 1, "c >= 1");
        }
    } else if (id == "q2-r1-s2-Y") {
        rd.coeff("lambda1", rd.single_linear(0, 0, ""));
        rd.coeff("lambda2", rd.single_linear(1, 1, ""));
        auto [a, beta, unit] = rd.monomial(2);
        if (!rd.unit_terms(2, unit).empty()) rd.bad("unit of component Z is not 1");
        if (a[0]) rd.bad("component Z involves X");
        Rescale sc = solve_rescale(rd.germ(), {{2, a}});
        require_unit(sc, 2, a, "the monomial coefficient of component Z");
        rd.expo("c", a[1]);
        rd.expo("d", a[2]);
        rd.check(a[1] >= 1, "c >= 1");
        rd.check(a[2] >= 2, "d >= 2");
    } else if (id == "q1-r1-s2-X" || id == "q1-r1-s2-Y") {
        Coeff l1 = rd.single_linear(0, 0, "");
        rd.coeff("lambda1", l1);
        if (id == "q1-r1-s2-X") {
            Coeff l2 = rd.at(1, idx(0, 1, 0));
            rd.coeff("lambda2", l2);
            auto [rho, n] = rd.linear_plus_rho(1, l1, l2);
            rd.flag("rho", rho);
            if (rho) rd.expo("n", n);
        } else {
            rd.coeff("lambda2", rd.single_linear(1, 1, ""));
        }
        auto [l, m, nu, omega] = rd.affine_z();
        MultiIndex lz = idx(l, m, 1);
        Rescale sc = solve_rescale(rd.germ(), {{2, lz}});
        require_unit(sc, 2, lz, "the coefficient of the Z term");
        if (id == "q1-r1-s2-X" && m) rd.bad("Z term involves Y");
        if (id == "q1-r1-s2-Y" && l) rd.bad("Z term involves X");
        long ell = id == "q1-r1-s2-X" ? l : m;
        rd.expo("l", ell);
        rd.check(ell >= 1, "l >= 1");
        read_omega(omega, false);
    } else if (id == "q2-r0-s0") {
        auto [a1, b1, u1] = rd.monomial(0);
        auto [a2, b2, u2] = rd.monomial(1);
        if (!rd.unit_terms(0, u1).empty() || !rd.unit_terms(1, u2).empty()) rd.bad("units of X, Y are not constant");
        if (a1[2] || a2[2]) rd.bad("components X, Y involve Z");
        auto [l, m, nu, omega] = rd.affine_z();
        MultiIndex lz = idx(l, m, 1);
        // Rank 2: two of beta1, beta2, nu become 1; otherwise nu alone.
        std::vector<Eigen::Vector3d> rows = {Eigen::Vector3d(1 - a1[0], -a1[1], 0), Eigen::Vector3d(-a2[0], 1 - a2[1], 0),
                                             Eigen::Vector3d(-l, -m, 0)};
        std::vector<Target> prio = matrix_rank(rows) == 2 ? std::vector<Target>{{0, a1}, {1, a2}, {2, lz}}
                                                          : std::vector<Target>{{2, lz}, {0, a1}, {1, a2}};
        Rescale sc = solve_rescale(rd.germ(), prio);
        scaled_coeff(sc, "beta1", 0, a1);
        scaled_coeff(sc, "beta2", 1, a2);
        scaled_coeff(sc, "nu", 2, lz);
        rd.expo("d_1^1", a1[0]);
        rd.expo("d_2^1", a1[1]);
        rd.expo("d_1^2", a2[0]);
        rd.expo("d_2^2", a2[1]);
        rd.expo("l", l);
        rd.expo("m", m);
        rd.check(a1[0] * a2[1] != a2[0] * a1[1], "d_1^1 d_2^2 != d_1^2 d_2^1");
        rd.check(a2[0] + a2[1] >= 2, "d_1^2 + d_2^2 >= 2");
        rd.check(std::max(a1[0] - 1, a1[1]) >= 1, "max(d_1^1 - 1, d_2^1) >= 1");
        rd.check(l + m >= 1, "l + m >= 1");
        read_omega(omega, false);
    } else if (id == "q2-r0-s1" || id == "q3-r1-s1") {
        Coeff l1 = rd.single_linear(0, 0, "");
        rd.coeff("lambda1", l1);
        auto [a1, b1, u1] = rd.monomial(1);
        auto [a2, b2, u2] = rd.monomial(2);
        long D11 = a1[1], D21 = a1[2], D12 = a2[1], D22 = a2[2];
        std::vector<Target> prio = {{1, a1}, {2, a2}};
        Rescale sc = solve_rescale(rd.germ(), prio);
        std::vector<Eigen::Vector3d> dm = {Eigen::Vector3d(0, 1 - D11, -D21), Eigen::Vector3d(0, -D12, 1 - D22)};
        if (static_cast<int>(sc.unit_targets.size()) < matrix_rank(dm)) rd.bad("rescale reached fewer betas than rank(D - Id)");
        scaled_coeff(sc, "beta1", 1, a1);
        scaled_coeff(sc, "beta2", 2, a2);
        rd.expo("d_1^1", D11);
        rd.expo("d_2^1", D21);
        rd.expo("d_1^2", D12);
        rd.expo("d_2^2", D22);
        secondary_flag(l1, D11, D21, D12, D22, u1, u2, 1, 2);
        rd.check(D11 * D22 != D12 * D21, "d_1^1 d_2^2 != d_1^2 d_2^1");
        if (id == "q2-r0-s1") {
            if (a1[0] || a2[0]) rd.bad("y components involve X");
            rd.check(std::max(D11 - 1, D21) >= 1, "max(d_1^1 - 1, d_2^1) >= 1");
        } else {
            rd.expo("c_1", a1[0]);
            rd.expo("c_2", a2[0]);
            rd.check(a1[0] + a2[0] >= 1, "c_1 + c_2 >= 1");
            // Zero eigenvalue only forces c_j + d_1^j + d_2^j >= 2; the row's
            // stricter bound fails on germs like (lambda X, X Y^2 Z, X^2 Y).
            rd.check(a1[0] + D11 + D21 >= 2 && a2[0] + D12 + D22 >= 2, "c_j + d_1^j + d_2^j >= 2");
            if (D11 + D21 < 2 || D12 + D22 < 2) rd.relation("d_1^j + d_2^j >= 2 fails; only c_j + d_1^j + d_2^j >= 2 holds");
        }
    } else if (id == "q2-r1-s1") {
        Coeff l1 = rd.single_linear(0, 0, "");
        rd.coeff("lambda1", l1);
        auto [a, beta, unit] = rd.monomial(1);
        if (!rd.unit_terms(1, unit).empty()) rd.bad("unit of component Y is not 1");
        if (a[2]) rd.bad("component Y involves Z");
        auto [l, m, nu, omega] = rd.affine_z();
        MultiIndex lz = idx(l, m, 1);
        Rescale sc = solve_rescale(rd.germ(), {{1, a}, {2, lz}});
        require_unit(sc, 1, a, "the coefficient of X^c Y^d");
        scaled_coeff(sc, "nu", 2, lz);
        long c = a[0], d = a[1];
        rd.expo("c", c);
        rd.expo("d", d);
        rd.expo("l", l);
        rd.expo("m", m);
        rd.check(c + d >= 2, "c + d >= 2");
        rd.check(l + m >= 1, "l + m >= 1");
        rd.check(c + l >= 1, "c + l >= 1");
        rd.check(d >= 1, "d >= 1");
        rd.check(d + m >= 2, "d + m >= 2");
        read_omega(omega, true);
    } else if (id == "q2-r2-s2-eta1" || id == "q2-r2-s2-eta2" || id == "q3-r2-s2-eta1" || id == "q3-r2-s2-eta2") {
        bool swap = id.back() == '2';
        if (swap) {
            Coeff a1 = rd.single_linear(0, 1, ""), a2 = rd.single_linear(1, 0, "");
            rd.coeff("alpha1", a1);
            rd.coeff("alpha2", a2);
            rd.relation("alpha1 alpha2 = -lambda1 lambda2 with lambda1 lambda2 = " + (-(a1 * a2)).str());
        } else {
            rd.coeff("lambda1", rd.single_linear(0, 0, ""));
            rd.coeff("lambda2", rd.single_linear(1, 1, ""));
        }
        if (id[1] == '2') {
            auto [l, m, nu, omega] = rd.affine_z();
            MultiIndex lz = idx(l, m, 1);
            Rescale sc = solve_rescale(rd.germ(), {{2, lz}});
            require_unit(sc, 2, lz, "the coefficient of X^l Y^m Z");
            rd.expo("l", l);
            rd.expo("m", m);
            rd.check(l >= 1 && m >= 1, "l, m >= 1");
            read_omega(omega, false);
        } else {
            auto [a, beta, unit] = rd.monomial(2);
            if (!rd.unit_terms(2, unit).empty()) rd.bad("unit of component Z is not 1");
            Rescale sc = solve_rescale(rd.germ(), {{2, a}});
            require_unit(sc, 2, a, "the monomial coefficient of component Z");
            rd.expo("c_1", a[0]);
            rd.expo("c_2", a[1]);
            rd.expo("d", a[2]);
            rd.check(a[0] >= 1 && a[1] >= 1, "c_1, c_2 >= 1");
            rd.check(a[2] >= 2, "d >= 2");
        }
    } else if (id == "q3-r0-s0") {
        std::vector<MultiIndex> a(3);
        std::vector<Series> u(3);
        std::vector<Target> prio;
        std::vector<Eigen::Vector3d> dm;
        for (int j = 0; j < 3; ++j) {
            auto [mono, beta, unit] = rd.monomial(j);
            a[j] = mono;
            u[j] = unit;
            if (!rd.unit_terms(j, unit).empty()) rd.bad("unit of component " + kLetters[j] + " is not constant");
            prio.push_back({j, mono});
            Eigen::Vector3d v;
            for (int i = 0; i < 3; ++i) v(i) = (i == j ? 1.0 : 0.0) - mono[i];
            dm.push_back(v);
        }
        Rescale sc = solve_rescale(rd.germ(), prio);
        if (static_cast<int>(sc.unit_targets.size()) < matrix_rank(dm)) rd.bad("rescale reached fewer betas than rank(D - Id)");
        QMatrix D(3, 3);
        for (int j = 0; j < 3; ++j) {
            scaled_coeff(sc, "beta" + std::to_string(j + 1), j, a[j]);
            for (int i = 0; i < 3; ++i) {
                D(i, j) = a[j][i];
                rd.expo("d_" + std::to_string(i + 1) + "^" + std::to_string(j + 1), a[j][i]);
            }
            rd.check(a[j][0] + a[j][1] + a[j][2] >= 2, "d_1^j + d_2^j + d_3^j >= 2");
        }
        rd.check(D.det() != 0, "det D != 0");
    }

    if (!rd.problems().empty()) {
        std::string msg = "classify: the normalized germ does not match row " + id + " (" + row.crit_shape + "):";
        for (const auto& p : rd.problems()) msg += " " + p + ";";
        fail(ErrorKind::Solver, msg);
    }
    return row;
}

}  // namespace rigidnf
