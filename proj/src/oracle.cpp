#include "rigidnf/errors.hpp"
#include "rigidnf/normalizer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <string>
#include <utility>

namespace rigidnf {

namespace {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

constexpr double kRankTol = 1e-11;

const Ring kRaw{Mode::Float, 0.0};

Series to_float(const Series& s) {
    std::vector<Series::Term> terms;
    for (const auto& [r, c] : s.terms()) terms.emplace_back(r, c.in_mode(Mode::Float));
    return Series::from_ranked(s.dim(), s.trunc(), kRaw, std::move(terms));
}

bool only_x(const MultiIndex& n, int x_dim) {
    for (size_t i = x_dim; i < n.size(); ++i)
        if (n[i]) return false;
    return true;
}

// Singular values below kRankTol * scale count as zero. Roundoff sits near
// 1e-16 * scale; genuine directions reach 1e-9 * scale. The scale is taken
// from the unprojected matrix: a projection can leave pure roundoff, which a
// threshold relative to the largest singular value would keep.
Mat pinv(const Mat& A, double scale) {
    if (A.cols() == 0 || A.rows() == 0) return Mat::Zero(A.cols(), A.rows());
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > kRankTol * std::max(1.0, scale)) inv(i) = 1.0 / sv(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

double norm_of(const Mat& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

// Solves r + Ap x + As s = 0. The normal-form coefficients s come first and
// are the smallest ones that leave a consistent system for x, which is then
// taken least-norm too.
std::pair<Vec, Vec> least_norm(const Mat& Ap, const Mat& As, const Vec& r, const std::string& where) {
    Mat Ap_pinv = pinv(Ap, norm_of(Ap));
    auto project = [&](const Mat& M) -> Mat { return M - Ap * (Ap_pinv * M); };
    Vec s = -pinv(project(As), norm_of(As)) * project(r);
    Vec rest = r + As * s;
    Vec x = -Ap_pinv * rest;
    Vec left = rest + Ap * x;
    if (norm_of(left) > 1e-8 * std::max(1.0, norm_of(r)))
        fail(ErrorKind::Solver, "oracle: " + where + " is not solvable (left over " + Coeff(norm_of(left)).str() + ")");
    return {x, s};
}

}  // namespace

OracleResult oracle_solve(const GermMap& input, const Tolerances& tol) {
    GermMap f0;
    f0.critical_count = input.critical_count;
    for (const auto& s : input.comps) f0.comps.push_back(to_float(s));
    for (auto& s : f0.comps) s = Series::from_ranked(s.dim(), s.trunc(), Ring{Mode::Float, tol.coeff}, s.terms());

    BlockStructure b0 = detect_blocks(f0, rigidity_check(f0));
    auto js = jordan_split(apply_prepared_order(f0, b0), b0, tol.eig);
    const BlockStructure& b = js.blocks;
    const int d = f0.dim(), N = f0.trunc(), xd = b.x_dim(), z0 = b.z0();
    const bool affine = d - z0 == 1;

    SeriesMap f;
    for (const auto& s : js.germ.comps) f.push_back(Series::from_ranked(d, N, kRaw, s.terms()));
    auto tab = MonomialTable::get(d, N);
    const Coeff one(1.0);
    auto plus_one = [&](const Series& s) { return s + one; };

    // Data read off f. u and y components are written as monomial times unit
    // and their equations are divided by the monomial, which keeps the
    // unknowns of each degree triangular.
    std::vector<Coeff> alpha(b.r), beta(b.p);
    SeriesMap theta(b.r), unit(b.p);
    std::vector<MultiIndex> y_mono(b.p);
    for (int k = 0; k < b.r; ++k) {
        auto mu = monomial_unit_factor(f[k]);
        alpha[k] = mu.unit.constant_term();
        theta[k] = mu.unit.scaled(one / alpha[k]).with_trunc(N - 1) + (-one);
    }
    for (int k = 0; k < b.p; ++k) {
        auto mu = monomial_unit_factor(f[b.y0() + k]);
        y_mono[k] = mu.monomial;
        beta[k] = mu.unit.constant_term();
        unit[k] = mu.unit.scaled(one / beta[k]).with_trunc(N - 1);
    }
    CMatrix L = linear_part(f);
    SeriesMap v_form(b.e, Series(d, N, kRaw));
    for (int k = 0; k < b.e; ++k)
        for (int j = 0; j <= k; ++j) v_form[k].add_term(unit_index(d, b.v0() + j), L(b.v0() + k, b.v0() + j));

    // Unknowns: units of Phi on u and y, Phi itself on v, and the free
    // normal-form coefficients g (y units) and rho (v components).
    SeriesMap phi_u(b.r, Series(d, N - 1, kRaw)), phi_y(b.p, Series(d, N - 1, kRaw)), g(b.p, Series(d, N - 1, kRaw));
    SeriesMap Pv, rho(b.e, Series(d, N, kRaw));
    for (int k = 0; k < b.e; ++k) Pv.push_back(Series::variable(d, N, kRaw, b.v0() + k));
    enum Kind { PhiU, PhiV, PhiY, Rho, G };
    struct Unknown {
        Kind kind;
        int k;
        MultiIndex n;
    };
    auto store = [&](Kind kind) -> SeriesMap& {
        switch (kind) {
            case PhiU: return phi_u;
            case PhiV: return Pv;
            case PhiY: return phi_y;
            case Rho: return rho;
            default: return g;
        }
    };
    auto build_phi = [&] {
        SeriesMap Phi = identity_map(d, N, kRaw);
        for (int k = 0; k < b.r; ++k) Phi[k] = Phi[k] * plus_one(phi_u[k].with_trunc(N));
        for (int k = 0; k < b.e; ++k) Phi[b.v0() + k] = Pv[k];
        for (int k = 0; k < b.p; ++k) Phi[b.y0() + k] = Phi[b.y0() + k] * plus_one(phi_y[k].with_trunc(N));
        return Phi;
    };
    auto is_v_linear = [&](const MultiIndex& n) {
        if (total_degree(n) != 1) return false;
        for (int j = 0; j < b.e; ++j)
            if (n[b.v0() + j]) return true;
        return false;
    };

    for (int D = 1; D <= N; ++D) {
        const int beg = tab->deg_begin(D), end = tab->deg_end(D), nD = end - beg;
        const bool units = D <= N - 1;
        std::vector<Unknown> phis, slots;
        for (int i = beg; i < end; ++i) {
            const MultiIndex& n = tab->exps(i);
            if (units) {
                for (int k = 0; k < b.r; ++k) phis.push_back({PhiU, k, n});
                for (int k = 0; k < b.p; ++k) phis.push_back({PhiY, k, n});
                if (only_x(n, xd))
                    for (int k = 0; k < b.p; ++k) slots.push_back({G, k, n});
            }
            if (!is_v_linear(n)) {
                for (int k = 0; k < b.e; ++k) phis.push_back({PhiV, k, n});
                if (only_x(n, xd))
                    for (int k = 0; k < b.e; ++k) slots.push_back({Rho, k, n});
            }
        }
        // Rows: u units, v components, y units; degree D only.
        auto residual = [&] {
            SeriesMap Phi = build_phi();
            std::vector<Series> rows;
            if (units)
                for (int k = 0; k < b.r; ++k)
                    rows.push_back(plus_one(theta[k]) * plus_one(compose(phi_u[k], f)) - plus_one(phi_u[b.sigma[k]]));
            for (int k = 0; k < b.e; ++k) rows.push_back(compose(Pv[k], f) - compose(v_form[k] + rho[k], Phi));
            if (units)
                for (int k = 0; k < b.p; ++k) {
                    Series rhs = plus_one(compose(g[k], Phi).with_trunc(N - 1));
                    for (int j = 0; j < b.r; ++j)
                        if (y_mono[k][j]) rhs = rhs * power(plus_one(phi_u[j]), y_mono[k][j]);
                    for (int j = 0; j < b.p; ++j)
                        if (y_mono[k][b.y0() + j]) rhs = rhs * power(plus_one(phi_y[j]), y_mono[k][b.y0() + j]);
                    rows.push_back(unit[k] * plus_one(compose(phi_y[k], f)) - rhs);
                }
            Vec out = Vec::Zero(static_cast<long>(rows.size()) * nD);
            for (size_t c = 0; c < rows.size(); ++c) {
                Series h = rows[c].homogeneous(D);
                for (const auto& [r, v] : h.terms()) out(c * nD + (r - beg)) = v.to_complex();
            }
            return out;
        };
        Vec r0 = residual();
        auto column = [&](const Unknown& u) {
            SeriesMap& st = store(u.kind);
            Series saved = st[u.k];
            st[u.k].add_term(u.n, one);
            Vec col = residual() - r0;
            st[u.k] = saved;
            return col;
        };
        Mat Ap(r0.size(), phis.size()), As(r0.size(), slots.size());
        for (size_t i = 0; i < phis.size(); ++i) Ap.col(i) = column(phis[i]);
        for (size_t i = 0; i < slots.size(); ++i) As.col(i) = column(slots[i]);
        auto [x, s] = least_norm(Ap, As, r0, "degree " + std::to_string(D));
        for (size_t i = 0; i < phis.size(); ++i)
            if (std::abs(x(i)) > 0) store(phis[i].kind)[phis[i].k].add_term(phis[i].n, Coeff(x(i)));
        for (size_t i = 0; i < slots.size(); ++i)
            if (std::abs(s(i)) > 0) store(slots[i].kind)[slots[i].k].add_term(slots[i].n, Coeff(s(i)));
    }

    SeriesMap Phi = build_phi();
    SeriesMap Ft(d);
    for (int k = 0; k < b.r; ++k) Ft[k] = Series::monomial(d, N, kRaw, unit_index(d, b.sigma[k]), alpha[k]);
    for (int k = 0; k < b.e; ++k) Ft[b.v0() + k] = v_form[k] + rho[k];
    for (int k = 0; k < b.p; ++k)
        Ft[b.y0() + k] = Series::monomial(d, N, kRaw, y_mono[k], beta[k]) * plus_one(g[k].with_trunc(N));

    // The z block is linear in its unknowns once Phi is known on (x, y), so
    // all degrees are solved together.
    if (z0 < d) {
        SeriesMap Fz(d - z0, Series(d, N, kRaw));
        if (affine) {
            AffineData a = affine_data(GermMap{f, f0.critical_count}, b);
            MultiIndex lz = a.monomial;
            lz[a.z] += 1;
            Fz[0].add_term(lz, a.nu);
        }
        std::vector<std::pair<bool, MultiIndex>> unknowns;  // (is phi, monomial)
        for (int i = 1; i < tab->size(); ++i) {
            const MultiIndex& n = tab->exps(i);
            if (!affine) unknowns.push_back({false, n});
            else if (n[z0] == 0) unknowns.push_back({false, n});
            else if (n != unit_index(d, z0)) unknowns.push_back({true, n});
        }
        auto residual = [&] {
            const int size = tab->size();
            Vec out = Vec::Zero(static_cast<long>(d - z0) * size);
            for (int c = z0; c < d; ++c) {
                Series e = compose(Phi[c], f) - compose(Fz[c - z0], Phi);
                for (const auto& [r, v] : e.terms()) out((c - z0) * size + r) = v.to_complex();
            }
            return out;
        };
        Vec r0 = residual();
        std::vector<Unknown> phis, slots;
        for (int c = z0; c < d; ++c)
            for (const auto& [is_phi, n] : unknowns) (is_phi ? phis : slots).push_back({is_phi ? PhiV : Rho, c, n});
        auto column = [&](const Unknown& u) {
            Series& st = u.kind == PhiV ? Phi[u.k] : Fz[u.k - z0];
            Series saved = st;
            st.add_term(u.n, one);
            Vec col = residual() - r0;
            st = saved;
            return col;
        };
        Mat Ap(r0.size(), phis.size()), As(r0.size(), slots.size());
        for (size_t i = 0; i < phis.size(); ++i) Ap.col(i) = column(phis[i]);
        for (size_t i = 0; i < slots.size(); ++i) As.col(i) = column(slots[i]);
        auto [x, s] = least_norm(Ap, As, r0, "z block");
        for (size_t i = 0; i < phis.size(); ++i)
            if (std::abs(x(i)) > 0) Phi[phis[i].k].add_term(phis[i].n, Coeff(x(i)));
        for (size_t i = 0; i < slots.size(); ++i)
            if (std::abs(s(i)) > 0) Fz[slots[i].k - z0].add_term(slots[i].n, Coeff(s(i)));
        for (int c = z0; c < d; ++c) Ft[c] = Fz[c - z0];
    }

    const Ring ring{Mode::Float, tol.coeff};
    auto prune = [&](SeriesMap m) {
        for (auto& s : m) s = Series::from_ranked(d, N, ring, s.terms());
        return m;
    };
    SeriesMap perm;
    for (int i = 0; i < d; ++i) perm.push_back(Series::variable(d, N, ring, b0.perm[i]));

    OracleResult out;
    out.cert.phi = prune(compose(Phi, compose(prune(js.phi), perm)));
    out.cert.normalized.comps = prune(Ft);
    out.cert.normalized.critical_count = f0.critical_count;
    out.cert.blocks = b;
    out.cert.residual = verify_conjugacy(f0, out.cert.normalized, out.cert.phi);
    out.cert.passes_applied.push_back("oracle");
    out.support = normal_form_support(out.cert.normalized, b, 1e-7);
    return out;
}

}  // namespace rigidnf
