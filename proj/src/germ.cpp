#include "rigidnf/germ.hpp"

#include "rigidnf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rigidnf {

Series jacobian_det(const GermMap& f) {
    int d = f.dim();
    if (d == 0) fail(ErrorKind::Domain, "jacobian_det: empty germ");
    std::vector<std::vector<Series>> J(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) J[i].push_back(partial_derivative(f.comps[i], j));
    // Expansion along rows with memoized column subsets.
    int full = (1 << d) - 1;
    std::vector<Series> minor(1 << d);
    int N = J[0][0].trunc();
    minor[0] = Series::constant(d, N, f.ring(), Coeff::one(f.mode()));
    std::vector<char> have(1 << d, 0);
    have[0] = 1;
    for (int mask = 1; mask <= full; ++mask) {
        int row = __builtin_popcount(mask) - 1;
        Series acc(d, N, f.ring());
        for (int j = 0; j < d; ++j) {
            if (!(mask & (1 << j))) continue;
            // Sign from the position of column j among the chosen columns.
            int below = __builtin_popcount(mask & ((1 << j) - 1));
            Series t = J[row][j] * minor[mask & ~(1 << j)];
            acc = (row - below) % 2 ? acc - t : acc + t;
        }
        minor[mask] = acc;
    }
    return minor[full];
}

MonomialUnit monomial_unit_factor(const Series& s) {
    if (s.is_zero()) fail(ErrorKind::Domain, "monomial_unit_factor: zero series");
    int d = s.dim();
    MultiIndex m(d, std::numeric_limits<int>::max());
    for (const auto& t : s.terms())
        for (int v = 0; v < d; ++v) m[v] = std::min(m[v], s.exps(t.first)[v]);
    int dm = total_degree(m);
    std::vector<std::pair<MultiIndex, Coeff>> q;
    for (const auto& [r, c] : s.terms()) {
        MultiIndex e = s.exps(r);
        for (int v = 0; v < d; ++v) e[v] -= m[v];
        q.emplace_back(std::move(e), c);
    }
    Series u = Series::from_terms(d, s.trunc() - dm, s.ring(), q);
    if (u.constant_term().is_zero(s.ring().tol)) fail(ErrorKind::NotRigid, "quotient by the common monomial has zero constant term");
    return {m, u};
}

RigidityCertificate rigidity_check(const GermMap& f) {
    int d = f.dim(), q = f.critical_count;
    if (q < 0 || q > d) fail(ErrorKind::Domain, "critical_count out of range");
    for (const auto& c : f.comps)
        if (!c.constant_term().is_zero(f.ring().tol)) fail(ErrorKind::Domain, "germ does not fix the origin");
    RigidityCertificate cert;
    Series det = jacobian_det(f);
    if (det.is_zero()) fail(ErrorKind::NotRigid, "det df vanishes to the truncation degree");
    MonomialUnit ju;
    try {
        ju = monomial_unit_factor(det);
    } catch (const Error&) {
        fail(ErrorKind::NotRigid, "det df = " + det.str({}) + " is not a monomial times a unit: the critical set is not a union of coordinate hyperplanes");
    }
    for (int v = q; v < d; ++v)
        if (ju.monomial[v] > 0)
            fail(ErrorKind::NotRigid, "det df vanishes on the non-critical hyperplane of coordinate " + std::to_string(v + 1) + " (critical_count too small?)");
    cert.jacobian_monomial = ju.monomial;
    cert.jacobian_unit_constant = ju.unit.constant_term();
    cert.pullback = QMatrix(q, q);
    for (int k = 0; k < q; ++k) {
        if (f.comps[k].is_zero()) fail(ErrorKind::NotRigid, "critical component " + std::to_string(k + 1) + " vanishes identically");
        MonomialUnit cu;
        try {
            cu = monomial_unit_factor(f.comps[k]);
        } catch (const Error&) {
            fail(ErrorKind::NotRigid, "critical component " + std::to_string(k + 1) + " is not a monomial times a unit");
        }
        for (int v = q; v < d; ++v)
            if (cu.monomial[v] > 0)
                fail(ErrorKind::NotRigid, "critical component " + std::to_string(k + 1) + " has a monomial factor in a non-critical variable");
        for (int l = 0; l < q; ++l) cert.pullback(l, k) = cu.monomial[l];
        cert.component_monomials.push_back(cu.monomial);
        cert.component_unit_constants.push_back(cu.unit.constant_term());
    }
    cert.verified_to_degree = f.trunc() - 1;
    return cert;
}

ExponentMatrix pullback_matrix(const GermMap& f, int q) {
    QMatrix A(q, q);
    for (int k = 0; k < q; ++k) {
        auto cu = monomial_unit_factor(f.comps[k]);
        for (int l = 0; l < q; ++l) A(l, k) = cu.monomial[l];
    }
    return A;
}

BlockStructure detect_blocks(const GermMap& f, const RigidityCertificate& cert) {
    int d = f.dim(), q = f.critical_count;
    const QMatrix& A = cert.pullback;
    if (A.rows() != q) fail(ErrorKind::Domain, "certificate does not match critical_count");
    std::vector<char> periodic(q, 0);
    QMatrix pw = QMatrix::identity(q);
    for (int n = 1; n <= q; ++n) {
        pw = pw * A;
        for (int k = 0; k < q; ++k) {
            bool unit = true;
            for (int l = 0; l < q && unit; ++l) unit = pw(l, k) == (l == k ? 1 : 0);
            if (unit) periodic[k] = 1;
        }
    }
    std::vector<int> sigma_orig(q, -1);
    for (int k = 0; k < q; ++k) {
        if (!periodic[k]) continue;
        for (int l = 0; l < q; ++l)
            if (A(l, k) != 0) {
                if (A(l, k) != 1 || sigma_orig[k] != -1 || !periodic[l])
                    fail(ErrorKind::Domain, "periodic component with a non-permutation pullback");
                sigma_orig[k] = l;
            }
    }
    BlockStructure b;
    b.dim = d;
    b.q = q;
    std::vector<char> seen(q, 0);
    std::vector<int> order;
    for (int k = 0; k < q; ++k) {
        if (!periodic[k] || seen[k]) continue;
        std::vector<int> cyc;
        for (int c = k; !seen[c]; c = sigma_orig[c]) {
            seen[c] = 1;
            cyc.push_back(c);
        }
        b.cycles.push_back(cyc);
        order.insert(order.end(), cyc.begin(), cyc.end());
    }
    b.r = static_cast<int>(order.size());
    for (int k = 0; k < q; ++k)
        if (!periodic[k]) order.push_back(k);
    b.p = q - b.r;
    for (int k = q; k < d; ++k) order.push_back(k);
    b.perm = order;
    std::vector<int> crit(order.begin(), order.begin() + q);
    b.A = A.permuted(crit, crit);
    b.B = b.A.block(0, 0, b.r, b.r);
    b.C = b.A.block(0, b.r, b.r, b.p);
    b.D = b.A.block(b.r, b.r, b.p, b.p);
    if (!b.A.block(b.r, 0, b.p, b.r).is_zero()) fail(ErrorKind::Domain, "internal action is not block triangular after ordering");
    if (b.r > 0 && !b.B.is_permutation()) fail(ErrorKind::Domain, "periodic block is not a permutation");
    if (b.p > 0 && sgn(b.D.det()) == 0)
        fail(ErrorKind::NonInjective,
             "internal action is not injective: det D = 0 on the non-periodic block; this case needs resonances of another form and is not handled");
    // Cycles in prepared indices; sigma in prepared indices.
    std::vector<int> pos(d);
    for (int i = 0; i < d; ++i) pos[order[i]] = i;
    b.sigma.assign(b.r, -1);
    for (int k = 0; k < b.r; ++k) b.sigma[k] = pos[sigma_orig[order[k]]];
    for (auto& cyc : b.cycles)
        for (auto& c : cyc) c = pos[c];
    b.eta = 1;
    for (const auto& cyc : b.cycles) b.eta = std::lcm(b.eta, static_cast<int>(cyc.size()));
    for (int k = 0; k < b.r; ++k) b.alpha.push_back(cert.component_unit_constants[order[k]]);
    for (int k = b.r; k < q; ++k) b.beta.push_back(cert.component_unit_constants[order[k]]);
    return b;
}

GermMap apply_prepared_order(const GermMap& f, const BlockStructure& blocks) {
    int d = f.dim();
    std::vector<int> pos(d);
    for (int i = 0; i < d; ++i) pos[blocks.perm[i]] = i;
    SeriesMap inner;
    for (int v = 0; v < d; ++v) inner.push_back(Series::variable(d, f.trunc(), f.ring(), pos[v]));
    GermMap g;
    g.critical_count = f.critical_count;
    for (int i = 0; i < d; ++i) g.comps.push_back(compose(f.comps[blocks.perm[i]], inner));
    return g;
}

ContractionInfo is_contracting(const GermMap& f, double tol_eig) {
    ContractionInfo info;
    info.eigenvalues = eigenvalues(linear_part(f.comps));
    for (auto z : info.eigenvalues) {
        double m = std::abs(z);
        // A modulus equal to 1 up to rounding is a clear verdict (not contracting);
        // one that is merely close is undecidable at this tolerance.
        double gap = std::fabs(m - 1.0);
        if (gap > 64 * std::numeric_limits<double>::epsilon() && gap <= tol_eig)
            fail(ErrorKind::NotContracting, "eigenvalue of modulus within tolerance of 1: contraction is undecidable");
        info.radius = std::max(info.radius, m);
    }
    info.contracting = info.radius < 1.0;
    return info;
}

namespace {

struct Cluster {
    std::complex<double> center;
    int count = 0;
};

// Compares eigenvalues by decreasing modulus, then increasing argument.
bool eig_before(std::complex<double> a, std::complex<double> b, double tol) {
    double ma = std::abs(a), mb = std::abs(b);
    if (std::fabs(ma - mb) > tol * std::max(1.0, ma)) return ma > mb;
    auto arg = [tol](std::complex<double> z) {
        if (std::fabs(z.imag()) <= tol * std::max(1.0, std::abs(z))) return z.real() >= 0 ? 0.0 : M_PI;
        return std::arg(z);
    };
    return arg(a) < arg(b) - tol;
}

Coeff exact_guess(std::complex<double> z) {
    return Coeff::complex(rationalize(z.real(), 1000000), rationalize(z.imag(), 1000000), Mode::Exact);
}

}  // namespace

JordanBasis jordan_basis(const CMatrix& M, double tol_eig) {
    int n = M.rows();
    JordanBasis jb;
    Mode mode = n ? M(0, 0).mode() : Mode::Float;
    jb.basis = CMatrix(n, 0, mode);
    if (n == 0) {
        jb.jordan = CMatrix(0, 0, mode);
        return jb;
    }
    auto ev = eigenvalues(M);
    // Defective clusters spread like tol^(1/k); cluster generously and let the
    // rank computations decide the structure.
    double radius = std::max(std::sqrt(tol_eig), 1e-6) * std::max(1.0, M.max_abs());
    std::vector<Cluster> clusters;
    for (auto z : ev) {
        bool placed = false;
        for (auto& c : clusters)
            if (std::abs(c.center - z) <= radius) {
                c.center = (c.center * static_cast<double>(c.count) + z) / static_cast<double>(c.count + 1);
                c.count++;
                placed = true;
                break;
            }
        if (!placed) clusters.push_back({z, 1});
    }
    // Snap tiny values to zero so the split into v and z is exact.
    for (auto& c : clusters)
        if (std::abs(c.center) <= radius) c.center = 0;
    std::stable_sort(clusters.begin(), clusters.end(), [&](const Cluster& a, const Cluster& b) {
        bool az = a.center == 0.0, bz = b.center == 0.0;
        if (az != bz) return bz;
        return eig_before(a.center, b.center, tol_eig);
    });
    double rank_tol = mode == Mode::Exact ? 0.0 : tol_eig;
    std::vector<std::vector<Coeff>> cols;
    for (const auto& cl : clusters) {
        Coeff lam = mode == Mode::Exact ? exact_guess(cl.center) : Coeff(cl.center);
        if (cl.center == 0.0) lam = Coeff::zero(mode);
        CMatrix Nm = M - CMatrix::identity(n, mode).scaled(lam);
        // Kernel dimensions of powers of N.
        std::vector<int> dims{0};
        std::vector<CMatrix> pows{CMatrix::identity(n, mode)};
        while (true) {
            pows.push_back(pows.back() * Nm);
            int k = n - rank(pows.back(), rank_tol);
            if (k == dims.back() || static_cast<int>(dims.size()) > n) break;
            dims.push_back(k);
        }
        int alg = dims.back();
        if (alg != cl.count) {
            if (mode == Mode::Exact)
                fail(ErrorKind::Solver, "exact mode needs Gaussian-rational eigenvalues on the non-critical block; eigenvalue near " +
                                            lam.str() + " could not be verified");
            jb.defective = true;
        }
        if (dims.size() > 2 || dims[1] < alg) jb.defective = jb.defective || mode == Mode::Float;
        int kmax = static_cast<int>(dims.size()) - 1;
        // chains[c] = vectors from top (level len) down to the eigenvector.
        std::vector<std::vector<std::vector<Coeff>>> chains;
        for (int level = kmax; level >= 1; --level) {
            auto cand = nullspace(pows[level], rank_tol);
            std::vector<std::vector<Coeff>> span = nullspace(pows[level - 1], rank_tol);
            for (const auto& ch : chains) span.push_back(ch[ch.size() - level]);
            auto rank_of = [&](const std::vector<std::vector<Coeff>>& vs) {
                if (vs.empty()) return 0;
                CMatrix m(static_cast<int>(vs.size()), n, mode);
                for (size_t i = 0; i < vs.size(); ++i)
                    for (int j = 0; j < n; ++j) m(static_cast<int>(i), j) = vs[i][j];
                return rank(m, rank_tol);
            };
            int base = rank_of(span);
            for (const auto& v : cand) {
                auto trial = span;
                trial.push_back(v);
                int rk = rank_of(trial);
                if (rk <= base) continue;
                span = trial;
                base = rk;
                std::vector<std::vector<Coeff>> chain{v};
                for (int l = 1; l < level; ++l) {
                    std::vector<Coeff> w(n, Coeff::zero(mode));
                    const auto& prev = chain.back();
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) w[i] += Nm(i, j) * prev[j];
                    chain.push_back(w);
                }
                chains.push_back(chain);
            }
        }
        for (const auto& ch : chains) {
            jb.block_sizes.push_back(static_cast<int>(ch.size()));
            for (const auto& v : ch) {
                cols.push_back(v);
                jb.eigen.push_back(lam);
            }
        }
    }
    if (static_cast<int>(cols.size()) != n) fail(ErrorKind::Solver, "could not assemble a Jordan basis (eigenvalue clustering failed)");
    jb.basis = CMatrix(n, n, mode);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) jb.basis(i, j) = cols[j][i];
    auto inv = inverse(jb.basis, rank_tol);
    if (!inv) fail(ErrorKind::Solver, "Jordan basis is singular");
    jb.jordan = *inv * M * jb.basis;
    return jb;
}

JordanResult jordan_split(const GermMap& f, const BlockStructure& blocks, double tol_eig) {
    int d = f.dim(), t0 = blocks.t0(), nt = d - t0;
    JordanResult res;
    res.blocks = blocks;
    Ring ring = f.ring();
    CMatrix L = linear_part(f.comps);
    CMatrix M = L.block(t0, t0, nt, nt);
    JordanBasis jb = jordan_basis(M, tol_eig);
    if (jb.defective)
        res.warnings.push_back("defective eigenvalue cluster on the non-critical block: the Jordan basis is ill-conditioned in float mode; supply coordinates with the similarity applied for reliable results");
    int e = 0;
    while (e < nt && !jb.eigen[e].is_zero(0)) ++e;
    auto Sinv = inverse(jb.basis, ring.mode == Mode::Exact ? 0.0 : tol_eig);
    int r = blocks.r, p = blocks.p;
    // New order (u, v, y, z); old order (u, y, t).
    CMatrix Phi(d, d, ring.mode), PhiInv(d, d, ring.mode);
    for (int i = 0; i < r; ++i) Phi(i, i) = PhiInv(i, i) = Coeff::one(ring.mode);
    for (int i = 0; i < p; ++i) {
        Phi(r + e + i, r + i) = Coeff::one(ring.mode);
        PhiInv(r + i, r + e + i) = Coeff::one(ring.mode);
    }
    auto new_t_index = [&](int k) { return k < e ? r + k : r + e + p + (k - e); };
    for (int k = 0; k < nt; ++k)
        for (int j = 0; j < nt; ++j) {
            Phi(new_t_index(k), t0 + j) = (*Sinv)(k, j);
            PhiInv(t0 + j, new_t_index(k)) = jb.basis(j, k);
        }
    res.phi = linear_map(Phi, f.trunc(), ring);
    SeriesMap phi_inv = linear_map(PhiInv, f.trunc(), ring);
    res.germ.critical_count = f.critical_count;
    res.germ.comps = compose(res.phi, compose(f.comps, phi_inv));
    res.blocks.split = true;
    res.blocks.e = e;
    res.blocks.s = r + e;
    res.blocks.mu.assign(jb.eigen.begin(), jb.eigen.begin() + e);
    res.blocks.jordan = jb.jordan.block(0, 0, e, e);
    // The permutation into (u, v, y, z) in terms of input coordinates.
    std::vector<int> perm(d);
    for (int i = 0; i < r; ++i) perm[i] = blocks.perm[i];
    for (int i = 0; i < p; ++i) perm[r + e + i] = blocks.perm[r + i];
    // t coordinates become linear combinations; keep their input indices in order.
    for (int k = 0; k < nt; ++k) perm[new_t_index(k)] = blocks.perm[t0 + k];
    res.blocks.perm = perm;
    return res;
}

}  // namespace rigidnf
