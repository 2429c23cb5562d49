#include "rigidnf/normalizer.hpp"

#include "rigidnf/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rigidnf {

const char* pass_name(PassKind k) {
    switch (k) {
        case PassKind::Linear: return "linear";
        case PassKind::Jordan: return "jordan";
        case PassKind::Primary: return "primary";
        case PassKind::Secondary: return "secondary";
        case PassKind::Affine: return "affine";
    }
    return "?";
}

std::optional<PassKind> parse_pass(const std::string& name) {
    for (PassKind k : {PassKind::Linear, PassKind::Jordan, PassKind::Primary, PassKind::Secondary, PassKind::Affine})
        if (name == pass_name(k)) return k;
    if (name == "all") return PassKind::Affine;
    return std::nullopt;
}

namespace {

// Float arithmetic without the coefficient zero-test. Tail sums and residual
// checks use it: a pruned small term can come back multiplied by mu^{-n},
// D^{-n} or a large coefficient of phi.
Series unpruned(const Series& s) {
    return Series::from_ranked(s.dim(), s.trunc(), Ring{s.mode(), 0.0}, s.terms());
}
SeriesMap unpruned(const SeriesMap& f) {
    SeriesMap out;
    for (const auto& s : f) out.push_back(unpruned(s));
    return out;
}
Series pruned(const Series& s, const Ring& ring) { return Series::from_ranked(s.dim(), s.trunc(), ring, s.terms()); }

}  // namespace

double verify_conjugacy(const GermMap& f, const GermMap& f_tilde, const SeriesMap& phi) {
    if (f.dim() != f_tilde.dim() || static_cast<int>(phi.size()) != f.dim())
        fail(ErrorKind::Domain, "verify_conjugacy: dimensions disagree");
    SeriesMap p = unpruned(phi);
    return max_abs_diff(compose(p, unpruned(f.comps)), compose(unpruned(f_tilde.comps), p));
}

namespace {

Coeff one(Mode m) { return Coeff::one(m); }

Series plus_one(const Series& s) { return s + Coeff::one(s.mode()); }

Series var(int d, int N, Ring ring, int i) { return Series::variable(d, N, ring, i); }

SeriesMap conjugate(const SeriesMap& f, const SeriesMap& phi) { return compose(compose(phi, f), invert_diffeo(phi)); }

/// f_tilde with the given components forced and the rest transported by phi.
GermMap transport(const GermMap& f, const SeriesMap& phi, const std::vector<std::optional<Series>>& forced) {
    SeriesMap inv = invert_diffeo(phi);
    GermMap out;
    out.critical_count = f.critical_count;
    for (int c = 0; c < f.dim(); ++c) out.comps.push_back(forced[c] ? *forced[c] : compose(f.comps[c], inv));
    return out;
}

ConjugacyCertificate finish(const GermMap& f, const BlockStructure& b, SeriesMap phi, GermMap normalized, StageInfo info) {
    ConjugacyCertificate cert;
    cert.phi = std::move(phi);
    cert.normalized = std::move(normalized);
    cert.residual = verify_conjugacy(f, cert.normalized, cert.phi);
    info.residual = cert.residual;
    cert.blocks = b;
    if (info.applied) cert.passes_applied.push_back(info.name);
    cert.stages.push_back(std::move(info));
    return cert;
}

ConjugacyCertificate identity(const GermMap& f, const BlockStructure& b, const std::string& name) {
    StageInfo info;
    info.name = name;
    return finish(f, b, identity_map(f.dim(), f.trunc(), f.ring()), f, std::move(info));
}

[[noreturn]] void diverged(const std::string& what, long iters, double inc) {
    fail(ErrorKind::Solver, what + " did not converge within " + std::to_string(iters) + " iterations (last increment " +
                                Coeff(inc).str() + ")");
}

bool only_x(const MultiIndex& n, int x_dim) {
    for (size_t i = x_dim; i < n.size(); ++i)
        if (n[i]) return false;
    return true;
}

MultiIndex head(const MultiIndex& n, int len) { return MultiIndex(n.begin(), n.begin() + len); }

}  // namespace

// ---------------------------------------------------------------- linear

ConjugacyCertificate pass_linear(const GermMap& f, const BlockStructure& b, const Tolerances& tol) {
    const int d = f.dim(), N = f.trunc(), r = b.r;
    const Ring ring = f.ring();
    const Mode mode = ring.mode;
    if (r == 0) return identity(f, b, "linear");

    std::vector<Series> theta(r);
    std::vector<Coeff> alpha(r);
    for (int k = 0; k < r; ++k) {
        auto mu = monomial_unit_factor(f.comps[k]);
        if (mu.monomial != unit_index(d, b.sigma[k]))
            fail(ErrorKind::Domain, "linear pass: u-component " + std::to_string(k + 1) + " is not a constant times u_" +
                                        std::to_string(b.sigma[k] + 1) + " times a unit");
        alpha[k] = mu.unit.constant_term();
        theta[k] = mu.unit.scaled(one(mode) / alpha[k]) - Series::constant(d, mu.unit.trunc(), ring, one(mode));
    }

    StageInfo info;
    info.name = "linear";
    SeriesMap phi(r, Series(d, N - 1, ring));
    // (1 + theta_k)(1 + phi_k o f) = 1 + phi_{sigma(k)}
    auto image = [&](const SeriesMap& cur) {
        SeriesMap next(r);
        for (int k = 0; k < r; ++k)
            next[b.sigma[k]] = plus_one(theta[k]) * plus_one(compose(cur[k], f.comps)) - Series::constant(d, N - 1, ring, one(mode));
        return next;
    };
    if (mode == Mode::Exact) {
        EngineProblem p;
        p.stage = "linear pass";
        p.dim = d;
        p.ncomp = r;
        p.trunc = N - 1;
        p.max_degree = N - 1;
        p.ring = ring;
        p.lin = linear_part(f.comps);
        p.c_lin = one(mode);
        p.mix = CMatrix(r, r, mode);
        for (int k = 0; k < r; ++k) p.mix(k, b.sigma[k]) -= one(mode);
        p.residual = [&](const SeriesMap& cur, const SeriesMap&) {
            // Row k carries phi_k o f, as the engine's linear model expects.
            SeriesMap img = image(cur), rows(r);
            for (int k = 0; k < r; ++k) rows[k] = img[b.sigma[k]] - cur[b.sigma[k]];
            return rows;
        };
        auto sol = solve_by_degree(p);
        phi = sol.phi;
        info.engine_degree = N - 1;
        info.key_order = std::move(sol.order);
    } else {
        long it = 0;
        double inc = 0;
        for (;;) {
            SeriesMap next = image(phi);
            inc = max_abs_diff(next, phi);
            phi = std::move(next);
            ++it;
            if (inc < tol.series) break;
            if (it >= tol.max_iter) diverged("linear pass product", it, inc);
        }
        info.tail_iterations = it;
        info.tail_increment = inc;
    }
    for (const auto& s : phi) info.applied = info.applied || !s.is_zero();

    SeriesMap Phi = identity_map(d, N, ring);
    std::vector<std::optional<Series>> forced(d);
    for (int k = 0; k < r; ++k) {
        Phi[k] = var(d, N, ring, k) * plus_one(phi[k].with_trunc(N));
        forced[k] = Series::monomial(d, N, ring, unit_index(d, b.sigma[k]), alpha[k]);
        info.applied = info.applied || !(f.comps[k] - *forced[k]).is_zero();
    }
    return finish(f, b, Phi, transport(f, Phi, forced), std::move(info));
}

// ---------------------------------------------------------------- primary

namespace {

ConjugacyCertificate primary_impl(const GermMap& f, const BlockStructure& b, const ResonanceReport& res,
                                  const Tolerances& tol, bool formal_only) {
    if (!b.split) fail(ErrorKind::Domain, "primary pass needs the v/z split");
    const int d = f.dim(), N = f.trunc(), e = b.e, v0 = b.v0(), xd = b.x_dim();
    const Ring ring = f.ring();
    const Mode mode = ring.mode;
    if (e == 0) return identity(f, b, "primary");

    // Linear v-block, cleaned to its lower triangle.
    CMatrix L = linear_part(f.comps);
    CMatrix Lv(e, e, mode);
    for (int k = 0; k < e; ++k)
        for (int j = 0; j <= k; ++j) {
            const Coeff& c = L(v0 + k, v0 + j);
            if (!c.is_zero(mode == Mode::Exact ? 0.0 : tol.coeff)) Lv(k, j) = c;
        }
    for (int k = 0; k < e; ++k)
        for (int j = k + 1; j < e; ++j)
            if (!L(v0 + k, v0 + j).is_zero(mode == Mode::Exact ? 0.0 : tol.coeff))
                fail(ErrorKind::Domain, "primary pass: the linear v-block is not lower triangular");
    std::vector<Series> rho_lin(e, Series(d, N, ring));
    for (int k = 0; k < e; ++k)
        for (int j = 0; j < k; ++j)
            if (!Lv(k, j).is_zero(0)) rho_lin[k].add_term(unit_index(d, v0 + j), Lv(k, j));

    auto Phi_of = [&](const SeriesMap& phi) {
        SeriesMap Phi = identity_map(d, N, ring);
        for (int k = 0; k < e; ++k) Phi[v0 + k] = phi[k];
        return Phi;
    };
    auto rho_of = [&](const SeriesMap& slots) {
        SeriesMap rho(e);
        for (int k = 0; k < e; ++k) rho[k] = slots[k] + rho_lin[k];
        return rho;
    };

    EngineProblem p;
    p.stage = "primary pass";
    p.dim = d;
    p.ncomp = e;
    p.trunc = N;
    p.ring = ring;
    p.rank_tol = tol.res;
    p.lin = L;
    p.c_lin = one(mode);
    p.mix = CMatrix(e, e, mode);
    for (int k = 0; k < e; ++k)
        for (int j = 0; j <= k; ++j) p.mix(k, j) = -Lv(k, j);
    p.fixed.resize(e);
    for (int k = 0; k < e; ++k) p.fixed[k].push_back({unit_index(d, v0 + k), one(mode)});
    p.slot_eligible = [&](int k, const MultiIndex& n) { return only_x(n, xd) && res.is_primary(k, head(n, xd)); };
    // phi o f - mu phi - rho~(u, phi)
    p.residual = [&](const SeriesMap& phi, const SeriesMap& slots) {
        SeriesMap Phi = Phi_of(phi);
        SeriesMap rho = rho_of(slots);
        SeriesMap out(e);
        for (int k = 0; k < e; ++k)
            out[k] = compose(phi[k], f.comps) - phi[k].scaled(Lv(k, k)) - compose(rho[k], Phi);
        return out;
    };
    int W = mode == Mode::Exact || formal_only ? N : std::min(N, std::max(res.degree_bound, 1));
    p.max_degree = W;
    auto sol = solve_by_degree(p);

    StageInfo info;
    info.name = "primary";
    info.engine_degree = W;
    info.key_order = std::move(sol.order);
    SeriesMap rho = rho_of(sol.slots);
    std::vector<Series> target(e);
    for (int k = 0; k < e; ++k)
        target[k] = Series::monomial(d, N, ring, unit_index(d, v0 + k), Lv(k, k)) + rho[k];
    SeriesMap Phi = Phi_of(sol.phi);

    if (W < N) {
        // phi^k = sum_{n >= 1} (mu^k)^{-n} R^k o f^{n-1}, one coordinate at a time.
        // Iterate on the scaled terms and skip pruning throughout; small
        // terms come back multiplied by mu^{-n}.
        Phi = unpruned(Phi);
        SeriesMap f1 = conjugate(unpruned(f.comps), Phi);
        for (int k = 0; k < e; ++k) {
            Series R = (f1[v0 + k] - unpruned(target[k])).above(W);
            Coeff inv = one(mode) / Lv(k, k);
            const SeriesMap& f1u = f1;
            Series sum(d, N, Ring{mode, 0.0}), term = R.scaled(inv);
            long it = 0;
            double inc = 0;
            while (!term.is_zero()) {
                sum = sum + term;
                inc = term.max_abs();
                ++it;
                if (inc < tol.series) break;
                if (it >= tol.max_iter) diverged("primary tail for coordinate " + std::to_string(k + 1), it, inc);
                term = compose(term, f1u).scaled(inv);
            }
            info.tail_iterations += it;
            info.tail_increment = std::max(info.tail_increment, inc);
            if (sum.is_zero()) continue;
            SeriesMap Psi = unpruned(identity_map(d, N, ring));
            Psi[v0 + k] = Psi[v0 + k] + sum;
            Phi = compose(Psi, Phi);
            f1 = conjugate(f1, Psi);
            f1[v0 + k] = unpruned(target[k]);
        }
        for (auto& s : Phi) s = pruned(s, ring);
    }

    std::vector<std::optional<Series>> forced(d);
    for (int k = 0; k < e; ++k) forced[v0 + k] = target[k];
    for (int k = 0; k < e; ++k) info.applied = info.applied || !(f.comps[v0 + k] - target[k]).is_zero();
    for (int k = 0; k < e; ++k)
        info.applied = info.applied || !(Phi[v0 + k] - var(d, N, ring, v0 + k)).is_zero();
    return finish(f, b, Phi, transport(f, Phi, forced), std::move(info));
}

// ---------------------------------------------------------------- secondary

ConjugacyCertificate secondary_impl(const GermMap& f, const BlockStructure& b, const ResonanceReport& res,
                                    const Tolerances& tol, bool formal_only) {
    if (!b.split) fail(ErrorKind::Domain, "secondary pass needs the v/z split");
    const int d = f.dim(), N = f.trunc(), p = b.p, y0 = b.y0(), xd = b.x_dim();
    const Ring ring = f.ring();
    const Mode mode = ring.mode;
    if (p == 0) return identity(f, b, "secondary");

    std::vector<MultiIndex> mono(p);
    std::vector<Coeff> beta(p);
    SeriesMap G(p);
    QMatrix D(p, p);
    for (int k = 0; k < p; ++k) {
        auto mu = monomial_unit_factor(f.comps[y0 + k]);
        for (int v = b.v0(); v < b.v0() + b.e; ++v)
            if (mu.monomial[v]) fail(ErrorKind::Domain, "secondary pass: y-component monomial involves a non-critical coordinate");
        for (int v = b.z0(); v < d; ++v)
            if (mu.monomial[v]) fail(ErrorKind::Domain, "secondary pass: y-component monomial involves a non-critical coordinate");
        mono[k] = mu.monomial;
        beta[k] = mu.unit.constant_term();
        // Degrees the unit does not know are claimed zero; multiplied by the
        // monomial they land past N.
        G[k] = (mu.unit.scaled(one(mode) / beta[k]) - Series::constant(d, mu.unit.trunc(), ring, one(mode))).with_trunc(N - 1);
        for (int j = 0; j < p; ++j) D(j, k) = mu.monomial[y0 + j];
    }
    if (D.det() == 0) fail(ErrorKind::NonInjective, "secondary pass: det D = 0");

    auto Phi_of = [&](const SeriesMap& phi) {
        SeriesMap Phi = identity_map(d, N, ring);
        for (int k = 0; k < p; ++k) Phi[y0 + k] = var(d, N, ring, y0 + k) * plus_one(phi[k].with_trunc(N));
        return Phi;
    };

    EngineProblem P;
    P.stage = "secondary pass";
    P.dim = d;
    P.ncomp = p;
    P.trunc = N - 1;
    P.ring = ring;
    P.rank_tol = tol.res;
    P.lin = linear_part(f.comps);
    P.c_lin = one(mode);
    P.mix = CMatrix(p, p, mode);
    for (int k = 0; k < p; ++k)
        for (int j = 0; j < p; ++j) P.mix(k, j) = Coeff::rational(-D(j, k), mode);
    P.slot_eligible = [&](int, const MultiIndex& n) { return only_x(n, xd) && res.is_secondary(head(n, xd)); };
    // (1 + g)(1 + phi o f) - prod_j (1 + phi_j)^{D_jk} (1 + g~)
    P.residual = [&](const SeriesMap& phi, const SeriesMap& slots) {
        SeriesMap out(p);
        for (int k = 0; k < p; ++k) {
            Series lhs = plus_one(G[k]) * plus_one(compose(phi[k], f.comps));
            Series rhs = plus_one(slots[k]);
            for (int j = 0; j < p; ++j)
                if (long ex = D.int_at(j, k)) rhs = rhs * power(plus_one(phi[j]), ex);
            out[k] = lhs - rhs;
        }
        return out;
    };
    int W = N - 1;
    if (mode == Mode::Float && !formal_only) {
        W = std::max(res.degree_bound, 1);
        double Lam = nonzero_spectral_radius(b);
        CMatrix Dinv = CMatrix::from_q(*D.inverse(), Mode::Float);
        double norm = 0;
        for (int i = 0; i < p; ++i) {
            double row = 0;
            for (int j = 0; j < p; ++j) row += Dinv(i, j).abs();
            norm = std::max(norm, row);
        }
        while (W < N - 1 && std::pow(Lam, W + 1) * norm >= 1) ++W;
        W = std::min(W, N - 1);
    }
    P.max_degree = W;
    auto sol = solve_by_degree(P);

    StageInfo info;
    info.name = "secondary";
    info.engine_degree = W;
    info.key_order = std::move(sol.order);
    SeriesMap Phi = Phi_of(sol.phi);
    const SeriesMap& gt = sol.slots;

    if (W < N - 1) {
        // log(1 + phi) = sum_n log(1 + e o f^{n-1}) D^{-n}, e = (1 + G)/(1 + g~) - 1.
        SeriesMap f1 = conjugate(f.comps, Phi);
        SeriesMap E(p);
        for (int k = 0; k < p; ++k) {
            auto mu = monomial_unit_factor(f1[y0 + k]);
            if (mu.monomial != mono[k]) fail(ErrorKind::Solver, "secondary pass: the y-monomial changed under the formal stage");
            Series G1 = mu.unit.scaled(one(mode) / beta[k]).with_trunc(N - 1);
            E[k] = (G1 * unit_inverse(plus_one(gt[k])) - Series::constant(d, N - 1, ring, one(mode))).above(W);
        }
        // log commutes with composition, so the n-th term is T_n = (T_{n-1} o f) D^{-1}
        // with T_1 = log(1 + e) D^{-1}.
        CMatrix Dinv = CMatrix::from_q(*D.inverse(), mode);
        auto times_dinv = [&](const SeriesMap& v) {
            SeriesMap out(p, Series(d, N - 1, Ring{mode, 0.0}));
            for (int k = 0; k < p; ++k)
                for (int j = 0; j < p; ++j)
                    if (!Dinv(j, k).is_zero(0)) out[k] = out[k] + v[j].scaled(Dinv(j, k));
            return out;
        };
        SeriesMap logs(p);
        for (int j = 0; j < p; ++j) logs[j] = unpruned(unit_log(plus_one(E[j])));
        SeriesMap f1u = unpruned(f1);
        SeriesMap T = times_dinv(logs);
        SeriesMap logsum(p, Series(d, N - 1, Ring{mode, 0.0}));
        long it = 0;
        double inc = 0;
        for (;;) {
            inc = 0;
            for (int k = 0; k < p; ++k) {
                inc = std::max(inc, T[k].max_abs());
                logsum[k] = logsum[k] + T[k];
            }
            if (inc == 0) break;
            ++it;
            if (inc < tol.series) break;
            if (it >= tol.max_iter) diverged("secondary tail product", it, inc);
            T = times_dinv(compose(T, f1u));
        }
        info.tail_iterations = it;
        info.tail_increment = inc;
        SeriesMap Psi = identity_map(d, N, ring);
        bool moved = false;
        for (int k = 0; k < p; ++k) {
            Series ph = unit_exp(pruned(logsum[k], ring)) - Series::constant(d, N - 1, ring, one(mode));
            moved = moved || !ph.is_zero();
            Psi[y0 + k] = var(d, N, ring, y0 + k) * plus_one(ph.with_trunc(N));
        }
        if (moved) Phi = compose(Psi, Phi);
    }

    std::vector<std::optional<Series>> forced(d);
    for (int k = 0; k < p; ++k) {
        forced[y0 + k] = Series::monomial(d, N, ring, mono[k], beta[k]) * plus_one(gt[k].with_trunc(N));
        info.applied = info.applied || !(f.comps[y0 + k] - *forced[y0 + k]).is_zero();
        info.applied = info.applied || !(Phi[y0 + k] - var(d, N, ring, y0 + k)).is_zero();
    }
    return finish(f, b, Phi, transport(f, Phi, forced), std::move(info));
}

// A float tail sum can lose accuracy when phi has large coefficients, since
// every iteration composes with them again. The degree-by-degree solve up to
// the truncation has no such accumulation, so it is the fallback.
template <class Impl>
ConjugacyCertificate with_fallback(const GermMap& f, const Tolerances& tol, Impl&& impl) {
    ConjugacyCertificate cert = impl(false);
    if (f.mode() == Mode::Exact || cert.residual <= tol.residual) return cert;
    ConjugacyCertificate retry = impl(true);
    retry.warnings.push_back(cert.stages.back().name + " pass: tail residual " + Coeff(cert.residual).str() +
                             " exceeded the tolerance; solved degree by degree up to the truncation instead");
    return retry;
}

}  // namespace

ConjugacyCertificate pass_primary(const GermMap& f, const BlockStructure& b, const ResonanceReport& res,
                                  const Tolerances& tol) {
    return with_fallback(f, tol, [&](bool formal) { return primary_impl(f, b, res, tol, formal); });
}

ConjugacyCertificate pass_secondary(const GermMap& f, const BlockStructure& b, const ResonanceReport& res,
                                    const Tolerances& tol) {
    return with_fallback(f, tol, [&](bool formal) { return secondary_impl(f, b, res, tol, formal); });
}

// ---------------------------------------------------------------- affine

AffineData affine_data(const GermMap& f, const BlockStructure& b) {
    const int d = f.dim(), N = f.trunc();
    if (!b.split || d - b.s - b.p != 1)
        fail(ErrorKind::Domain, "affine pass needs exactly one zero-eigenvalue coordinate (s + p = d - 1)");
    const Ring ring = f.ring();
    const Mode mode = ring.mode;
    AffineData a;
    a.z = d - 1;
    const Series& h = f.comps[a.z];
    std::vector<std::pair<MultiIndex, Coeff>> omega_terms, q_terms;
    for (const auto& [r, c] : h.terms()) {
        MultiIndex n = h.exps(r);
        if (n[a.z] == 0) omega_terms.emplace_back(n, c);
        else {
            n[a.z] -= 1;
            q_terms.emplace_back(n, c);
        }
    }
    a.omega = Series::from_terms(d, N, ring, omega_terms);
    Series q = Series::from_terms(d, N - 1, ring, q_terms);
    if (q.is_zero()) fail(ErrorKind::Domain, "affine pass: the z-component does not depend on z");
    auto mu = monomial_unit_factor(q);
    for (int v = b.v0(); v < b.v0() + b.e; ++v)
        if (mu.monomial[v]) fail(ErrorKind::Domain, "affine pass: dh/dz is not a monomial in the critical coordinates times a unit");
    if (mu.monomial[a.z]) fail(ErrorKind::Domain, "affine pass: dh/dz is not a monomial in the critical coordinates times a unit");
    a.monomial = mu.monomial;
    a.nu = mu.unit.constant_term();
    a.eps = mu.unit.scaled(one(mode) / a.nu) - Series::constant(d, mu.unit.trunc(), ring, one(mode));
    a.eps = a.eps.with_trunc(N - 1);
    a.zeta = a.eps + partial_derivative(a.eps, a.z).with_trunc(N - 1) * var(d, N - 1, ring, a.z);
    return a;
}

Series affine_operator(const AffineData& a, const GermMap& f, const Series& psi) {
    int M = psi.trunc();
    Series first = plus_one(a.eps.with_trunc(M)) * compose(psi, f.comps);
    Series G = compose(partial_derivative(psi, a.z), f.comps).with_trunc(M);
    Series second = a.omega.with_trunc(M) * tau_integral(G * plus_one(a.zeta.with_trunc(M)), a.z);
    return first + second;
}

namespace {

Series set_zero(const Series& s, int var) {
    std::vector<std::pair<MultiIndex, Coeff>> terms;
    for (const auto& [r, c] : s.terms())
        if (s.exps(r)[var] == 0) terms.emplace_back(s.exps(r), c);
    return Series::from_terms(s.dim(), s.trunc(), s.ring(), terms);
}

}  // namespace

Series tau_chain_integral(const Series& psi, const SeriesMap& f, int z) {
    int d = psi.dim();
    int M = std::min(psi.trunc(), f[0].trunc());
    Series acc(d, M - 1, psi.ring());
    for (int i = 0; i < d; ++i) {
        Series dpsi = compose(partial_derivative(psi, i), f);
        acc = acc + dpsi * partial_derivative(f[i], z);
    }
    // The factor z from d/dtau (tau z) stays outside the substitution z -> tau z.
    return tau_integral(acc, z).with_trunc(M) * Series::variable(d, M, psi.ring(), z);
}

Series endpoint_difference(const Series& psi, const SeriesMap& f, int z) {
    SeriesMap f0;
    for (const auto& s : f) f0.push_back(set_zero(s, z));
    return compose(psi, f) - compose(psi, f0);
}

namespace {

ConjugacyCertificate affine_impl(const GermMap& f, const BlockStructure& b, const Tolerances& tol, bool formal_only) {
    AffineData a = affine_data(f, b);
    const int d = f.dim(), N = f.trunc();
    const Ring ring = f.ring();
    const Mode mode = ring.mode;

    StageInfo info;
    info.name = "affine";
    Series phi(d, N - 1, ring);
    if (mode == Mode::Exact || formal_only) {
        EngineProblem p;
        p.stage = "affine pass";
        p.rank_tol = tol.res;
        p.dim = d;
        p.ncomp = 1;
        p.trunc = N - 1;
        p.max_degree = N - 1;
        p.ring = ring;
        p.lin = linear_part(f.comps);
        p.c_lin = -one(mode);
        p.z_var = a.z;
        p.c_z = -one(mode);
        p.omega_lin = a.omega.homogeneous(1);
        p.mix = CMatrix::identity(1, mode);
        // phi - eps - T phi
        p.residual = [&](const SeriesMap& ph, const SeriesMap&) {
            return SeriesMap{ph[0] - a.eps - affine_operator(a, f, ph[0])};
        };
        auto sol = solve_by_degree(p);
        phi = sol.phi[0];
        info.engine_degree = N - 1;
        info.key_order = std::move(sol.order);
    } else {
        // phi = sum_n T^n eps
        Series term = a.eps;
        phi = term;
        long it = 0;
        double inc = term.max_abs();
        while (inc >= tol.series) {
            term = affine_operator(a, f, term);
            phi = phi + term;
            inc = term.max_abs();
            ++it;
            if (it >= tol.max_iter) diverged("affine T-iteration", it, inc);
        }
        info.tail_iterations = it;
        info.tail_increment = inc;
    }
    info.applied = !phi.is_zero();

    SeriesMap Phi = identity_map(d, N, ring);
    Phi[a.z] = var(d, N, ring, a.z) * plus_one(phi.with_trunc(N));
    Series pf0 = set_zero(compose(phi, f.comps), a.z).with_trunc(N);
    Series omega_t = a.omega * plus_one(pf0);
    MultiIndex lz = a.monomial;
    lz[a.z] += 1;
    std::vector<std::optional<Series>> forced(d);
    forced[a.z] = Series::monomial(d, N, ring, lz, a.nu) + omega_t;
    return finish(f, b, Phi, transport(f, Phi, forced), std::move(info));
}

}  // namespace

ConjugacyCertificate pass_affine(const GermMap& f, const BlockStructure& b, const Tolerances& tol) {
    return with_fallback(f, tol, [&](bool formal) { return affine_impl(f, b, tol, formal); });
}

// ---------------------------------------------------------------- pipeline

namespace {

template <class Fn>
auto staged(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("stage ") + name + ": " + e.what());
    }
}

}  // namespace

ConjugacyCertificate normalize_full(const GermMap& f, const NormalizeOptions& opts) {
    const Tolerances& tol = opts.tol;
    const Mode mode = f.mode();
    ConjugacyCertificate out;

    BlockStructure blocks = staged("blocks", [&] {
        auto cert = rigidity_check(f);
        return detect_blocks(f, cert);
    });
    staged("contraction", [&] {
        auto c = is_contracting(f, tol.eig);
        if (!c.contracting)
            fail(ErrorKind::NotContracting, "spectral radius " + Coeff(c.radius).str() + " is not below 1");
        return 0;
    });

    GermMap g = apply_prepared_order(f, blocks);
    SeriesMap Phi;
    {
        const int d = f.dim();
        for (int i = 0; i < d; ++i) Phi.push_back(Series::variable(d, f.trunc(), f.ring(), blocks.perm[i]));
    }
    auto absorb = [&](ConjugacyCertificate&& c) {
        g = std::move(c.normalized);
        Phi = compose(c.phi, Phi);
        for (auto& p : c.passes_applied) out.passes_applied.push_back(p);
        for (auto& s : c.stages) out.stages.push_back(std::move(s));
        for (auto& w : c.warnings) out.warnings.push_back(std::move(w));
    };
    auto done = [&](const BlockStructure& b) {
        out.normalized = g;
        out.phi = Phi;
        out.blocks = b;
        out.residual = verify_conjugacy(f, g, Phi);
        bool bad = mode == Mode::Exact ? out.residual != 0.0 : !(out.residual <= tol.residual);
        if (bad)
            fail(ErrorKind::Solver, "conjugacy residual " + Coeff(out.residual).str() + " exceeds the tolerance " +
                                        Coeff(mode == Mode::Exact ? 0.0 : tol.residual).str());
        return out;
    };

    absorb(staged("linear", [&] { return pass_linear(g, blocks, tol); }));
    if (opts.last == PassKind::Linear) return done(blocks);

    auto js = staged("jordan", [&] { return jordan_split(g, blocks, tol.eig); });
    {
        ConjugacyCertificate c;
        c.normalized = js.germ;
        c.phi = js.phi;
        c.warnings = js.warnings;
        StageInfo info;
        info.name = "jordan";
        info.applied = !exactly_equal(js.phi, identity_map(f.dim(), f.trunc(), f.ring()));
        if (info.applied) c.passes_applied.push_back("jordan");
        c.stages.push_back(info);
        absorb(std::move(c));
    }
    blocks = js.blocks;
    if (opts.last == PassKind::Jordan) return done(blocks);

    ResonanceReport res = staged("resonances", [&] {
        return analyze_resonances(blocks, mode, mode == Mode::Exact ? 0.0 : tol.res, opts.declared ? &*opts.declared : nullptr);
    });
    for (const auto& w : res.warnings) out.warnings.push_back(w);
    out.resonances = res;

    absorb(staged("primary", [&] { return pass_primary(g, blocks, res, tol); }));
    if (opts.last == PassKind::Primary) return done(blocks);
    absorb(staged("secondary", [&] { return pass_secondary(g, blocks, res, tol); }));
    if (opts.last == PassKind::Secondary) return done(blocks);
    if (f.dim() - blocks.s - blocks.p == 1) absorb(staged("affine", [&] { return pass_affine(g, blocks, tol); }));
    return done(blocks);
}

// ---------------------------------------------------------------- shapes

std::vector<std::string> check_shape(const GermMap& g, const BlockStructure& b, const ResonanceReport* res, PassKind after,
                                     double tol) {
    std::vector<std::string> bad;
    const int d = g.dim(), xd = b.x_dim();
    auto big = [&](const Coeff& c) { return !c.is_zero(g.mode() == Mode::Exact ? 0.0 : tol); };
    auto name = [](const char* part, int k, const MultiIndex& n) {
        std::string s = std::string(part) + std::to_string(k + 1) + " has term (";
        for (size_t i = 0; i < n.size(); ++i) s += (i ? "," : "") + std::to_string(n[i]);
        return s + ")";
    };
    for (int k = 0; k < b.r; ++k)
        for (const auto& [r, c] : g.comps[k].terms())
            if (g.comps[k].exps(r) != unit_index(d, b.sigma[k]) && big(c)) bad.push_back(name("u", k, g.comps[k].exps(r)));
    if (after < PassKind::Primary || !b.split) return bad;
    for (int k = 0; k < b.e; ++k) {
        const Series& s = g.comps[b.v0() + k];
        for (const auto& [r, c] : s.terms()) {
            const MultiIndex& n = s.exps(r);
            if (!big(c) || n == unit_index(d, b.v0() + k)) continue;
            bool lower = only_x(n, xd);
            for (int j = k; j < b.e && lower; ++j) lower = n[b.v0() + j] == 0;
            bool jordan_entry = total_degree(n) == 1 && lower;  // v_j with j < k
            if (!lower) bad.push_back(name("v", k, n) + " outside the triangular range");
            else if (!jordan_entry && (!res || !res->is_primary(k, head(n, xd))))
                bad.push_back(name("v", k, n) + " is not primary resonant");
        }
    }
    if (after < PassKind::Secondary) return bad;
    for (int k = 0; k < b.p; ++k) {
        auto mu = monomial_unit_factor(g.comps[b.y0() + k]);
        Coeff beta = mu.unit.constant_term();
        for (const auto& [r, c] : mu.unit.terms()) {
            const MultiIndex& n = mu.unit.exps(r);
            if (total_degree(n) == 0 || !big(c / beta)) continue;
            if (!only_x(n, xd)) bad.push_back(name("y", k, n) + " in the unit depends on y or z");
            else if (!res || !res->is_secondary(head(n, xd))) bad.push_back(name("y", k, n) + " is not secondary resonant");
        }
    }
    if (after < PassKind::Affine || d - b.s - b.p != 1) return bad;
    const Series& h = g.comps[d - 1];
    for (const auto& [r, c] : h.terms())
        if (h.exps(r)[d - 1] > 1 && big(c)) bad.push_back(name("z", 0, h.exps(r)) + " of z-degree above 1");
    return bad;
}

bool preserves_foliations(const GermMap& g, const BlockStructure& b, double tol) {
    const int xd = b.x_dim(), xyd = xd + b.p;
    double t = g.mode() == Mode::Exact ? 0.0 : tol;
    auto depends_beyond = [&](const Series& s, int limit) {
        for (const auto& [r, c] : s.terms()) {
            const MultiIndex& n = s.exps(r);
            for (int i = limit; i < s.dim(); ++i)
                if (n[i] && !c.is_zero(t)) return true;
        }
        return false;
    };
    for (int k = 0; k < xd; ++k)
        if (depends_beyond(g.comps[k], xd)) return false;
    for (int k = xd; k < xyd; ++k)
        if (depends_beyond(g.comps[k], xyd)) return false;
    return true;
}

NormalFormSupport normal_form_support(const GermMap& g, const BlockStructure& b, double threshold) {
    NormalFormSupport s;
    for (int k = 0; k < b.e; ++k) {
        const Series& c = g.comps[b.v0() + k];
        for (const auto& [r, v] : c.terms()) {
            const MultiIndex& n = c.exps(r);
            bool linear_v = total_degree(n) == 1 && [&] {
                for (int j = 0; j < b.e; ++j)
                    if (n[b.v0() + j]) return true;
                return false;
            }();
            if (!linear_v && v.abs() > threshold) s.v_terms.insert({k, n});
        }
    }
    for (int k = 0; k < b.p; ++k) {
        auto mu = monomial_unit_factor(g.comps[b.y0() + k]);
        Coeff beta = mu.unit.constant_term();
        for (const auto& [r, v] : mu.unit.terms())
            if (r != 0 && (v / beta).abs() > threshold) s.y_terms.insert({k, mu.unit.exps(r)});
    }
    return s;
}

std::string support_str(const NormalFormSupport& s) {
    auto idx = [](const MultiIndex& n) {
        std::string t = "(";
        for (size_t i = 0; i < n.size(); ++i) t += (i ? "," : "") + std::to_string(n[i]);
        return t + ")";
    };
    std::string out = "v:{";
    for (const auto& [k, n] : s.v_terms) out += " " + std::to_string(k + 1) + idx(n);
    out += " } y:{";
    for (const auto& [k, n] : s.y_terms) out += " " + std::to_string(k + 1) + idx(n);
    return out + " }";
}

}  // namespace rigidnf
