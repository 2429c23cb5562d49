#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rigidnf/normalizer.hpp"
#include "pipeline_fixtures.hpp"
#include "random_germs.hpp"
#include "support.hpp"

#include <cmath>

using namespace rigidnf;
using testsupport::germ;
using testsupport::kExact;
using testsupport::kFloat;

namespace {

Coeff q(long a, long b) { return Coeff::rational(mpq_class(a, b), Mode::Exact); }

NormalizeOptions stop_after(PassKind k) {
    NormalizeOptions o;
    o.last = k;
    return o;
}

// The map x -> x[perm], which is what a certificate without any change of
// coordinates carries.
SeriesMap relabeling(const GermMap& f, const BlockStructure& b) {
    SeriesMap m;
    for (int i = 0; i < f.dim(); ++i) m.push_back(Series::variable(f.dim(), f.trunc(), f.ring(), b.perm[i]));
    return m;
}

SeriesMap identity_of(const GermMap& f) { return identity_map(f.dim(), f.trunc(), f.ring()); }

double weight(int k, const MultiIndex& n, int e) { return total_degree(n) + static_cast<double>(k) / e; }

}  // namespace

// ---------------------------------------------------------------- linear pass

TEST_CASE("linear pass: theta = 0 leaves the germ unchanged") {
    auto f = germ({"u", "y"}, {"u/2", "u*y^2"}, 2, 6);
    auto c = normalize_full(f, stop_after(PassKind::Linear));
    CHECK(exactly_equal(c.phi, identity_of(f)));
    CHECK(exactly_equal(c.normalized.comps, f.comps));
    CHECK(c.residual == 0.0);
}

TEST_CASE("linear pass: u-part of (u/2 (1+y), u y^2) becomes u/2") {
    for (auto ring : {kExact, kFloat}) {
        auto f = germ({"u", "y"}, {"u/2*(1 + y)", "u*y^2"}, 2, 6, ring);
        auto c = normalize_full(f, stop_after(PassKind::Linear));
        const auto& u = c.normalized.comps[0];
        REQUIRE(u.terms().size() == 1);
        CHECK(u.coeff({1, 0}).equals(Coeff(0.5), 0));
        if (ring.mode == Mode::Exact) CHECK(c.residual == 0.0);
        else CHECK(c.residual <= 1e-8);
    }
}

TEST_CASE("linear pass: theta = v gives the product of (1 + v/3^n)") {
    // u o f = u/2 (1 + v) and v o f = v/3, so u(1 + phi) with
    // 1 + phi = prod_{n>=0} (1 + v/3^n). By the q-binomial theorem the
    // coefficient of v^k is q^{k(k-1)/2} / prod_{i=1..k} (1 - q^i), q = 1/3.
    const int N = 8;
    auto f = germ({"u", "y", "v"}, {"u/2*(1 + v)", "u*y^2", "v/3"}, 2, N, kFloat);
    auto c = normalize_full(f, stop_after(PassKind::Linear));
    const double qq = 1.0 / 3.0;
    for (int k = 1; k < N; ++k) {
        double expect = std::pow(qq, k * (k - 1) / 2.0);
        for (int i = 1; i <= k; ++i) expect /= 1.0 - std::pow(qq, i);
        CAPTURE(k);
        CHECK(c.phi[0].coeff({1, 0, k}).abs() == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(c.normalized.comps[0].terms().size() == 1);
}

// ---------------------------------------------------------------- primary pass

TEST_CASE("primary pass: alpha = 1/2, mu = 1/4 keeps u^2 and kills u^3") {
    auto f = testsupport::load_fixture("primary_u2.json");
    auto c = normalize_full(f);
    CHECK(c.residual == 0.0);
    const auto& v = c.normalized.comps[1];
    CHECK(v.terms().size() == 2);
    CHECK(v.coeff({0, 1}).equals(q(1, 4), 0));
    CHECK(v.coeff({2, 0}).equals(q(1, 1), 0));
    CHECK(v.coeff({3, 0}).is_zero(0));
}

TEST_CASE("primary pass: without resonances the v-block is linearized") {
    // 1/2 and 1/3 satisfy no relation 2^-a 3^-b = 2^-1 or 3^-1 beyond the trivial ones.
    auto f = germ({"x", "y"}, {"x/2 + y^2", "y/3 + x^2 + x*y"}, 0, 8);
    auto c = normalize_full(f);
    CHECK(c.residual == 0.0);
    REQUIRE(c.resonances.has_value());
    CHECK(c.resonances->primary.empty());
    for (const auto& comp : c.normalized.comps) {
        REQUIRE(comp.terms().size() == 1);
        CHECK(comp.degree_of(comp.terms()[0].first) == 1);
    }
}

TEST_CASE("primary pass: 2-cycle system is singular exactly at the resonances") {
    // f = (a1 u2, a2 u1, mu v). On phi-coefficients of u1^a u2^b v^c and
    // u1^b u2^a v^c the homological operator is
    //   [[-mu, a1^b a2^a mu^c], [a1^a a2^b mu^c, -mu]],
    // with determinant mu^2 - (a1 a2)^(a+b) mu^(2c).
    const Coeff a1 = q(1, 2), a2 = q(1, 8);
    for (auto mu : {q(1, 16), q(1, 15)}) {
        GermMap f;
        f.critical_count = 2;
        f.comps = {Series::monomial(3, 5, kExact, {0, 1, 0}, a1), Series::monomial(3, 5, kExact, {1, 0, 0}, a2),
                   Series::monomial(3, 5, kExact, {0, 0, 1}, mu)};
        auto js = jordan_split(apply_prepared_order(f, detect_blocks(f, rigidity_check(f))), detect_blocks(f, rigidity_check(f)), 1e-9);
        REQUIRE(js.blocks.eta == 2);
        auto rep = analyze_resonances(js.blocks, Mode::Exact, 0);
        for (int a = 0; a <= 4; ++a)
            for (int b = 0; a + b <= 4; ++b)
                for (int cc = 0; a + b + cc <= 4; ++cc) {
                    if (a + b + cc < 2) continue;
                    CMatrix M(2, 2, Mode::Exact);
                    M(0, 0) = -mu;
                    M(0, 1) = a1.pow(b) * a2.pow(a) * mu.pow(cc);
                    M(1, 0) = a1.pow(a) * a2.pow(b) * mu.pow(cc);
                    M(1, 1) = -mu;
                    Coeff formula = mu * mu - (a1 * a2).pow(a + b) * mu.pow(2 * cc);
                    CAPTURE(a);
                    CAPTURE(b);
                    CAPTURE(cc);
                    CHECK(det(M, 0).equals(formula, 0));
                    CHECK(formula.is_zero(0) == rep.is_primary(0, {a, b, cc}));
                }
    }
}

// Keys sharing a weight (same k and |n|) form one level; levels never go back.
TEST_CASE("primary pass: keys are fixed in increasing weight") {
    for (const auto& fx : testsupport::pipeline_fixtures()) {
        auto c = normalize_full(fx.build(6, kFloat));
        for (const auto& st : c.stages) {
            if (st.name != "primary") continue;
            const int e = c.blocks.e;
            CAPTURE(fx.name);
            for (size_t i = 1; i < st.key_order.size(); ++i)
                CHECK(weight(st.key_order[i - 1].first, st.key_order[i - 1].second, e) <=
                      weight(st.key_order[i].first, st.key_order[i].second, e));
        }
    }
}

// ---------------------------------------------------------------- secondary pass

TEST_CASE("secondary pass: D = [[2,1],[1,0]], lambda = 1 - sqrt 2 keeps only degree-one g") {
    auto f = germ({"x", "y", "z"}, {"(1 - 1.4142135623730951)*x", "x*y^2*z*(1 + x + y)", "x^2*y*(1 + x^2 + z)"}, 3, 7,
                  kFloat);
    auto c = normalize_full(f);
    CHECK(c.residual <= 1e-8);
    auto s = normal_form_support(c.normalized, c.blocks, 1e-7);
    CHECK_FALSE(s.y_terms.empty());
    for (const auto& [k, n] : s.y_terms) CHECK(total_degree(n) == 1);
    CHECK(s.v_terms.empty());
}

TEST_CASE("secondary pass: g = 0 leaves the germ unchanged") {
    auto f = germ({"x", "y"}, {"3/10*x", "x*y^2"}, 2, 8);
    auto c = normalize_full(f);
    CHECK(exactly_equal(c.phi, identity_of(f)));
    CHECK(exactly_equal(c.normalized.comps, f.comps));
}

TEST_CASE("secondary pass: Favre germ normalizes to (lambda x, x y^2)") {
    auto f = germ({"x", "y"}, {"3/10*x", "x*y^2*(1 + x + y + x*y)"}, 2, 8);
    auto c = normalize_full(f);
    CHECK(c.residual == 0.0);
    auto want = germ({"x", "y"}, {"3/10*x", "x*y^2"}, 2, 8);
    CHECK(exactly_equal(c.normalized.comps, want.comps));
}

// ---------------------------------------------------------------- affine pass

TEST_CASE("affine pass: epsilon = 0 gives the identity") {
    auto f = germ({"x", "y", "z"}, {"2/5*x", "x*y^2", "x*y*z + x^2"}, 2, 6);
    auto c = normalize_full(f);
    CHECK(exactly_equal(c.phi, relabeling(f, c.blocks)));
    CHECK(c.residual == 0.0);
}

TEST_CASE("affine pass: z-part of (lambda x, x y^2, x y z (1+z) + x^2) becomes affine in z") {
    for (auto ring : {kExact, kFloat}) {
        auto f = germ({"x", "y", "z"}, {"2/5*x", "x*y^2", "x*y*z*(1 + z) + x^2"}, 2, 6, ring);
        auto c = normalize_full(f);
        if (ring.mode == Mode::Exact) CHECK(c.residual == 0.0);
        else CHECK(c.residual <= 1e-8);
        const int z = c.blocks.z0();
        const auto& h = c.normalized.comps[z];
        for (const auto& [r, v] : h.terms())
            if (!v.is_zero(1e-10)) CHECK(h.exps(r)[z] <= 1);
        MultiIndex xyz(3, 0);
        for (int i = 0; i < 3; ++i) xyz[i] = 1;
        CHECK_FALSE(h.coeff(xyz).is_zero(1e-10));
        CHECK(check_shape(c.normalized, c.blocks, &*c.resonances, PassKind::Affine, 1e-9).empty());
    }
}

TEST_CASE("affine pass: tau integral equals the endpoint difference") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 6; ++t) {
        auto f = germ({"x", "y", "z"}, {"2/5*x", "x*y^2", "x*y*z*(1 + z) + x^2 + y*z^2"}, 2, 6);
        Series psi(3, 6, kExact);
        for (int k = 0; k < 4; ++k) {
            MultiIndex n{static_cast<int>(rng() % 3), static_cast<int>(rng() % 3), 1 + static_cast<int>(rng() % 2)};
            psi.add_term(n, q(static_cast<long>(rng() % 7) - 3, 1 + static_cast<long>(rng() % 4)));
        }
        CHECK((tau_chain_integral(psi, f.comps, 2) - endpoint_difference(psi, f.comps, 2)).is_zero());
    }
}

// ---------------------------------------------------------------- pipeline

TEST_CASE("pipeline: a germ already in normal form is left alone") {
    auto f = testsupport::load_fixture("normal_form.json");
    auto c = normalize_full(f);
    CHECK(c.residual == 0.0);
    CHECK(exactly_equal(c.phi, relabeling(f, c.blocks)));
    CHECK(c.passes_applied.empty());
}

TEST_CASE("pipeline: removable terms in every slot give the resonant normal form") {
    auto f = testsupport::load_fixture("removable_terms.json");
    auto c = normalize_full(f);
    CHECK(c.residual == 0.0);
    CHECK(check_shape(c.normalized, c.blocks, &*c.resonances, PassKind::Affine, 0).empty());
    CHECK(preserves_foliations(c.normalized, c.blocks, 0));
    auto s = normal_form_support(c.normalized, c.blocks, 0);
    // mu = alpha^2 is the only relation; D = [2] admits no secondary resonance.
    CHECK(s.v_terms.size() == 1);
    CHECK(s.y_terms.empty());
}

TEST_CASE("pipeline: singular internal action is rejected when blocks are detected") {
    auto f = testsupport::load_fixture("manyimages.json");
    try {
        normalize_full(f);
        FAIL("manyimages was accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonInjective);
        CHECK(std::string(e.what()).find("blocks") != std::string::npos);
    }
}

// ---------------------------------------------------------------- verifier

TEST_CASE("verify_conjugacy: identity and a corrupted phi") {
    auto f = testsupport::load_fixture("primary_u2.json");
    CHECK(verify_conjugacy(f, f, identity_of(f)) == 0.0);

    auto g = germ({"u", "v"}, {"u/2", "v/4 + u^2 + u^3 + u*v"}, 1, 8, kFloat);
    auto c = normalize_full(g);
    CHECK(c.residual <= 1e-8);
    SeriesMap bad = c.phi;
    bad[1].add_term({1, 1}, Coeff(1e-3));
    CHECK(verify_conjugacy(g, c.normalized, bad) >= 1e-4);
}

// ---------------------------------------------------------------- oracle

TEST_CASE("oracle: primary example has the same support") {
    auto f = germ({"u", "v"}, {"u/2", "v/4 + u^2 + u^3"}, 1, 5, kFloat);
    auto c = normalize_full(f);
    auto o = oracle_solve(f);
    CHECK(normal_form_support(c.normalized, c.blocks, 1e-7) == o.support);
    CHECK(o.support.v_terms.size() == 1);
}

TEST_CASE("oracle: linear diagonal germ gives the identity") {
    auto o = oracle_solve(germ({"x", "y"}, {"x/2", "y/3"}, 0, 5, kFloat));
    CHECK(max_abs_diff(o.cert.phi, identity_map(2, 5, kFloat)) <= 1e-12);
    CHECK(o.support.v_terms.empty());
    CHECK(o.cert.residual <= 1e-12);
}

TEST_CASE("oracle: 20 random rigid germs in dimension 2 agree on support") {
    testsupport::GermGenerator gen(20260, kFloat);
    for (int i = 0; i < 20; ++i) {
        auto rg = gen.next(2, 5, i % 2 == 1);
        CAPTURE(rg.roles);
        auto c = normalize_full(rg.germ);
        auto o = oracle_solve(rg.germ);
        CHECK(support_str(normal_form_support(c.normalized, c.blocks, 1e-7)) == support_str(o.support));
    }
}

// ---------------------------------------------------------------- invariants

TEST_CASE("residual contract on every pipeline fixture") {
    for (const auto& fx : testsupport::pipeline_fixtures()) {
        CAPTURE(fx.name);
        CHECK(normalize_full(fx.build(8, kFloat)).residual <= 1e-8);
        if (fx.exact) CHECK(normalize_full(fx.build(6, kExact)).residual == 0.0);
    }
}

TEST_CASE("shape contracts hold after each pass") {
    for (const auto& fx : testsupport::pipeline_fixtures())
        for (auto last : {PassKind::Linear, PassKind::Primary, PassKind::Secondary, PassKind::Affine}) {
            auto c = normalize_full(fx.build(6, fx.exact ? kExact : kFloat), stop_after(last));
            CAPTURE(fx.name);
            CAPTURE(pass_name(last));
            auto bad = check_shape(c.normalized, c.blocks, c.resonances ? &*c.resonances : nullptr, last, 1e-9);
            for (const auto& b : bad) MESSAGE(b);
            CHECK(bad.empty());
            if (last == PassKind::Affine) CHECK(preserves_foliations(c.normalized, c.blocks, 1e-9));
        }
}

TEST_CASE("each pass is the identity on its own output") {
    Tolerances tol;
    for (const auto& fx : testsupport::pipeline_fixtures()) {
        auto f = fx.build(6, kFloat);
        CAPTURE(fx.name);
        {
            auto c = normalize_full(f, stop_after(PassKind::Linear));
            auto again = pass_linear(c.normalized, c.blocks, tol);
            CHECK(max_abs_diff(again.phi, identity_of(c.normalized)) <= 1e-10);
            CHECK(again.residual <= 1e-10);
        }
        {
            auto c = normalize_full(f, stop_after(PassKind::Jordan));
            auto again = jordan_split(c.normalized, c.blocks, tol.eig);
            CHECK(max_abs_diff(again.phi, identity_of(c.normalized)) <= 1e-10);
        }
        {
            auto c = normalize_full(f, stop_after(PassKind::Primary));
            auto again = pass_primary(c.normalized, c.blocks, *c.resonances, tol);
            CHECK(max_abs_diff(again.phi, identity_of(c.normalized)) <= 1e-10);
            CHECK(again.residual <= 1e-10);
        }
        {
            auto c = normalize_full(f, stop_after(PassKind::Secondary));
            auto again = pass_secondary(c.normalized, c.blocks, *c.resonances, tol);
            CHECK(max_abs_diff(again.phi, identity_of(c.normalized)) <= 1e-10);
            CHECK(again.residual <= 1e-10);
        }
        auto c = normalize_full(f);
        if (f.dim() - c.blocks.s - c.blocks.p == 1) {
            auto again = pass_affine(c.normalized, c.blocks, tol);
            CHECK(max_abs_diff(again.phi, identity_of(c.normalized)) <= 1e-10);
            CHECK(again.residual <= 1e-10);
        }
    }
}
