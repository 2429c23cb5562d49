#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle/naive_poly.hpp"
#include "rigidnf/germ.hpp"
#include "support.hpp"

#include <random>

using namespace rigidnf;
using testsupport::germ;
using testsupport::kExact;
using testsupport::kFloat;

namespace {

const std::vector<std::string> XYZ{"X", "Y", "Z"};

// The curve family with a = 2, m = 2, psi(T) = T^3 and lambda = 1/2.
GermMap anycurve(int N = 8) { return germ(XYZ, {"X^2/2", "X*Y + Z^2", "X*Z + (3/2)*X*Y*Z + Z^3"}, 1, N); }

naive::Poly naive_jacobian(const GermMap& f) {
    int d = f.dim();
    std::vector<std::vector<naive::Poly>> m(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m[i].push_back(naive::derivative(naive::from_series(f.comps[i]), j));
    return naive::cut(naive::determinant(m, f.trunc() - 1), f.trunc() - 1);
}

GermMap monomial_germ(const QMatrix& M, const std::vector<Coeff>& beta, int N, Ring ring) {
    int d = M.rows();
    GermMap g;
    g.critical_count = d;
    for (int k = 0; k < d; ++k) {
        MultiIndex n(d);
        for (int l = 0; l < d; ++l) n[l] = static_cast<int>(M.int_at(l, k));
        g.comps.push_back(Series::monomial(d, N, ring, n, beta[k]));
    }
    return g;
}

int max_column_sum(const QMatrix& M) {
    int best = 0;
    for (int k = 0; k < M.cols(); ++k) {
        long s = 0;
        for (int l = 0; l < M.rows(); ++l) s += M.int_at(l, k);
        best = std::max(best, static_cast<int>(s));
    }
    return best;
}

QMatrix random_invertible_01(std::mt19937_64& rng, int d) {
    std::uniform_int_distribution<int> bit(0, 1);
    while (true) {
        QMatrix M(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) M(i, j) = bit(rng);
        if (M.det() != 0) return M;
    }
}

double conj_residual(const GermMap& f, const GermMap& g, const SeriesMap& phi) {
    return max_abs_diff(compose(phi, f.comps), compose(g.comps, phi));
}

}  // namespace

TEST_CASE("jacobian of the curve family factors as 2 lambda X^3 (1 + 3/2 Y)") {
    GermMap f = anycurve();
    Series det = jacobian_det(f);
    CHECK(det.equals(parse_expr("X^3 + (3/2)*X^3*Y", XYZ, 7, kExact)));
    CHECK(naive::same(naive::from_series(det), naive_jacobian(f)));
    auto cert = rigidity_check(f);
    CHECK(cert.jacobian_monomial == MultiIndex{3, 0, 0});
    CHECK(cert.jacobian_unit_constant.equals(Coeff::one(Mode::Exact), 0));
    CHECK(cert.pullback == QMatrix::from_ints({{2}}));
}

TEST_CASE("jacobian of a diagonal linear germ is the eigenvalue product") {
    GermMap f = germ({"x", "y"}, {"x/2", "y/3"}, 0, 5);
    CHECK(jacobian_det(f).equals(parse_expr("1/6", {"x", "y"}, 4, kExact)));
    auto cert = rigidity_check(f);
    CHECK(cert.jacobian_monomial == MultiIndex{0, 0});
    CHECK(cert.pullback.rows() == 0);
}

TEST_CASE("the two-dimensional non-rigid example is rejected") {
    GermMap f = germ({"X", "Y"}, {"X*Y*(1+X)", "X*Y*(1+Y)"}, 2, 6);
    CHECK(jacobian_det(f).equals(parse_expr("X*Y*(X + Y + 3*X*Y)", {"X", "Y"}, 5, kExact)));
    try {
        rigidity_check(f);
        FAIL("expected a rigidity failure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotRigid);
    }
    CHECK_THROWS_AS(monomial_unit_factor(parse_expr("X*Y*(X+Y+3*X*Y)", {"X", "Y"}, 6, kExact)), Error);
}

TEST_CASE("monomial times unit factorization") {
    auto mu = monomial_unit_factor(parse_expr("x^2*y + x^2*y^2", {"x", "y"}, 6, kExact));
    CHECK(mu.monomial == MultiIndex{2, 1});
    CHECK(mu.unit.equals(parse_expr("1+y", {"x", "y"}, 3, kExact)));
    auto one = monomial_unit_factor(parse_expr("1+x", {"x", "y"}, 4, kExact));
    CHECK(one.monomial == MultiIndex{0, 0});
    CHECK(one.unit.equals(parse_expr("1+x", {"x", "y"}, 4, kExact)));
    CHECK_THROWS_AS(monomial_unit_factor(Series(2, 4, kExact)), Error);
}

TEST_CASE("a monomial touching a non-critical variable means the critical count is wrong") {
    GermMap f = germ({"x", "y"}, {"x*y/2", "y/3"}, 1, 5);
    CHECK_THROWS_AS(rigidity_check(f), Error);
}

TEST_CASE("the many-images example has a singular non-periodic block") {
    GermMap f = germ(XYZ, {"X^2/2", "X*(1+Y^2)", "X*Y*Z^2"}, 3, 8);
    auto cert = rigidity_check(f);
    CHECK(cert.pullback == QMatrix::from_ints({{2, 1, 1}, {0, 0, 1}, {0, 0, 2}}));
    try {
        detect_blocks(f, cert);
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonInjective);
        CHECK(exit_code(e.kind()) == 5);
    }
}

TEST_CASE("block detection on the secondary-resonance example action") {
    // Columns of A are (1,0,0), (1,2,1), (2,1,0).
    GermMap f = germ(XYZ, {"X/2", "X*Y^2*Z", "X^2*Y"}, 3, 8);
    auto cert = rigidity_check(f);
    CHECK(cert.pullback == QMatrix::from_ints({{1, 1, 2}, {0, 2, 1}, {0, 1, 0}}));
    auto b = detect_blocks(f, cert);
    CHECK(b.r == 1);
    CHECK(b.p == 2);
    CHECK(b.eta == 1);
    CHECK(b.B == QMatrix::from_ints({{1}}));
    CHECK(b.C == QMatrix::from_ints({{1, 2}}));
    CHECK(b.D == QMatrix::from_ints({{2, 1}, {1, 0}}));
}

TEST_CASE("a permutation action makes every critical component periodic") {
    GermMap f = germ({"x", "y", "w"}, {"y/2", "x/3", "w/5"}, 2, 5);
    auto b = detect_blocks(f, rigidity_check(f));
    CHECK(b.r == 2);
    CHECK(b.p == 0);
    CHECK(b.eta == 2);
    CHECK(b.cycles == std::vector<std::vector<int>>{{0, 1}});
    CHECK(b.sigma == std::vector<int>{1, 0});
}

TEST_CASE("non-periodic critical coordinates move behind the periodic ones") {
    // x is non-periodic (x -> x^2), y is periodic.
    GermMap f = germ({"x", "y"}, {"x^2", "y*(1/2 + x)"}, 2, 6);
    auto cert = rigidity_check(f);
    auto b = detect_blocks(f, cert);
    CHECK(b.r == 1);
    CHECK(b.perm == std::vector<int>{1, 0});
    GermMap g = apply_prepared_order(f, b);
    CHECK(g.comps[0].equals(parse_expr("x*(1/2 + y)", {"x", "y"}, 6, kExact)));
    CHECK(g.comps[1].equals(parse_expr("y^2", {"x", "y"}, 6, kExact)));
    // Idempotence: the prepared germ is already ordered.
    auto b2 = detect_blocks(g, rigidity_check(g));
    CHECK(b2.perm == std::vector<int>{0, 1});
    CHECK(b2.A == b.A);
}

TEST_CASE("block detection is idempotent on random monomial-times-unit germs") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> pick(0, 2);
    for (int trial = 0; trial < 20; ++trial) {
        int d = 3;
        QMatrix M;
        do {
            M = QMatrix(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) M(i, j) = pick(rng) == 0 ? 1 : 0;
            // Keep a few periodic coordinates by planting permutation columns.
            if (trial % 2 == 0) {
                for (int i = 0; i < d; ++i) M(i, 0) = i == 1 ? 1 : 0;
                for (int i = 0; i < d; ++i) M(i, 1) = i == 0 ? 1 : 0;
                for (int i = 0; i < 2; ++i) M(i, 2) = 0;
                M(2, 2) = 2;
            }
        } while (M.det() == 0 || max_column_sum(M) == 0);
        std::vector<Coeff> beta;
        for (int k = 0; k < d; ++k) beta.push_back(Coeff::rational(mpq_class(1, k + 2), Mode::Exact));
        GermMap f = monomial_germ(M, beta, 6, kExact);
        bool zero_col = false;
        for (int k = 0; k < d; ++k) {
            long s = 0;
            for (int l = 0; l < d; ++l) s += M.int_at(l, k);
            zero_col = zero_col || s == 0;
        }
        if (zero_col) continue;
        BlockStructure b;
        try {
            b = detect_blocks(f, rigidity_check(f));
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NonInjective);
            continue;
        }
        GermMap g = apply_prepared_order(f, b);
        auto b2 = detect_blocks(g, rigidity_check(g));
        std::vector<int> id(d);
        for (int i = 0; i < d; ++i) id[i] = i;
        CHECK(b2.perm == id);
        CHECK(b2.A == b.A);
        CHECK(b2.r == b.r);
    }
}

TEST_CASE("internal action of iterates is the matrix power") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        int d = 2 + trial % 2;
        QMatrix M = random_invertible_01(rng, d);
        int N = max_column_sum(M.pow(4)) + 1;
        std::vector<Coeff> beta;
        for (int k = 0; k < d; ++k) beta.push_back(Coeff::rational(mpq_class(k + 1, 3), Mode::Exact));
        GermMap f = monomial_germ(M, beta, N, kExact);
        SeriesMap it = f.comps;
        for (int n = 1; n <= 4; ++n) {
            GermMap g{it, d};
            CHECK(pullback_matrix(g, d) == M.pow(n));
            it = compose(f.comps, it);
        }
    }
}

TEST_CASE("jacobian monomial of the second iterate follows the chain rule") {
    std::vector<GermMap> fixtures{
        anycurve(14),
        germ({"x", "y"}, {"x^2*y*(1+y)/3", "x*(1/2 + x + y^2)"}, 2, 14),
        germ({"x", "y", "w"}, {"x*y*(1/2+w)", "y^2*(1-x)", "w/3 + x"}, 2, 14),
    };
    for (const auto& f : fixtures) {
        auto c1 = rigidity_check(f);
        GermMap ff{compose(f.comps, f.comps), f.critical_count};
        auto c2 = rigidity_check(ff);
        int q = f.critical_count, d = f.dim();
        MultiIndex expect = c1.jacobian_monomial;
        for (int l = 0; l < q; ++l)
            for (int k = 0; k < q; ++k) expect[l] += c1.pullback.int_at(l, k) * c1.jacobian_monomial[k];
        CHECK(c2.jacobian_monomial == expect);
        CHECK(static_cast<int>(c2.jacobian_monomial.size()) == d);
    }
}

TEST_CASE("contraction test") {
    auto c = is_contracting(germ({"x", "y", "z"}, {"x/2", "y/4", "x*y"}, 0, 4, kFloat), 1e-9);
    CHECK(c.contracting);
    CHECK(c.radius == doctest::Approx(0.5));
    auto n = is_contracting(germ({"x", "y"}, {"x", "y/2"}, 0, 4, kFloat), 1e-9);
    CHECK_FALSE(n.contracting);
    CHECK_THROWS_AS(is_contracting(germ({"x", "y"}, {"(1 - 1/10000000000)*x", "y/2"}, 0, 4, kFloat), 1e-9), Error);
    // The curve family with a = 2 has vanishing differential at the origin.
    CHECK(is_contracting(anycurve(), 1e-9).radius == doctest::Approx(0.0));
    auto a1 = is_contracting(germ(XYZ, {"X/2", "X*Y + Z^2", "X*Z + Z^3"}, 1, 6), 1e-9);
    CHECK(a1.contracting);
    CHECK(a1.radius == doctest::Approx(0.5));
}

TEST_CASE("jordan split of the non-critical block") {
    SUBCASE("diagonal") {
        GermMap f = germ({"x", "a", "b"}, {"x^2", "a/2 + x", "x*b + a^2"}, 1, 5);
        BlockStructure b = detect_blocks(f, rigidity_check(f));
        auto js = jordan_split(f, b, 1e-9);
        CHECK(js.blocks.e == 1);
        CHECK(js.blocks.p == 1);
        // Only the reordering (u, y, t) -> (u, v, y, z) remains: v = a, y = x, z = b.
        CHECK(exactly_equal(js.phi, germ({"x", "a", "b"}, {"a", "x", "b"}, 1, 5).comps));
        CHECK(exactly_equal(js.germ.comps, germ({"v", "y", "z"}, {"v/2 + y", "y^2", "y*z + v^2"}, 1, 5).comps));
        CHECK(js.blocks.perm == std::vector<int>{1, 0, 2});
    }
    SUBCASE("jordan block") {
        GermMap f = germ({"a", "b"}, {"a/2 + b^3", "a + b/2 + a^2"}, 0, 5);
        BlockStructure b = detect_blocks(f, rigidity_check(f));
        auto js = jordan_split(f, b, 1e-9);
        CHECK(js.blocks.e == 2);
        CHECK(js.blocks.mu[0].equals(Coeff::rational(mpq_class(1, 2), Mode::Exact), 0));
        CMatrix J = js.blocks.jordan;
        CHECK(J(0, 1).is_zero(0));
        CHECK_FALSE(J(1, 0).is_zero(0));
        CHECK(conj_residual(f, js.germ, js.phi) == 0.0);
    }
    SUBCASE("upper triangular input comes out lower triangular") {
        GermMap f = germ({"a", "b"}, {"a/2 + b", "b/2 + a^2"}, 0, 5, kFloat);
        auto js = jordan_split(f, detect_blocks(f, rigidity_check(f)), 1e-9);
        CHECK(js.blocks.e == 2);
        CHECK(js.blocks.jordan(0, 1).abs() < 1e-12);
        CHECK(conj_residual(f, js.germ, js.phi) < 1e-12);
    }
    SUBCASE("nilpotent") {
        GermMap f = germ({"x", "a", "b"}, {"x^2", "x*a", "a + x*b"}, 1, 5);
        auto js = jordan_split(f, detect_blocks(f, rigidity_check(f)), 1e-9);
        CHECK(js.blocks.e == 0);
        CHECK(js.blocks.s == 0);
        CHECK(conj_residual(f, js.germ, js.phi) == 0.0);
    }
    SUBCASE("mixed critical and non-critical, float mode") {
        GermMap f = germ({"x", "a", "b"}, {"x/2", "x*a/3 + b", "a/4 + b/5 + x^2"}, 1, 6, kFloat);
        auto b = detect_blocks(f, rigidity_check(f));
        auto js = jordan_split(f, b, 1e-9);
        CHECK(js.blocks.e == 2);
        CHECK(js.blocks.mu[0].abs() >= js.blocks.mu[1].abs());
        CHECK(conj_residual(f, js.germ, js.phi) < 1e-12);
        CMatrix L = linear_part(js.germ.comps);
        CHECK(L(1, 2).abs() < 1e-12);
    }
}

TEST_CASE("jordan basis orders eigenvalues by modulus then argument") {
    CMatrix M(3, 3, Mode::Float);
    M(0, 0) = Coeff(0.25);
    M(1, 1) = Coeff(-0.5);
    M(2, 2) = Coeff(0.5);
    auto jb = jordan_basis(M, 1e-9);
    CHECK(jb.eigen[0].to_complex().real() == doctest::Approx(0.5));
    CHECK(jb.eigen[1].to_complex().real() == doctest::Approx(-0.5));
    CHECK(jb.eigen[2].to_complex().real() == doctest::Approx(0.25));
    CHECK_FALSE(jb.defective);
}
