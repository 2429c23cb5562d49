#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rigidnf/classifier.hpp"
#include "support.hpp"

#include <random>

using namespace rigidnf;
using testsupport::germ;

namespace {

ClassRow run(const GermMap& f) { return classify(normalize_full(f)); }

// kappa^{-1} f(kappa x): the same germ in rescaled coordinates.
GermMap rescaled(const GermMap& f, const std::vector<Coeff>& kappa) {
    const int d = f.dim();
    SeriesMap scale;
    for (int i = 0; i < d; ++i) scale.push_back(Series::variable(d, f.trunc(), f.ring(), i).scaled(kappa[i]));
    GermMap g;
    g.critical_count = f.critical_count;
    for (int i = 0; i < d; ++i) g.comps.push_back(compose(f.comps[i], scale).scaled(Coeff::one(f.mode()) / kappa[i]));
    return g;
}

struct Classified {
    TableFixture fx;
    ClassRow row;
};

const std::vector<Classified>& classified() {
    static const std::vector<Classified> all = [] {
        std::vector<Classified> out;
        for (auto& fx : table_fixtures()) out.push_back({fx, run(fx.germ)});
        return out;
    }();
    return all;
}

bool is_question_row(const ClassRow& row) { return row.q == 1 && row.s + (row.q - row.r) == 1; }

}  // namespace

TEST_CASE("every table fixture and its perturbed copy classify to their row") {
    int perturbed = 0, resolved_base = 0;
    for (const auto& [fx, row] : classified()) {
        CAPTURE(fx.name);
        CHECK(row.same_row(fx.expected));
        for (const auto& [name, value] : fx.expected.flags) {
            CAPTURE(name);
            CHECK(row.flag(name) == value);
        }
        perturbed += fx.perturbed;
        resolved_base += !fx.perturbed && !fx.expected.unresolved;
    }
    CHECK(perturbed == resolved_base);
}

TEST_CASE("unresolved rows are exactly the question-mark rows") {
    int unresolved = 0;
    for (const auto& [fx, row] : classified()) {
        CAPTURE(fx.name);
        CHECK(row.unresolved == is_question_row(row));
        if (row.unresolved) {
            ++unresolved;
            CHECK_FALSE(row.citation.empty());
            CHECK(row.form.find('?') != std::string::npos);
        }
    }
    CHECK(unresolved == 2);

    auto any = testsupport::load_fixture("anycurve.json");
    ClassRow row = run(any);
    CHECK(row.unresolved);
    CHECK(row.q == 1);
}

TEST_CASE("diagonal rescaling changes parameters, never the row") {
    std::mt19937_64 rng(11);
    for (const auto& [fx, base] : classified()) {
        if (fx.perturbed) continue;
        CAPTURE(fx.name);
        std::vector<Coeff> kappa;
        for (int i = 0; i < fx.germ.dim(); ++i) {
            long num = 1 + static_cast<long>(rng() % 4), den = 1 + static_cast<long>(rng() % 3);
            if (rng() % 2) num = -num;
            kappa.push_back(Coeff::rational(mpq_class(num, den), Mode::Exact).in_mode(fx.germ.mode()));
        }
        ClassRow row = run(rescaled(fx.germ, kappa));
        CHECK(row.same_row(base));
        CHECK(row.flags == base.flags);
        CHECK(row.exponents == base.exponents);
    }
}

TEST_CASE("(lambda1 X, lambda2 Y, X^c1 Y^c2 Z^d) is the q=3 r=2 s=2 eta=1 row") {
    ClassRow row = run(testsupport::load_fixture("table_uuy.json"));
    CHECK(row.q == 3);
    CHECK(row.r == 2);
    CHECK(row.s == 2);
    CHECK(row.eta == 1);
    CHECK(row.exponent("c_1") == 1);
    CHECK(row.exponent("c_2") == 1);
    CHECK(row.exponent("d") == 2);
}

TEST_CASE("(alpha1 Y, alpha2 X, X^c1 Y^c2 Z^d) is the eta=2 row with its constraint recorded") {
    ClassRow row = run(testsupport::load_fixture("table_swap.json"));
    CHECK(row.q == 3);
    CHECK(row.r == 2);
    CHECK(row.s == 2);
    CHECK(row.eta == 2);
    REQUIRE(row.relations.size() == 1);
    CHECK(row.relations[0].find("alpha1 alpha2 = -lambda1 lambda2") != std::string::npos);
    // alpha1 alpha2 = 1/6, so the eigenvalues of the swap are +-1/sqrt 6.
    CHECK(row.relations[0].find("-1/6") != std::string::npos);
}

TEST_CASE("invertible germ classifies to the Poincare-Dulac row") {
    ClassRow row = run(testsupport::load_fixture("poincare_dulac.json"));
    CHECK(row.form_id == "q0-r0-s3");
    CHECK(row.q == 0);
    CHECK(row.crit_shape == "{}");
    CHECK(row.coefficient("lambda1")->equals(Coeff::rational(mpq_class(1, 2), Mode::Exact), 0));
}

TEST_CASE("(lambda1 X, lambda2 Y, Y^c Z^d) with lambda = (1/2, 1/3), c = 1, d = 2") {
    auto f = germ({"Y", "Z", "X"}, {"Y/3", "Y*Z^2", "X/2"}, 2, 8);
    ClassRow row = run(f);
    CHECK(row.q == 2);
    CHECK(row.r == 1);
    CHECK(row.s == 2);
    CHECK(row.crit_shape == "{YZ=0}");
    CHECK(row.exponent("c") == 1);
    CHECK(row.exponent("d") == 2);

    // Adding X^2 Y^3 to the Z-component makes it Y (Z^2 + X^2 Y^2): its zero
    // set is no longer a union of coordinate hyperplanes.
    auto bumped = germ({"Y", "Z", "X"}, {"Y/3", "Y*Z^2 + X^2*Y^3", "X/2"}, 2, 8);
    try {
        normalize_full(bumped);
        FAIL("non-rigid perturbation accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotRigid);
    }
}

TEST_CASE("classify needs dimension 3") {
    auto c = normalize_full(germ({"x", "y"}, {"x/2", "y/3"}, 0, 6));
    CHECK_THROWS_AS(classify(c), Error);
}
