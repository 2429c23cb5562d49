#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rigidnf/germlang.hpp"
#include "support.hpp"

#include <random>

using namespace rigidnf;
using testsupport::kExact;
using testsupport::kFloat;

namespace {

const std::vector<std::string> xyz = {"x", "y", "z"};

Coeff q(long a, long b) { return Coeff::rational(mpq_class(a, b), Mode::Exact); }

Series parse(const std::string& s, Ring ring = kExact, int N = 6) { return parse_expr(s, xyz, N, ring); }

std::string minimal_file(const std::string& extra) {
    return R"({"dim": 1, "variables": ["x"], "components": ["x/2"])" + extra + "}";
}

// Random expression from the documented grammar.
std::string random_expr(std::mt19937_64& rng, int depth) {
    auto pick = [&](int n) { return static_cast<int>(rng() % n); };
    if (depth == 0 || pick(3) == 0) {
        switch (pick(5)) {
            case 0: return std::to_string(pick(9) + 1);
            case 1: return std::to_string(pick(9)) + "." + std::to_string(pick(100));
            case 2: return "I";
            default: return xyz[pick(3)];
        }
    }
    switch (pick(6)) {
        case 0: return random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1);
        case 1: return random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1);
        case 2: return random_expr(rng, depth - 1) + "*" + random_expr(rng, depth - 1);
        case 3: return "(" + random_expr(rng, depth - 1) + ")^" + std::to_string(pick(4));
        case 4: return random_expr(rng, depth - 1) + "/(" + std::to_string(pick(5) + 1) + " + " + random_expr(rng, depth - 1) + "*x)";
        default: return "-(" + random_expr(rng, depth - 1) + ")";
    }
}

Series random_series(std::mt19937_64& rng, Ring ring, int N) {
    Series s(3, N, ring);
    int terms = 1 + static_cast<int>(rng() % 6);
    for (int t = 0; t < terms; ++t) {
        MultiIndex n(3, 0);
        int deg = static_cast<int>(rng() % (N + 1));
        for (int k = 0; k < deg; ++k) n[rng() % 3]++;
        long a = static_cast<long>(rng() % 41) - 20, b = 1 + static_cast<long>(rng() % 12);
        long im = static_cast<long>(rng() % 5) - 2;
        Coeff c = ring.mode == Mode::Exact ? Coeff::complex(mpq_class(a, b), mpq_class(im, b), Mode::Exact)
                                           : Coeff(std::complex<double>(static_cast<double>(a) / b * 0.37, im / 7.0));
        s.add_term(n, c);
    }
    return s;
}

}  // namespace

TEST_CASE("x*y + z^2 is the obvious two-term series") {
    Series s = parse("x*y + z^2");
    REQUIRE(s.terms().size() == 2);
    CHECK(s.coeff({1, 1, 0}).equals(q(1, 1), 0));
    CHECK(s.coeff({0, 0, 2}).equals(q(1, 1), 0));
}

TEST_CASE("(1+x)^2 expands") {
    Series s = parse("(1+x)^2");
    CHECK(s.equals(parse("1 + 2*x + x^2")));
}

TEST_CASE("z-component of the anycurve example with m = 2, psi(T) = T^3") {
    Series s = parse("x*z + x*y*(3/2)*z + z^3", kExact, 8);
    CHECK(s.terms().size() == 3);
    CHECK(s.coeff({1, 1, 1}).equals(q(3, 2), 0));
    auto file = parse_germ_file(read_text_file(std::string(RIGIDNF_FIXTURES) + "/anycurve.json"));
    CHECK(file.germ.comps[2].equals(parse_expr("X*Z + X*Y*(3/2)*Z + Z^3", {"X", "Y", "Z"}, 8, kExact)));
}

TEST_CASE("precedence and associativity") {
    CHECK(parse("2*x^2").equals(parse("2*(x^2)")));
    CHECK(parse("x - y - z").equals(parse("(x - y) - z")));
    CHECK(parse("-x^2").equals(parse("-(x^2)")));
    CHECK(parse("x/2/3").equals(parse("x/6")));
    CHECK(parse("2^3").constant_term().equals(q(8, 1), 0));
}

TEST_CASE("decimal literals are exact in exact mode") {
    CHECK(parse("0.1").constant_term().equals(q(1, 10), 0));
    CHECK(parse("1.25e-1").constant_term().equals(q(1, 8), 0));
    CHECK(parse("0.1", kFloat).constant_term().equals(Coeff(0.1), 0));
}

TEST_CASE("imaginary unit and division by a unit") {
    Series s = parse("I*x");
    CHECK(s.coeff({1, 0, 0}).equals(Coeff::complex(0, 1, Mode::Exact), 0));
    // 1/(1 - x) = 1 + x + x^2 + ...
    Series g = parse("1/(1 - x)", kExact, 4);
    for (int k = 0; k <= 4; ++k) CHECK(g.coeff({k, 0, 0}).equals(q(1, 1), 0));
}

TEST_CASE("errors carry a position") {
    auto pos_of = [](const std::string& src) -> long {
        try {
            parse(src);
        } catch (const ParseError& e) {
            return static_cast<long>(e.pos());
        }
        return -1;
    };
    CHECK(pos_of("x + ") == 4);
    CHECK(pos_of("x + w") == 4);
    CHECK(pos_of("x/(y + x)") == 1);
    CHECK(pos_of("(x + y") == 6);
    CHECK(pos_of("x^y") == 2);
    CHECK(pos_of("x $ y") == 2);
    CHECK(pos_of("") == 0);
}

TEST_CASE("minimal one-variable file is a contracting linear germ") {
    auto p = parse_germ_file(minimal_file(""));
    CHECK(p.file.trunc == 8);
    CHECK(p.file.mode == Mode::Float);
    REQUIRE(p.germ.dim() == 1);
    CHECK(p.germ.comps[0].coeff({1}).equals(Coeff(0.5), 0));
    CHECK(is_contracting(p.germ, 1e-9).contracting);
}

TEST_CASE("the manyimages file parses") {
    auto p = parse_germ_file(read_text_file(std::string(RIGIDNF_FIXTURES) + "/manyimages.json"));
    CHECK(p.germ.dim() == 3);
    CHECK(p.file.critical_count == 3);
}

TEST_CASE("duplicate variable names give exactly that violation") {
    try {
        parse_germ_schema(R"({"dim": 2, "variables": ["x", "x"], "components": ["x/2", "x/3"]})");
        FAIL("accepted");
    } catch (const SchemaError& e) {
        REQUIRE(e.violations().size() == 1);
        CHECK(e.violations()[0] == "duplicate variable name 'x'");
    }
}

TEST_CASE("all schema violations are reported together") {
    try {
        parse_germ_schema(R"({"dim": 2, "mode": "fast", "variables": ["x"], "components": ["x/2"], "extra": 1})");
        FAIL("accepted");
    } catch (const SchemaError& e) {
        CHECK(e.violations().size() == 4);
    }
    try {
        parse_germ_file(R"({"dim": 2, "variables": ["x", "y"], "components": ["x/2 + w", "1 + y"]})");
        FAIL("accepted");
    } catch (const SchemaError& e) {
        CHECK(e.violations().size() == 2);
    }
}

TEST_CASE("declared resonances and tolerances are read") {
    auto f = parse_germ_schema(minimal_file(R"(, "tolerances": {"res": 1e-6, "max_iter": 10},
        "declared_resonances": {"primary": [[1, 2, 0]], "secondary": [[1, 0]]})"));
    CHECK(f.tol.res == 1e-6);
    CHECK(f.tol.max_iter == 10);
    REQUIRE(f.declared.primary.has_value());
    REQUIRE(f.declared.primary->size() == 1);
    CHECK((*f.declared.primary)[0].first == 1);
    CHECK((*f.declared.primary)[0].second == MultiIndex{2, 0});
    REQUIRE(f.declared.secondary.has_value());
    CHECK(f.declared.secondary->size() == 1);
}

TEST_CASE("print then parse gives the same series") {
    std::mt19937_64 rng(2024);
    for (auto ring : {kExact, kFloat})
        for (int t = 0; t < 200; ++t) {
            Series s = random_series(rng, ring, 6);
            std::string text = series_to_text(s, xyz);
            CAPTURE(text);
            Series back = parse_expr(text, xyz, 6, ring);
            if (ring.mode == Mode::Exact) CHECK(back.equals(s));
            else CHECK(max_abs_diff({back}, {s}) == 0.0);
        }
}

TEST_CASE("germ documents round-trip") {
    auto p = parse_germ_file(read_text_file(std::string(RIGIDNF_FIXTURES) + "/removable_terms.json"));
    auto again = parse_germ_file(germ_to_document(p.file, p.germ));
    CHECK(exactly_equal(again.germ.comps, p.germ.comps));
    CHECK(again.file.critical_count == p.file.critical_count);
}

TEST_CASE("parser is total on well-formed and mangled input") {
    std::mt19937_64 rng(99);
    int parsed = 0, rejected = 0;
    for (int t = 0; t < 2000; ++t) {
        std::string src = random_expr(rng, 4);
        if (t % 2) {
            // Mangle: drop, duplicate or replace one character.
            size_t at = rng() % src.size();
            static const std::string junk = "()+-*/^.xyzI1 $";
            switch (rng() % 3) {
                case 0: src.erase(at, 1); break;
                case 1: src.insert(at, 1, src[at]); break;
                default: src[at] = junk[rng() % junk.size()];
            }
        }
        CAPTURE(src);
        try {
            parse_expr(src, xyz, 5, t % 4 < 2 ? kExact : kFloat);
            ++parsed;
        } catch (const ParseError& e) {
            CHECK(e.pos() <= src.size());
            ++rejected;
        }
    }
    CHECK(parsed > 0);
    CHECK(rejected > 0);
}
