#include "rigidnf/classifier.hpp"

#include "rigidnf/germlang.hpp"

#include <cmath>
#include <cstdio>

namespace rigidnf {

namespace {

struct Seed {
    const char* name;
    std::vector<std::string> vars;  // critical variables first
    int q;
    std::vector<std::string> comps;
    std::string roles;              // per variable: c critical, v nonzero eigenvalue, z zero eigenvalue
    int r, s, eta;
    const char* crit;
    const char* form_id;
    std::vector<std::pair<std::string, int>> flags;
    bool unresolved = false;
};

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// psi preserves every critical hyperplane and keeps the z-components affine
// in z, so psi o f o psi^{-1} has the same row and the same invariants.
SeriesMap perturbation(const std::vector<std::string>& vars, const std::string& roles, int trunc, Ring ring) {
    std::string base;
    for (size_t i = 0; i < vars.size(); ++i)
        if (roles[i] != 'z') {
            base = vars[i];
            break;
        }
    SeriesMap psi;
    for (size_t i = 0; i < vars.size(); ++i) {
        const std::string& x = vars[i];
        std::string e;
        if (roles[i] == 'c') e = x + " + 2*" + x + "^2";
        else if (roles[i] == 'v') e = x + " - " + x + "^2 + " + (base == x ? x + "^3" : base + "*" + x);
        else e = base.empty() ? x : x + " + 3*" + base + "^2";
        psi.push_back(parse_expr(e, vars, trunc, ring));
    }
    return psi;
}

}  // namespace

std::vector<TableFixture> table_fixtures(int trunc) {
    // Irrational eigenvalue (3 - sqrt 5)/2 of D = [[2, 1], [1, 1]]: lambda^1 is
    // a secondary resonance of the y-block, so a g X term can survive.
    const std::string phi2 = num((3.0 - std::sqrt(5.0)) / 2.0);

    const std::vector<Seed> seeds = {
        {"pd", {"X", "Y", "Z"}, 0, {"1/2*X", "1/4*Y + X^2", "1/8*Z + X*Y + X^3"}, "vvv", 0, 3, 1, "{}", "q0-r0-s3", {}},
        {"q1-y-only", {"X", "Y", "Z"}, 1, {"X^2", "X*Y", "X*Z"}, "czz", 0, 0, 1, "{X=0}", "q1-r0-s0", {}, true},
        {"q1-y-eps", {"Y", "X", "Z"}, 1, {"Y^2", "1/2*X", "3*Y*Z + X^2 + Y"}, "cvz", 0, 1, 1, "{Y=0}", "q1-r0-s1",
         {{"epsilon", 1}}},
        {"q1-y-noeps", {"Y", "X", "Z"}, 1, {"2*Y^3", "1/2*X", "Y*Z + X^2*Y"}, "cvz", 0, 1, 1, "{Y=0}", "q1-r0-s1",
         {{"epsilon", 0}}},
        {"q1-z-crit", {"Z", "X", "Y"}, 1, {"2*Z^2", "1/2*X", "1/3*Y"}, "cvv", 0, 2, 1, "{Z=0}", "q1-r0-s2", {{"rho", 0}}},
        {"q1-z-crit-rho", {"Z", "X", "Y"}, 1, {"Z^2", "1/2*X", "1/4*Y + 5*X^2"}, "cvv", 0, 2, 1, "{Z=0}", "q1-r0-s2",
         {{"rho", 1}}},
        {"q1-u-only", {"X", "Y", "Z"}, 1, {"1/2*X", "X*Y", "X*Z"}, "czz", 1, 1, 1, "{X=0}", "q1-r1-s1", {}, true},
        {"q1-u-x", {"X", "Y", "Z"}, 1, {"1/2*X", "1/3*Y", "2*X*Z + Y^2"}, "cvz", 1, 2, 1, "{X=0}", "q1-r1-s2-X",
         {{"rho", 0}}},
        {"q1-u-x-rho", {"X", "Y", "Z"}, 1, {"1/2*X", "1/4*Y + X^2", "X*Z + Y^2 + X*Y"}, "cvz", 1, 2, 1, "{X=0}",
         "q1-r1-s2-X", {{"rho", 1}}},
        {"q1-u-y", {"Y", "X", "Z"}, 1, {"1/3*Y", "1/2*X", "Y^2*Z + X^2"}, "cvz", 1, 2, 1, "{Y=0}", "q1-r1-s2-Y", {}},
        {"q2-yy", {"X", "Y", "Z"}, 2, {"2*X^2*Y", "3*Y^3", "5*X*Z + X^2*Y"}, "ccz", 0, 0, 1, "{XY=0}", "q2-r0-s0", {}},
        {"q2-yy-rank1", {"X", "Y", "Z"}, 2, {"2*X^2*Y", "3*X*Y^2", "5*X*Y*Z + X^2"}, "ccz", 0, 0, 1, "{XY=0}", "q2-r0-s0",
         {}},
        {"q2-v-yy", {"Y", "Z", "X"}, 2, {"2*Y^2*Z", "3*Y*Z", "1/2*X"}, "ccv", 0, 1, 1, "{YZ=0}", "q2-r0-s1", {{"g", 0}}},
        {"q2-v-yy-g", {"Y", "Z", "X"}, 2, {"2*Y^2*Z*(1 + X)", "3*Y*Z", phi2 + "*X"}, "ccv", 0, 1, 1, "{YZ=0}", "q2-r0-s1",
         {{"g", 1}}},
        {"q2-u-y", {"X", "Y", "Z"}, 2, {"1/2*X", "3*X*Y^2", "5*Y*Z + X^2 + Y"}, "ccz", 1, 1, 1, "{XY=0}", "q2-r1-s1",
         {{"epsilon", 1}}},
        {"q2-u-y-noeps", {"X", "Y", "Z"}, 2, {"1/2*X", "X*Y^2", "2*X*Z + Y^2"}, "ccz", 1, 1, 1, "{XY=0}", "q2-r1-s1",
         {{"epsilon", 0}}},
        {"q2-u-v-y", {"X", "Z", "Y"}, 2, {"1/2*X", "2*X*Z^2", "1/3*Y"}, "ccv", 1, 2, 1, "{XZ=0}", "q2-r1-s2-X", {{"rho", 0}}},
        {"q2-u-v-y-rho", {"X", "Z", "Y"}, 2, {"1/2*X", "X*Z^2", "1/4*Y + 7*X^2"}, "ccv", 1, 2, 1, "{XZ=0}", "q2-r1-s2-X",
         {{"rho", 1}}},
        {"q2-v-u-y", {"Y", "Z", "X"}, 2, {"1/3*Y", "2*Y*Z^2", "1/2*X"}, "ccv", 1, 2, 1, "{YZ=0}", "q2-r1-s2-Y", {}},
        {"q2-uu", {"X", "Y", "Z"}, 2, {"1/2*X", "1/3*Y", "2*X*Y*Z + X^2"}, "ccz", 2, 2, 1, "{XY=0}", "q2-r2-s2-eta1", {}},
        {"q2-uu-swap", {"X", "Y", "Z"}, 2, {"1/2*Y", "1/3*X", "2*X*Y*Z + Y^2"}, "ccz", 2, 2, 2, "{XY=0}", "q2-r2-s2-eta2",
         {}},
        {"q3-yyy", {"X", "Y", "Z"}, 3, {"2*X^2*Y", "3*Y^2*Z", "5*Z^2*X"}, "ccc", 0, 0, 1, "{XYZ=0}", "q3-r0-s0", {}},
        {"q3-u-yy", {"X", "Y", "Z"}, 3, {"1/2*X", "2*X*Y^2*Z", "3*Y*Z"}, "ccc", 1, 1, 1, "{XYZ=0}", "q3-r1-s1", {{"g", 0}}},
        {"q3-u-yy-g", {"X", "Y", "Z"}, 3, {phi2 + "*X", "2*X*Y^2*Z*(1 + X)", "3*Y*Z"}, "ccc", 1, 1, 1, "{XYZ=0}",
         "q3-r1-s1", {{"g", 1}}},
        {"q3-uu-y", {"X", "Y", "Z"}, 3, {"1/2*X", "1/3*Y", "2*X*Y*Z^2"}, "ccc", 2, 2, 1, "{XYZ=0}", "q3-r2-s2-eta1", {}},
        {"q3-uu-swap-y", {"X", "Y", "Z"}, 3, {"1/2*Y", "1/3*X", "2*X*Y*Z^2"}, "ccc", 2, 2, 2, "{XYZ=0}", "q3-r2-s2-eta2",
         {}},
    };

    std::vector<TableFixture> out;
    for (const auto& sd : seeds) {
        bool is_float = false;
        for (const auto& c : sd.comps) is_float = is_float || c.find('.') != std::string::npos;
        Ring ring{is_float ? Mode::Float : Mode::Exact, 1e-12};
        TableFixture fx;
        fx.name = sd.name;
        fx.variables = sd.vars;
        fx.germ.critical_count = sd.q;
        for (const auto& c : sd.comps) fx.germ.comps.push_back(parse_expr(c, sd.vars, trunc, ring));
        fx.expected.q = sd.q;
        fx.expected.r = sd.r;
        fx.expected.s = sd.s;
        fx.expected.eta = sd.eta;
        fx.expected.crit_shape = sd.crit;
        fx.expected.form_id = sd.form_id;
        fx.expected.flags = sd.flags;
        fx.expected.unresolved = sd.unresolved;
        out.push_back(fx);
        if (sd.unresolved) continue;

        TableFixture px = fx;
        px.name = std::string(sd.name) + "-perturbed";
        px.perturbed = true;
        SeriesMap psi = perturbation(sd.vars, sd.roles, trunc, ring);
        px.germ.comps = compose(psi, compose(fx.germ.comps, invert_diffeo(psi)));
        out.push_back(px);
    }
    return out;
}

}  // namespace rigidnf
