#pragma once

// Germs used by the residual, shape and idempotence suites. Critical
// coordinates come first; `exact` marks the ones with rational eigenvalues.

#include "support.hpp"

#include <string>
#include <vector>

namespace testsupport {

struct PipelineFixture {
    std::string name;
    std::vector<std::string> vars;
    std::vector<std::string> comps;
    int q = 0;
    bool exact = true;

    rigidnf::GermMap build(int N, rigidnf::Ring ring) const { return germ(vars, comps, q, N, ring); }
};

inline const std::vector<PipelineFixture>& pipeline_fixtures() {
    static const std::vector<PipelineFixture> all = {
        {"primary_u2", {"u", "v"}, {"u/2", "v/4 + u^2 + u^3 + u*v"}, 1},
        {"linear_theta", {"u", "y"}, {"u/2*(1 + y)", "u*y^2"}, 2},
        {"favre", {"x", "y"}, {"3/10*x", "x*y^2*(1 + x + y + x*y)"}, 2},
        {"pd_2d", {"x", "y"}, {"x/2 + y^2", "y/3 + x^2 + x*y"}, 0},
        {"affine_3d", {"x", "y", "z"}, {"2/5*x", "x*y^2", "x*y*z*(1 + z) + x^2"}, 2},
        {"secondary_d21", {"x", "y", "z"}, {"(1 - 1.4142135623730951)*x", "x*y^2*z*(1 + x + y)", "x^2*y*(1 + x^2)"}, 3,
         false},
        {"pd_3d", {"x", "y", "z"}, {"x/2 + y*z", "y/4 + x^2 + x*z", "z/8 + x*y + x^3 + z^2"}, 0},
        {"removable_terms", {"u", "y", "v"}, {"u/2*(1 + u + v)", "3*u*y^2*(1 + u + y + v^2)", "v/4 + u^2 + u^3 + u*v + v^2 + y*v"}, 2},
        {"table_yz", {"Y", "Z", "X"}, {"Y/3 + Y^2", "Y*Z^2*(1 + X)", "X/2 + Y*X"}, 2},
        {"table_swap", {"X", "Y", "Z"}, {"Y/2*(1 + Z)", "X/3", "X*Y*Z^2*(1 + X*Z)"}, 3},
        {"d4_affine", {"u", "y", "v", "z"}, {"u/2*(1 + v)", "u*y^2*(1 + u)", "v/5 + u^2", "u*z*(1 + z) + y^2"}, 2},
        {"d4_swap", {"u1", "u2", "y", "v"}, {"u2/2", "u1/3", "u1*u2*y^2*(1 + v)", "v/5 + u1*u2 + v^2"}, 3},
        {"d4_pd", {"x", "y", "z", "w"}, {"x/2", "y/4 + x^2", "z/8 + x*y + x^3", "w/3 + z^2 + x*w"}, 0},
    };
    return all;
}

}  // namespace testsupport
