#pragma once

#include "rigidnf/germ.hpp"
#include "rigidnf/germlang.hpp"

#include <string>
#include <vector>

namespace testsupport {

inline const rigidnf::Ring kExact{rigidnf::Mode::Exact, 1e-12};
inline const rigidnf::Ring kFloat{rigidnf::Mode::Float, 1e-12};

inline rigidnf::GermMap germ(const std::vector<std::string>& vars, const std::vector<std::string>& comps, int q, int N,
                             rigidnf::Ring ring = kExact) {
    rigidnf::GermMap g;
    g.critical_count = q;
    for (const auto& c : comps) g.comps.push_back(rigidnf::parse_expr(c, vars, N, ring));
    return g;
}

inline rigidnf::GermMap load_fixture(const std::string& name) {
    return rigidnf::parse_germ_file(rigidnf::read_text_file(std::string(RIGIDNF_FIXTURES) + "/" + name)).germ;
}

}  // namespace testsupport
