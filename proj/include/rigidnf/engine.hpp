#pragma once

#include "rigidnf/series.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace rigidnf {

/// A conjugacy equation solved one total degree at a time. The unknowns are
/// `ncomp` series phi^k and, at slot-eligible keys, free normal-form
/// coefficients ("slots"). At degree D the residual is affine in the degree-D
/// unknowns with linear part
///
///   J(phi)^k = c_lin [phi^k o L]_D + c_z [omega_lin * tau_z(d_z phi^k o L)]_D
///              + sum_j mix(k, j) phi^j_D - slot^k_D
///
/// where L is the linear part of the germ. Keys are grouped into strongly
/// connected blocks of J and solved in dependency order. A block whose keys
/// are all slot-eligible takes phi = 0 and absorbs the residual into its
/// slots; any other block must be regular.
struct EngineProblem {
    std::string stage;
    int dim = 0;
    int ncomp = 0;
    int trunc = 0;        // truncation of phi and slots
    int min_degree = 1;
    int max_degree = 0;
    Ring ring;
    double rank_tol = 0;  // float pivot threshold
    CMatrix lin;
    Coeff c_lin = Coeff(1.0);
    int z_var = -1;       // < 0: no integral term
    Coeff c_z = Coeff(0.0);
    Series omega_lin;
    CMatrix mix;
    /// Coefficients preset in phi and never solved for.
    std::vector<std::vector<std::pair<MultiIndex, Coeff>>> fixed;
    std::function<bool(int k, const MultiIndex& n)> slot_eligible;
    /// Full residual for the current phi and slots. Only its degree-D part is
    /// read while degree D is being solved.
    std::function<SeriesMap(const SeriesMap& phi, const SeriesMap& slots)> residual;
};

struct EngineResult {
    SeriesMap phi, slots;
    /// Keys (k, n) in the order their values were fixed.
    std::vector<std::pair<int, MultiIndex>> order;
};

EngineResult solve_by_degree(const EngineProblem& p);

}  // namespace rigidnf
