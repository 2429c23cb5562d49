#pragma once

#include "rigidnf/engine.hpp"
#include "rigidnf/germ.hpp"
#include "rigidnf/resonance.hpp"

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rigidnf {

enum class PassKind { Linear, Jordan, Primary, Secondary, Affine };

const char* pass_name(PassKind k);
/// Accepts linear|jordan|primary|secondary|affine; "all" maps to Affine.
std::optional<PassKind> parse_pass(const std::string& name);

/// Bookkeeping of one stage, kept for reports and instrumented tests.
struct StageInfo {
    std::string name;
    bool applied = false;           // false when the stage had nothing to act on
    int engine_degree = 0;          // degrees solved by the formal engine
    long tail_iterations = 0;
    double tail_increment = 0;      // last increment of the tail sum
    double residual = 0;
    std::vector<std::pair<int, MultiIndex>> key_order;
};

/// new = phi(old) and normalized = phi o f o phi^{-1}.
struct ConjugacyCertificate {
    SeriesMap phi;
    GermMap normalized;
    double residual = 0;
    std::vector<std::string> passes_applied;
    BlockStructure blocks;          // block data of `normalized`
    std::optional<ResonanceReport> resonances;
    std::vector<std::string> warnings;
    std::vector<StageInfo> stages;
};

struct NormalizeOptions {
    Tolerances tol;
    std::optional<DeclaredResonances> declared;
    PassKind last = PassKind::Affine;  // stop after this stage
};

/// Kills theta in the u-block: u_k o f becomes exactly alpha_k u_{sigma(k)}.
/// The u-block must come first; only r, sigma and alpha of `blocks` are read.
ConjugacyCertificate pass_linear(const GermMap& f, const BlockStructure& blocks, const Tolerances& tol);
/// v-part becomes mu v + rho(u, v), rho triangular with resonant terms only.
ConjugacyCertificate pass_primary(const GermMap& f, const BlockStructure& blocks, const ResonanceReport& res,
                                  const Tolerances& tol);
/// y-part becomes beta x^E y^D (1 + g(x)), g with secondary resonant terms only.
ConjugacyCertificate pass_secondary(const GermMap& f, const BlockStructure& blocks, const ResonanceReport& res,
                                    const Tolerances& tol);
/// Scalar z only: z-part becomes nu x^l y^m z + omega(x, y).
ConjugacyCertificate pass_affine(const GermMap& f, const BlockStructure& blocks, const Tolerances& tol);

ConjugacyCertificate normalize_full(const GermMap& f, const NormalizeOptions& opts = {});

/// Largest coefficient of phi o f - f_tilde o phi.
double verify_conjugacy(const GermMap& f, const GermMap& f_tilde, const SeriesMap& phi);

/// The operator psi -> (1 + eps) psi o f + omega * int_0^1 (d_z psi)(f(x, y, tau z)) (1 + zeta(x, y, tau z)) dtau
/// of the affine pass, for f with scalar last coordinate z, h = nu x^l y^m z (1 + eps) + omega.
struct AffineData {
    int z = 0;
    Coeff nu;
    MultiIndex monomial;  // x^l y^m, no z
    Series eps, zeta, omega;
};
AffineData affine_data(const GermMap& f, const BlockStructure& blocks);
Series affine_operator(const AffineData& a, const GermMap& f, const Series& psi);

/// Both sides of int_0^1 d/dtau (psi o f)(x, y, tau z) dtau = psi o f - (psi o f)|_{z=0};
/// the left side goes through the chain rule and the tau integral.
Series tau_chain_integral(const Series& psi, const SeriesMap& f, int z);
Series endpoint_difference(const Series& psi, const SeriesMap& f, int z);

/// Shape contracts of the normal form after `after`; returns the violations.
std::vector<std::string> check_shape(const GermMap& g, const BlockStructure& b, const ResonanceReport* res,
                                     PassKind after, double tol);
/// x o f depends only on x, and y o f only on (x, y).
bool preserves_foliations(const GermMap& g, const BlockStructure& b, double tol);

/// Monomials that survive in the normal form: v-part terms beyond the linear
/// v-block, and the non-constant terms of the y-part units.
struct NormalFormSupport {
    std::set<std::pair<int, MultiIndex>> v_terms;
    std::set<std::pair<int, MultiIndex>> y_terms;
    bool operator==(const NormalFormSupport&) const = default;
};
NormalFormSupport normal_form_support(const GermMap& g, const BlockStructure& b, double threshold);
std::string support_str(const NormalFormSupport& s);

/// Independent cross-check: solves the conjugacy equation degree by degree as
/// one dense least-norm system in every phi coefficient and every free
/// normal-form coefficient, without resonance or weight bookkeeping. Float
/// arithmetic; meant for d <= 3 and N <= 5.
struct OracleResult {
    ConjugacyCertificate cert;
    NormalFormSupport support;
};
OracleResult oracle_solve(const GermMap& f, const Tolerances& tol = {});

}  // namespace rigidnf
