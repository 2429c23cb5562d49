#pragma once

#include "rigidnf/germ.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rigidnf {

/// Monomial u^{n_u} v^{n_v} resonant for v-coordinate k (0-based).
struct PrimaryResonance {
    int k = 0;
    MultiIndex n_u, n_v;
    MultiIndex n_x() const;
    bool operator==(const PrimaryResonance&) const = default;
};

/// Monomial x^{n_x} with x = (u, v).
struct SecondaryResonance {
    MultiIndex n_x;
    bool operator==(const SecondaryResonance&) const = default;
};

/// Resonances supplied by the input file. They replace detection.
struct DeclaredResonances {
    std::optional<std::vector<std::pair<int, MultiIndex>>> primary;  // (k, n_x), k 1-based
    std::optional<std::vector<MultiIndex>> secondary;
};

struct ResonanceReport {
    std::vector<PrimaryResonance> primary;
    std::vector<SecondaryResonance> secondary;
    int degree_bound = 0;
    int eta = 1;
    Mode mode = Mode::Float;
    double tol_res = 1e-9;
    bool primary_declared = false, secondary_declared = false;
    std::vector<std::string> warnings;

    bool is_primary(int k, const MultiIndex& n_x) const;
    bool is_secondary(const MultiIndex& n_x) const;
};

/// Eigenvalue of the eta-th iterate on each u coordinate: the product of the
/// alphas of its cycle raised to eta / (cycle length).
std::vector<Coeff> xi_values(const BlockStructure& b);
/// (xi, mu^eta): the eigenvalues of the eta-th iterate on x = (u, v).
std::vector<Coeff> eta_eigenvalues(const BlockStructure& b);
/// Largest modulus among nonzero eigenvalues of df at the origin.
double nonzero_spectral_radius(const BlockStructure& b);

/// Smallest N with Lambda^N below every target modulus; no resonance has
/// degree N or more. Needs a split block structure.
int degree_bound(const BlockStructure& b);

std::vector<PrimaryResonance> primary_resonances(const BlockStructure& b, Mode mode, double tol_res, int max_degree,
                                                 std::vector<std::string>* warnings = nullptr);
std::vector<SecondaryResonance> secondary_resonances(const BlockStructure& b, Mode mode, double tol_res, int max_degree,
                                                     std::vector<std::string>* warnings = nullptr);

ResonanceReport analyze_resonances(const BlockStructure& b, Mode mode, double tol_res, const DeclaredResonances* declared = nullptr);

}  // namespace rigidnf
