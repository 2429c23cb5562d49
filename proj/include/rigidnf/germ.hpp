#pragma once

#include "rigidnf/linalg.hpp"
#include "rigidnf/series.hpp"

#include <string>
#include <vector>

namespace rigidnf {

/// Numerical knobs of a run. Only `coeff` matters in exact mode, and only
/// for mixed-mode safety.
struct Tolerances {
    double coeff = 1e-12;     // coefficient zero-test
    double res = 1e-9;        // resonance relation test
    double eig = 1e-9;        // eigenvalue clustering and |lambda| vs 1
    double residual = 1e-8;   // acceptable conjugacy residual
    double series = 1e-14;    // tail stopping increment
    long max_iter = 5000;     // tail iteration cap
};

/// A holomorphic germ fixing the origin, truncated at a common degree. The
/// first `critical_count` coordinates are the critical hyperplanes.
struct GermMap {
    SeriesMap comps;
    int critical_count = 0;

    int dim() const { return static_cast<int>(comps.size()); }
    int trunc() const { return comps.empty() ? 0 : comps[0].trunc(); }
    Ring ring() const { return comps.empty() ? Ring{} : comps[0].ring(); }
    Mode mode() const { return ring().mode; }
};

/// det(df) and the monomial-times-unit data of each critical component.
struct RigidityCertificate {
    MultiIndex jacobian_monomial;        // exponents on the critical variables
    Coeff jacobian_unit_constant;        // value at 0 of det(df) / monomial
    std::vector<MultiIndex> component_monomials;
    std::vector<Coeff> component_unit_constants;
    ExponentMatrix pullback;             // column k: exponents of component k
    int verified_to_degree = 0;
};

/// Coordinates are reordered as (u, v, y, z) once the pipeline has split the
/// germ: u periodic critical, v non-critical with nonzero eigenvalue, y
/// non-periodic critical, z non-critical with zero eigenvalue. Before the
/// Jordan split the order is (u, y, t) with t = (v, z) not yet separated.
struct BlockStructure {
    int dim = 0;
    int q = 0, r = 0, p = 0;
    int e = 0, s = 0;
    bool split = false;              // true once v and z are separated
    std::vector<int> perm;           // prepared coordinate i is input coordinate perm[i]
    ExponentMatrix A, B, C, D;       // A = [[B,C],[0,D]] in prepared order
    std::vector<int> sigma;          // u-component k has monomial u_{sigma[k]}
    std::vector<std::vector<int>> cycles;
    int eta = 1;
    std::vector<Coeff> alpha, beta;  // unit constants of u and y components
    std::vector<Coeff> mu;           // eigenvalues on v (after split)
    CMatrix jordan;                  // linear part on v (lower triangular)

    int u0() const { return 0; }
    int v0() const { return r; }
    int y0() const { return split ? r + e : r; }
    int z0() const { return split ? r + e + p : r + p; }
    int t0() const { return r + p; }
    int x_dim() const { return r + e; }
};

struct ContractionInfo {
    bool contracting = false;
    double radius = 0;
    std::vector<std::complex<double>> eigenvalues;
};

Series jacobian_det(const GermMap& f);

struct MonomialUnit {
    MultiIndex monomial;
    Series unit;
};
/// s = x^m * unit with m the entrywise minimum over the support.
MonomialUnit monomial_unit_factor(const Series& s);

RigidityCertificate rigidity_check(const GermMap& f);
BlockStructure detect_blocks(const GermMap& f, const RigidityCertificate& cert);
/// Reorders coordinates to the prepared order recorded in `blocks`.
GermMap apply_prepared_order(const GermMap& f, const BlockStructure& blocks);
ContractionInfo is_contracting(const GermMap& f, double tol_eig);
/// Exponent matrix of a monomial germ (each component a monomial times a
/// nonzero constant); column k holds the exponents of component k.
ExponentMatrix pullback_matrix(const GermMap& f, int q);

struct JordanResult {
    GermMap germ;
    SeriesMap phi;                   // linear change applied (new = phi(old))
    BlockStructure blocks;
    std::vector<std::string> warnings;
};
/// Splits t into (v, z) and puts the t-block of the linear part in ordered
/// lower-triangular Jordan form. Requires the prepared order.
JordanResult jordan_split(const GermMap& f, const BlockStructure& blocks, double tol_eig);

/// Eigenvector chains of a square matrix, ordered by decreasing modulus,
/// then argument, then discovery order. Columns of `basis` are the new
/// coordinate directions; in the new basis the matrix is `jordan`.
struct JordanBasis {
    CMatrix basis;
    CMatrix jordan;
    std::vector<Coeff> eigen;        // per column
    std::vector<int> block_sizes;
    bool defective = false;
};
JordanBasis jordan_basis(const CMatrix& M, double tol_eig);

}  // namespace rigidnf
