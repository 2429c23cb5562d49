#pragma once

#include "rigidnf/coefficient.hpp"
#include "rigidnf/linalg.hpp"
#include "rigidnf/monomials.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace rigidnf {

/// Arithmetic context shared by every series of a run.
struct Ring {
    Mode mode = Mode::Float;
    double tol = 1e-12;  // coefficient zero-test in float mode
};

/// Sparse multivariate power series truncated at total degree `trunc`.
/// Terms are kept sorted by monomial rank (graded order) and pruned of zeros.
class Series {
public:
    using Term = std::pair<int, Coeff>;

    Series() = default;
    Series(int dim, int trunc, Ring ring);

    static Series constant(int dim, int trunc, Ring ring, const Coeff& c);
    static Series variable(int dim, int trunc, Ring ring, int var);
    static Series monomial(int dim, int trunc, Ring ring, const MultiIndex& n, const Coeff& c);
    /// Sums duplicate exponents and drops terms above trunc.
    static Series from_terms(int dim, int trunc, Ring ring, const std::vector<std::pair<MultiIndex, Coeff>>& terms);
    /// Terms given by rank; sorted, merged and pruned here.
    static Series from_ranked(int dim, int trunc, Ring ring, std::vector<Term> terms);

    int dim() const { return dim_; }
    int trunc() const { return trunc_; }
    const Ring& ring() const { return ring_; }
    Mode mode() const { return ring_.mode; }
    const MonomialTable& table() const { return *tab_; }
    const std::vector<Term>& terms() const { return terms_; }
    const MultiIndex& exps(int rank) const { return tab_->exps(rank); }
    int degree_of(int rank) const { return tab_->degree(rank); }

    Coeff coeff(const MultiIndex& n) const;
    Coeff coeff_rank(int rank) const;
    Coeff constant_term() const;
    bool is_zero() const { return terms_.empty(); }
    /// Lowest degree present, trunc+1 for the zero series.
    int order() const;
    bool depends_on(int var) const;

    Series homogeneous(int D) const;
    Series up_to(int D) const;
    Series above(int D) const;
    /// Lowering drops terms. Raising only widens the cutoff, claiming that the
    /// missing degrees are zero; callers use it when a factor of positive order
    /// makes the extra degrees exact.
    Series with_trunc(int n) const;

    void add_term(const MultiIndex& n, const Coeff& c);
    double max_abs() const;

    Series operator-() const;
    Series operator+(const Series& o) const;
    Series operator-(const Series& o) const;
    Series operator*(const Series& o) const;
    Series scaled(const Coeff& c) const;
    Series operator+(const Coeff& c) const;

    bool equals(const Series& o) const;

    std::string str(const std::vector<std::string>& names) const;

private:
    void prune();

    int dim_ = 0, trunc_ = 0;
    Ring ring_;
    std::shared_ptr<const MonomialTable> tab_;
    std::vector<Term> terms_;
};

using SeriesMap = std::vector<Series>;

Series add(const Series& a, const Series& b);
Series mul(const Series& a, const Series& b);
Series power(const Series& a, long e);
/// outer(inner_1, ..., inner_d). Inner series must vanish at the origin.
Series compose(const Series& outer, const SeriesMap& inner);
SeriesMap compose(const SeriesMap& outer, const SeriesMap& inner);
/// Component k is prod_l vars_l^{M(l,k)}.
SeriesMap monomial_pow(const SeriesMap& vars, const ExponentMatrix& M);
Series unit_log(const Series& u);
Series unit_exp(const Series& s);
Series unit_inverse(const Series& u);
/// Component k is prod_l units_l^{Q(l,k)}, computed as exp(sum_l Q(l,k) log units_l).
SeriesMap unit_pow_matrix(const SeriesMap& units, const ExponentMatrix& Q);
SeriesMap invert_diffeo(const SeriesMap& f);
Series partial_derivative(const Series& s, int var);
/// Replaces x_var by tau*x_var and integrates over tau in [0,1].
Series tau_integral(const Series& s, int var);

SeriesMap identity_map(int dim, int trunc, Ring ring);
/// Linear part: L(i,j) = coefficient of x_j in component i.
CMatrix linear_part(const SeriesMap& f);
SeriesMap linear_map(const CMatrix& L, int trunc, Ring ring);
/// Largest coefficient modulus of a - b over all components.
double max_abs_diff(const SeriesMap& a, const SeriesMap& b);
bool exactly_equal(const SeriesMap& a, const SeriesMap& b);
SeriesMap with_trunc(const SeriesMap& f, int n);

}  // namespace rigidnf
