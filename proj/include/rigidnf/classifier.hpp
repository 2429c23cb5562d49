#pragma once

#include "rigidnf/normalizer.hpp"

#include <string>
#include <utility>
#include <vector>

namespace rigidnf {

/// A row of the table of normal forms of contracting rigid germs in
/// dimension 3, with the parameters read off one germ.
///
/// Table coordinates X, Y, Z are assigned as follows: coordinates with a
/// nonzero eigenvalue by decreasing modulus (ties by input index), then the
/// non-periodic critical ones, then those with zero eigenvalue.
struct ClassRow {
    int q = 0, r = 0, s = 0, eta = 1;
    std::string crit_shape;  // "{}", "{X=0}", "{XY=0}", ...
    std::string form_id;
    std::string form;        // the row's normal form as printed in the table
    bool unresolved = false;
    std::string citation;    // why an unresolved row has no explicit form

    std::vector<std::pair<std::string, Coeff>> coefficients;
    std::vector<std::pair<std::string, long>> exponents;
    std::vector<std::pair<std::string, int>> flags;  // rho, g, epsilon in {0, 1}
    std::vector<std::pair<std::string, std::string>> series;
    std::vector<std::string> relations;              // recorded side conditions
    std::vector<int> coordinates;                    // X, Y, Z as input coordinate indices

    /// Same (q, r, s, eta, crit_shape) key and form.
    bool same_row(const ClassRow& o) const {
        return q == o.q && r == o.r && s == o.s && eta == o.eta && crit_shape == o.crit_shape && form_id == o.form_id &&
               unresolved == o.unresolved;
    }
    const Coeff* coefficient(const std::string& name) const;
    long exponent(const std::string& name, long fallback = -1) const;
    int flag(const std::string& name, int fallback = -1) const;
};

/// Reads the table row of a normalized 3-dimensional germ. Free unit
/// coefficients are rescaled to 1 where a diagonal change of coordinates
/// allows it. Rows without an explicit form come back with `unresolved` set.
ClassRow classify(const ConjugacyCertificate& cert, const Tolerances& tol = {});

struct TableFixture {
    std::string name;
    std::vector<std::string> variables;
    GermMap germ;
    ClassRow expected;  // key fields and flags only
    bool perturbed = false;
};

/// One germ per row of the table, a perturbed copy of each (terms the
/// normalization has to remove), resonant variants for the rho and g flags,
/// and the two rows without an explicit form. Perturbed copies are
/// conjugated by a map that keeps the critical hyperplanes.
std::vector<TableFixture> table_fixtures(int trunc = 8);

}  // namespace rigidnf
