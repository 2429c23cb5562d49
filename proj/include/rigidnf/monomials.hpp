#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace rigidnf {

using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& n);
/// Entrywise order.
bool divides(const MultiIndex& m, const MultiIndex& n);
/// Graded order: compare |n| first, then the exponents lexicographically.
bool graded_less(const MultiIndex& m, const MultiIndex& n);
MultiIndex unit_index(int dim, int var);

/// Enumeration of all monomials in `dim` variables of degree <= trunc, sorted
/// by the graded order. Rank of a monomial does not depend on trunc, so the
/// table for a smaller trunc is a prefix of the one for a larger trunc.
class MonomialTable {
public:
    static std::shared_ptr<const MonomialTable> get(int dim, int trunc);

    int dim() const { return dim_; }
    int trunc() const { return trunc_; }
    int size() const { return static_cast<int>(exps_.size()); }
    const MultiIndex& exps(int i) const { return exps_[i]; }
    int degree(int i) const { return deg_[i]; }
    /// First rank of degree D; deg_begin(trunc+1) == size().
    int deg_begin(int D) const { return D > trunc_ ? size() : start_[D]; }
    int deg_end(int D) const { return deg_begin(D + 1); }
    /// Rank of n, or -1 if |n| > trunc.
    int index(const MultiIndex& n) const;
    /// Rank of the product of monomials i and j, or -1 past trunc.
    int mul(int i, int j) const;

    MonomialTable(int dim, int trunc);

private:
    std::uint64_t key(const MultiIndex& n) const;

    int dim_, trunc_;
    std::vector<MultiIndex> exps_;
    std::vector<int> deg_;
    std::vector<int> start_;
    std::unordered_map<std::uint64_t, int> lookup_;
    std::vector<int> product_;  // dense product table when small enough
};

}  // namespace rigidnf
