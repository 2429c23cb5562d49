#include "rigidnf/monomials.hpp"

#include "rigidnf/errors.hpp"

#include <map>
#include <numeric>

namespace rigidnf {

int total_degree(const MultiIndex& n) { return std::accumulate(n.begin(), n.end(), 0); }

bool divides(const MultiIndex& m, const MultiIndex& n) {
    for (size_t i = 0; i < m.size(); ++i)
        if (m[i] > n[i]) return false;
    return true;
}

bool graded_less(const MultiIndex& m, const MultiIndex& n) {
    int a = total_degree(m), b = total_degree(n);
    if (a != b) return a < b;
    return m < n;
}

MultiIndex unit_index(int dim, int var) {
    MultiIndex n(dim, 0);
    n[var] = 1;
    return n;
}

namespace {

// All exponent vectors of total degree D in lexicographically increasing order.
void compositions(int dim, int D, MultiIndex& cur, int pos, std::vector<MultiIndex>& out) {
    if (pos == dim - 1) {
        cur[pos] = D;
        out.push_back(cur);
        return;
    }
    for (int a = 0; a <= D; ++a) {
        cur[pos] = a;
        compositions(dim, D - a, cur, pos + 1, out);
    }
}

constexpr int kMaxDim = 8;
constexpr int kMaxTrunc = 255;
constexpr int kDenseProductLimit = 1600;

}  // namespace

MonomialTable::MonomialTable(int dim, int trunc) : dim_(dim), trunc_(trunc) {
    if (dim < 1 || dim > kMaxDim) fail(ErrorKind::Domain, "series dimension must be in [1, 8]");
    if (trunc < 0 || trunc > kMaxTrunc) fail(ErrorKind::Domain, "truncation degree must be in [0, 255]");
    MultiIndex cur(dim, 0);
    for (int D = 0; D <= trunc; ++D) {
        start_.push_back(static_cast<int>(exps_.size()));
        compositions(dim, D, cur, 0, exps_);
    }
    deg_.reserve(exps_.size());
    for (size_t i = 0; i < exps_.size(); ++i) {
        deg_.push_back(total_degree(exps_[i]));
        lookup_.emplace(key(exps_[i]), static_cast<int>(i));
    }
    int M = size();
    if (M <= kDenseProductLimit) {
        product_.assign(static_cast<size_t>(M) * M, -1);
        MultiIndex s(dim);
        for (int i = 0; i < M; ++i) {
            for (int j = i; j < M; ++j) {
                if (deg_[i] + deg_[j] > trunc) break;
                for (int v = 0; v < dim; ++v) s[v] = exps_[i][v] + exps_[j][v];
                int r = lookup_.at(key(s));
                product_[static_cast<size_t>(i) * M + j] = r;
                product_[static_cast<size_t>(j) * M + i] = r;
            }
        }
    }
}

std::uint64_t MonomialTable::key(const MultiIndex& n) const {
    std::uint64_t k = 0;
    for (int v = 0; v < dim_; ++v) k = (k << 8) | static_cast<std::uint64_t>(n[v]);
    return k;
}

int MonomialTable::index(const MultiIndex& n) const {
    if (static_cast<int>(n.size()) != dim_) fail(ErrorKind::Domain, "multi-index arity mismatch");
    int D = 0;
    for (int e : n) {
        if (e < 0) fail(ErrorKind::Domain, "negative exponent");
        D += e;
    }
    if (D > trunc_) return -1;
    return lookup_.at(key(n));
}

int MonomialTable::mul(int i, int j) const {
    if (deg_[i] + deg_[j] > trunc_) return -1;
    if (!product_.empty()) return product_[static_cast<size_t>(i) * size() + j];
    MultiIndex s(dim_);
    for (int v = 0; v < dim_; ++v) s[v] = exps_[i][v] + exps_[j][v];
    return lookup_.at(key(s));
}

std::shared_ptr<const MonomialTable> MonomialTable::get(int dim, int trunc) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const MonomialTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{dim, trunc}];
    if (!slot) slot = std::make_shared<const MonomialTable>(dim, trunc);
    return slot;
}

}  // namespace rigidnf
