#include "rigidnf/series.hpp"

#include "rigidnf/errors.hpp"

#include <algorithm>
#include <map>

namespace rigidnf {

// Dense kernels. Every heavy operation converts its operands to a dense array
// indexed by monomial rank, works on native scalars (complex<double> or a
// Gaussian rational) and converts back.
namespace {

using CD = std::complex<double>;

inline bool nonzero(const CD& z) { return z.real() != 0.0 || z.imag() != 0.0; }
inline bool nonzero(const GaussRat& g) { return sgn(g.re) != 0 || sgn(g.im) != 0; }

inline void fma_acc(CD& acc, const CD& a, const CD& b) { acc += a * b; }

inline void fma_acc(GaussRat& acc, const GaussRat& a, const GaussRat& b) {
    thread_local mpq_class t;
    bool ar = sgn(a.im) == 0, br = sgn(b.im) == 0;
    mpq_mul(t.get_mpq_t(), a.re.get_mpq_t(), b.re.get_mpq_t());
    acc.re += t;
    if (ar && br) return;
    if (!ar && !br) {
        mpq_mul(t.get_mpq_t(), a.im.get_mpq_t(), b.im.get_mpq_t());
        acc.re -= t;
    }
    if (!br) {
        mpq_mul(t.get_mpq_t(), a.re.get_mpq_t(), b.im.get_mpq_t());
        acc.im += t;
    }
    if (!ar) {
        mpq_mul(t.get_mpq_t(), a.im.get_mpq_t(), b.re.get_mpq_t());
        acc.im += t;
    }
}

inline void scale_acc(CD& acc, const CD& a, const CD& c) { acc += a * c; }
inline void scale_acc(GaussRat& acc, const GaussRat& a, const GaussRat& c) { fma_acc(acc, a, c); }

template <class K> K zero_k();
template <> CD zero_k<CD>() { return CD(0.0, 0.0); }
template <> GaussRat zero_k<GaussRat>() { return GaussRat{mpq_class(0), mpq_class(0)}; }

template <class K> K from_coeff(const Coeff& c);
template <> CD from_coeff<CD>(const Coeff& c) { return c.to_complex(); }
template <> GaussRat from_coeff<GaussRat>(const Coeff& c) { return c.in_mode(Mode::Exact).gauss(); }

template <class K> struct Dense {
    std::vector<K> v;
    std::vector<int> nz;  // ranks with nonzero entries, ascending

    void refresh() {
        nz.clear();
        for (int i = 0; i < static_cast<int>(v.size()); ++i)
            if (nonzero(v[i])) nz.push_back(i);
    }
};

template <class K> Dense<K> to_dense(const Series& s, int M) {
    Dense<K> d;
    d.v.assign(M, zero_k<K>());
    for (const auto& [r, c] : s.terms()) {
        if (r >= M) break;
        d.v[r] = from_coeff<K>(c);
        d.nz.push_back(r);
    }
    return d;
}

template <class K> Series from_dense(const Dense<K>& d, int dim, int trunc, Ring ring) {
    std::vector<Series::Term> terms;
    for (int i = 0; i < static_cast<int>(d.v.size()); ++i)
        if (nonzero(d.v[i])) terms.emplace_back(i, Coeff(d.v[i]));
    return Series::from_ranked(dim, trunc, ring, std::move(terms));
}

// c = a*b keeping degrees <= cap.
template <class K> Dense<K> dense_mul(const Dense<K>& a, const Dense<K>& b, const MonomialTable& tab, int cap) {
    Dense<K> c;
    c.v.assign(tab.size(), zero_k<K>());
    for (int i : a.nz) {
        int di = tab.degree(i);
        if (di > cap) break;
        int lim = tab.deg_end(cap - di);
        for (int j : b.nz) {
            if (j >= lim) break;
            fma_acc(c.v[tab.mul(i, j)], a.v[i], b.v[j]);
        }
    }
    c.refresh();
    return c;
}

template <class K> void dense_add_scaled(Dense<K>& acc, const Dense<K>& a, const K& s, int cap_rank) {
    for (int i : a.nz) {
        if (i >= cap_rank) break;
        scale_acc(acc.v[i], a.v[i], s);
    }
}

template <class K> void dense_add(Dense<K>& acc, const Dense<K>& a, int cap_rank) {
    for (int i : a.nz) {
        if (i >= cap_rank) break;
        if constexpr (std::is_same_v<K, CD>) acc.v[i] += a.v[i];
        else { acc.v[i].re += a.v[i].re; acc.v[i].im += a.v[i].im; }
    }
}

struct OuterTerm {
    const MultiIndex* e;
    Coeff c;
};

template <class K> struct Composer {
    const MonomialTable& tab;
    std::vector<Dense<K>> inner;
    std::vector<int> ord;
    std::vector<std::vector<Dense<K>>> pw;  // pw[j][e] = inner_j^e
    int d;

    const Dense<K>& power_of(int j, int e) {
        auto& p = pw[j];
        if (p.empty()) {
            Dense<K> one;
            one.v.assign(tab.size(), zero_k<K>());
            one.v[0] = from_coeff<K>(Coeff::one(std::is_same_v<K, CD> ? Mode::Float : Mode::Exact));
            one.refresh();
            p.push_back(std::move(one));
        }
        while (static_cast<int>(p.size()) <= e) p.push_back(dense_mul(p.back(), inner[j], tab, tab.trunc()));
        return p[e];
    }

    // Sum over terms (sharing exponents of variables < j) of c * prod_{l>=j} inner_l^{e_l}, degrees <= cap.
    Dense<K> eval(std::vector<OuterTerm>& terms, size_t lo, size_t hi, int j, int cap) {
        Dense<K> acc;
        acc.v.assign(tab.size(), zero_k<K>());
        int cap_rank = tab.deg_end(cap);
        if (j == d - 1) {
            for (size_t t = lo; t < hi; ++t) {
                int e = (*terms[t].e)[j];
                if (e * ord[j] > cap) continue;
                dense_add_scaled(acc, power_of(j, e), from_coeff<K>(terms[t].c), cap_rank);
            }
            acc.refresh();
            return acc;
        }
        size_t t = lo;
        while (t < hi) {
            int e = (*terms[t].e)[j];
            size_t u = t;
            while (u < hi && (*terms[u].e)[j] == e) ++u;
            int rest = cap - e * ord[j];
            if (rest >= 0) {
                Dense<K> child = eval(terms, t, u, j + 1, rest);
                if (!child.nz.empty()) {
                    if (e == 0) dense_add(acc, child, cap_rank);
                    else dense_add(acc, dense_mul(power_of(j, e), child, tab, cap), cap_rank);
                }
            }
            t = u;
        }
        acc.refresh();
        return acc;
    }
};

template <class K> Series compose_impl(const Series& outer, const SeriesMap& inner, int trunc, Ring ring) {
    int d = outer.dim();
    int inner_dim = inner[0].dim();
    auto tabp = MonomialTable::get(inner_dim, trunc);
    const auto& tab = *tabp;
    Composer<K> cp{tab, {}, {}, {}, d};
    cp.pw.resize(d);
    for (const auto& g : inner) {
        cp.inner.push_back(to_dense<K>(g, tab.size()));
        int o = g.order();
        cp.ord.push_back(std::max(1, o));
    }
    std::vector<OuterTerm> terms;
    for (const auto& [r, c] : outer.terms()) terms.push_back({&outer.exps(r), c});
    std::sort(terms.begin(), terms.end(), [](const OuterTerm& a, const OuterTerm& b) { return *a.e < *b.e; });
    Dense<K> res = cp.eval(terms, 0, terms.size(), 0, trunc);
    return from_dense(res, inner_dim, trunc, ring);
}

void check_same_dim(const Series& a, const Series& b) {
    if (a.dim() != b.dim()) fail(ErrorKind::Domain, "series dimension mismatch");
}

}  // namespace

Series::Series(int dim, int trunc, Ring ring) : dim_(dim), trunc_(trunc), ring_(ring), tab_(MonomialTable::get(dim, trunc)) {}

Series Series::constant(int dim, int trunc, Ring ring, const Coeff& c) {
    Series s(dim, trunc, ring);
    s.terms_.emplace_back(0, c.in_mode(ring.mode));
    s.prune();
    return s;
}

Series Series::variable(int dim, int trunc, Ring ring, int var) {
    if (var < 0 || var >= dim) fail(ErrorKind::Domain, "variable index out of range");
    return monomial(dim, trunc, ring, unit_index(dim, var), Coeff::one(ring.mode));
}

Series Series::monomial(int dim, int trunc, Ring ring, const MultiIndex& n, const Coeff& c) {
    Series s(dim, trunc, ring);
    int r = s.tab_->index(n);
    if (r >= 0) s.terms_.emplace_back(r, c.in_mode(ring.mode));
    s.prune();
    return s;
}

Series Series::from_terms(int dim, int trunc, Ring ring, const std::vector<std::pair<MultiIndex, Coeff>>& terms) {
    Series s(dim, trunc, ring);
    std::vector<Term> ranked;
    for (const auto& [n, c] : terms) {
        int r = s.tab_->index(n);
        if (r >= 0) ranked.emplace_back(r, c);
    }
    return from_ranked(dim, trunc, ring, std::move(ranked));
}

Series Series::from_ranked(int dim, int trunc, Ring ring, std::vector<Term> terms) {
    Series s(dim, trunc, ring);
    std::stable_sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.first < b.first; });
    for (auto& t : terms) {
        if (t.first >= s.tab_->size()) continue;
        Coeff c = t.second.in_mode(ring.mode);
        if (!s.terms_.empty() && s.terms_.back().first == t.first) s.terms_.back().second += c;
        else s.terms_.emplace_back(t.first, std::move(c));
    }
    s.prune();
    return s;
}

void Series::prune() {
    std::erase_if(terms_, [&](const Term& t) { return t.second.is_zero(ring_.tol); });
}

Coeff Series::coeff(const MultiIndex& n) const {
    int r = tab_->index(n);
    if (r < 0) return Coeff::zero(mode());
    return coeff_rank(r);
}

Coeff Series::coeff_rank(int rank) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), rank, [](const Term& t, int r) { return t.first < r; });
    if (it != terms_.end() && it->first == rank) return it->second;
    return Coeff::zero(mode());
}

Coeff Series::constant_term() const { return coeff_rank(0); }

int Series::order() const { return terms_.empty() ? trunc_ + 1 : tab_->degree(terms_.front().first); }

bool Series::depends_on(int var) const {
    for (const auto& t : terms_)
        if (exps(t.first)[var] > 0) return true;
    return false;
}

Series Series::homogeneous(int D) const {
    Series s(dim_, trunc_, ring_);
    for (const auto& t : terms_)
        if (degree_of(t.first) == D) s.terms_.push_back(t);
    return s;
}

Series Series::up_to(int D) const {
    Series s(dim_, trunc_, ring_);
    for (const auto& t : terms_)
        if (degree_of(t.first) <= D) s.terms_.push_back(t);
    return s;
}

Series Series::above(int D) const {
    Series s(dim_, trunc_, ring_);
    for (const auto& t : terms_)
        if (degree_of(t.first) > D) s.terms_.push_back(t);
    return s;
}

Series Series::with_trunc(int n) const {
    Series s(dim_, n, ring_);
    for (const auto& t : terms_)
        if (degree_of(t.first) <= n) s.terms_.push_back(t);
    return s;
}

void Series::add_term(const MultiIndex& n, const Coeff& c) {
    int r = tab_->index(n);
    if (r < 0) return;
    auto it = std::lower_bound(terms_.begin(), terms_.end(), r, [](const Term& t, int x) { return t.first < x; });
    if (it != terms_.end() && it->first == r) {
        it->second += c.in_mode(mode());
        if (it->second.is_zero(ring_.tol)) terms_.erase(it);
    } else if (!c.is_zero(ring_.tol)) {
        terms_.insert(it, Term(r, c.in_mode(mode())));
    }
}

double Series::max_abs() const {
    double m = 0;
    for (const auto& t : terms_) m = std::max(m, t.second.abs());
    return m;
}

Series Series::operator-() const {
    Series s = *this;
    for (auto& t : s.terms_) t.second = -t.second;
    return s;
}

Series Series::operator+(const Series& o) const { return add(*this, o); }
Series Series::operator-(const Series& o) const { return add(*this, -o); }
Series Series::operator*(const Series& o) const { return mul(*this, o); }

Series Series::scaled(const Coeff& c) const {
    Series s = *this;
    for (auto& t : s.terms_) t.second *= c;
    s.prune();
    return s;
}

Series Series::operator+(const Coeff& c) const { return add(*this, constant(dim_, trunc_, ring_, c)); }

bool Series::equals(const Series& o) const {
    if (dim_ != o.dim_ || trunc_ != o.trunc_) return false;
    size_t i = 0, j = 0;
    double tol = mode() == Mode::Exact && o.mode() == Mode::Exact ? 0.0 : ring_.tol;
    while (i < terms_.size() || j < o.terms_.size()) {
        if (j == o.terms_.size() || (i < terms_.size() && terms_[i].first < o.terms_[j].first)) {
            if (!terms_[i].second.is_zero(tol)) return false;
            ++i;
        } else if (i == terms_.size() || o.terms_[j].first < terms_[i].first) {
            if (!o.terms_[j].second.is_zero(tol)) return false;
            ++j;
        } else {
            if (!terms_[i].second.equals(o.terms_[j].second, tol)) return false;
            ++i, ++j;
        }
    }
    return true;
}

std::string Series::str(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [r, c] : terms_) {
        const MultiIndex& e = exps(r);
        std::string mono;
        for (int v = 0; v < dim_; ++v) {
            if (e[v] == 0) continue;
            if (!mono.empty()) mono += "*";
            mono += v < static_cast<int>(names.size()) ? names[v] : "x" + std::to_string(v + 1);
            if (e[v] > 1) mono += "^" + std::to_string(e[v]);
        }
        std::string cs = c.str();
        bool neg = false;
        if (cs[0] == '-' && cs.find_first_of("+-", 1) == std::string::npos) {
            neg = true;
            cs = cs.substr(1);
        }
        if (cs.find_first_of("+-", 1) != std::string::npos) cs = "(" + cs + ")";
        std::string term;
        if (mono.empty()) term = cs;
        else if (cs == "1" || cs == "1.0") term = mono;
        else term = cs + "*" + mono;
        if (out.empty()) out = neg ? "-" + term : term;
        else out += neg ? " - " + term : " + " + term;
    }
    return out;
}

Series add(const Series& a, const Series& b) {
    check_same_dim(a, b);
    int N = std::min(a.trunc(), b.trunc());
    Mode m = a.mode() == Mode::Exact && b.mode() == Mode::Exact ? Mode::Exact : Mode::Float;
    Ring ring{m, a.ring().tol};
    std::vector<Series::Term> terms;
    terms.reserve(a.terms().size() + b.terms().size());
    size_t i = 0, j = 0;
    const auto &ta = a.terms(), &tb = b.terms();
    while (i < ta.size() || j < tb.size()) {
        if (j == tb.size() || (i < ta.size() && ta[i].first < tb[j].first)) terms.push_back(ta[i++]);
        else if (i == ta.size() || tb[j].first < ta[i].first) terms.push_back(tb[j++]);
        else {
            terms.emplace_back(ta[i].first, ta[i].second + tb[j].second);
            ++i, ++j;
        }
    }
    return Series::from_ranked(a.dim(), N, ring, std::move(terms));
}

Series mul(const Series& a, const Series& b) {
    check_same_dim(a, b);
    int N = std::min(a.trunc(), b.trunc());
    Mode m = a.mode() == Mode::Exact && b.mode() == Mode::Exact ? Mode::Exact : Mode::Float;
    Ring ring{m, a.ring().tol};
    auto tab = MonomialTable::get(a.dim(), N);
    if (m == Mode::Float) {
        auto r = dense_mul(to_dense<CD>(a, tab->size()), to_dense<CD>(b, tab->size()), *tab, N);
        return from_dense(r, a.dim(), N, ring);
    }
    auto r = dense_mul(to_dense<GaussRat>(a, tab->size()), to_dense<GaussRat>(b, tab->size()), *tab, N);
    return from_dense(r, a.dim(), N, ring);
}

Series power(const Series& a, long e) {
    if (e < 0) fail(ErrorKind::Domain, "negative power of a series");
    Series result = Series::constant(a.dim(), a.trunc(), a.ring(), Coeff::one(a.mode()));
    Series base = a;
    while (e) {
        if (e & 1) result = mul(result, base);
        e >>= 1;
        if (e) base = mul(base, base);
    }
    return result;
}

Series compose(const Series& outer, const SeriesMap& inner) {
    if (static_cast<int>(inner.size()) != outer.dim()) fail(ErrorKind::Domain, "compose: inner arity does not match outer dimension");
    if (inner.empty()) fail(ErrorKind::Domain, "compose: empty inner tuple");
    int N = outer.trunc();
    bool exact = outer.mode() == Mode::Exact;
    for (const auto& g : inner) {
        if (g.dim() != inner[0].dim()) fail(ErrorKind::Domain, "compose: inner series of different dimensions");
        if (!g.constant_term().is_zero(g.ring().tol)) fail(ErrorKind::Domain, "compose: inner series has a nonzero constant term");
        N = std::min(N, g.trunc());
        exact = exact && g.mode() == Mode::Exact;
    }
    Ring ring{exact ? Mode::Exact : Mode::Float, outer.ring().tol};
    // Drop a tolerance-zero constant before handing the inner tuple to the kernel.
    SeriesMap in = inner;
    for (auto& g : in)
        if (!g.terms().empty() && g.terms().front().first == 0) g = g.above(0);
    if (exact) return compose_impl<GaussRat>(outer, in, N, ring);
    return compose_impl<CD>(outer, in, N, ring);
}

SeriesMap compose(const SeriesMap& outer, const SeriesMap& inner) {
    SeriesMap out;
    out.reserve(outer.size());
    for (const auto& s : outer) out.push_back(compose(s, inner));
    return out;
}

SeriesMap monomial_pow(const SeriesMap& vars, const ExponentMatrix& M) {
    if (M.rows() != static_cast<int>(vars.size())) fail(ErrorKind::Domain, "monomial_pow: row count must equal the number of series");
    if (!M.is_nonneg_integer()) fail(ErrorKind::Domain, "monomial_pow: exponent matrix has a negative or fractional entry");
    if (vars.empty()) fail(ErrorKind::Domain, "monomial_pow: empty input");
    SeriesMap out;
    for (int k = 0; k < M.cols(); ++k) {
        Series acc = Series::constant(vars[0].dim(), vars[0].trunc(), vars[0].ring(), Coeff::one(vars[0].mode()));
        for (int l = 0; l < M.rows(); ++l) {
            long e = M.int_at(l, k);
            if (e) acc = mul(acc, power(vars[l], e));
        }
        out.push_back(std::move(acc));
    }
    return out;
}

Series unit_log(const Series& u) {
    if (!u.constant_term().is_one(u.ring().tol)) fail(ErrorKind::Domain, "unit_log: constant term must be 1");
    Series w = u.above(0);
    Series acc(u.dim(), u.trunc(), u.ring());
    Series wk = w;
    for (int k = 1; k <= u.trunc() && !wk.is_zero(); ++k) {
        Coeff c = Coeff::rational(mpq_class(k % 2 ? 1 : -1, k), u.mode());
        acc = add(acc, wk.scaled(c));
        wk = mul(wk, w);
    }
    return acc;
}

Series unit_exp(const Series& s) {
    if (!s.constant_term().is_zero(s.ring().tol)) fail(ErrorKind::Domain, "unit_exp: constant term must be 0");
    Series w = s.above(0);
    Series acc = Series::constant(s.dim(), s.trunc(), s.ring(), Coeff::one(s.mode()));
    Series wk = w;
    mpz_class fact = 1;
    for (int k = 1; k <= s.trunc() && !wk.is_zero(); ++k) {
        fact *= k;
        acc = add(acc, wk.scaled(Coeff::rational(mpq_class(mpz_class(1), fact), s.mode())));
        wk = mul(wk, w);
    }
    return acc;
}

Series unit_inverse(const Series& u) {
    Coeff c = u.constant_term();
    if (c.is_zero(u.ring().tol)) fail(ErrorKind::Domain, "unit_inverse: constant term is zero");
    Coeff ci = Coeff::one(u.mode()) / c;
    Series w = u.above(0).scaled(ci);  // u = c(1 + w)
    Series acc = Series::constant(u.dim(), u.trunc(), u.ring(), Coeff::one(u.mode()));
    Series mw = -w, wk = mw;
    for (int k = 1; k <= u.trunc() && !wk.is_zero(); ++k) {
        acc = add(acc, wk);
        wk = mul(wk, mw);
    }
    return acc.scaled(ci);
}

SeriesMap unit_pow_matrix(const SeriesMap& units, const ExponentMatrix& Q) {
    if (Q.rows() != static_cast<int>(units.size())) fail(ErrorKind::Domain, "unit_pow_matrix: row count must equal the number of units");
    if (units.empty()) fail(ErrorKind::Domain, "unit_pow_matrix: empty input");
    SeriesMap logs;
    for (const auto& u : units) logs.push_back(unit_log(u));
    SeriesMap out;
    for (int k = 0; k < Q.cols(); ++k) {
        Series acc(units[0].dim(), units[0].trunc(), units[0].ring());
        for (int l = 0; l < Q.rows(); ++l)
            if (sgn(Q(l, k)) != 0) acc = add(acc, logs[l].scaled(Coeff::rational(Q(l, k), units[0].mode())));
        out.push_back(unit_exp(acc));
    }
    return out;
}

SeriesMap identity_map(int dim, int trunc, Ring ring) {
    SeriesMap id;
    for (int i = 0; i < dim; ++i) id.push_back(Series::variable(dim, trunc, ring, i));
    return id;
}

CMatrix linear_part(const SeriesMap& f) {
    int n = static_cast<int>(f.size());
    int d = n ? f[0].dim() : 0;
    CMatrix L(n, d, n ? f[0].mode() : Mode::Float);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) L(i, j) = f[i].coeff(unit_index(d, j));
    return L;
}

SeriesMap linear_map(const CMatrix& L, int trunc, Ring ring) {
    SeriesMap out;
    for (int i = 0; i < L.rows(); ++i) {
        Series s(L.cols(), trunc, ring);
        for (int j = 0; j < L.cols(); ++j) s.add_term(unit_index(L.cols(), j), L(i, j));
        out.push_back(std::move(s));
    }
    return out;
}

SeriesMap invert_diffeo(const SeriesMap& f) {
    int d = static_cast<int>(f.size());
    if (d == 0 || f[0].dim() != d) fail(ErrorKind::Domain, "invert_diffeo: map must be square");
    for (const auto& s : f)
        if (!s.constant_term().is_zero(s.ring().tol)) fail(ErrorKind::Domain, "invert_diffeo: map does not fix the origin");
    const Ring ring = f[0].ring();
    int N = f[0].trunc();
    for (const auto& s : f) N = std::min(N, s.trunc());
    CMatrix L = linear_part(f);
    auto Linv = inverse(L, ring.tol);
    if (!Linv || det(L, ring.tol).is_zero(ring.mode == Mode::Exact ? 0.0 : ring.tol))
        fail(ErrorKind::Domain, "invert_diffeo: singular linear part");
    // f = L + Nl; fixed point g = L^{-1}(x - Nl(g)) gains one degree per step.
    SeriesMap nonlin;
    for (const auto& s : f) nonlin.push_back(s.with_trunc(N).above(1));
    SeriesMap x = identity_map(d, N, ring);
    SeriesMap g = linear_map(*Linv, N, ring);
    for (int it = 1; it < N; ++it) {
        SeriesMap ng = compose(nonlin, g);
        SeriesMap rhs;
        for (int i = 0; i < d; ++i) rhs.push_back(x[i] - ng[i]);
        SeriesMap next;
        for (int i = 0; i < d; ++i) {
            Series acc(d, N, ring);
            for (int j = 0; j < d; ++j)
                if (!(*Linv)(i, j).is_zero(0)) acc = acc + rhs[j].scaled((*Linv)(i, j));
            next.push_back(std::move(acc));
        }
        g = std::move(next);
    }
    return g;
}

Series partial_derivative(const Series& s, int var) {
    if (var < 0 || var >= s.dim()) fail(ErrorKind::Domain, "partial_derivative: variable index out of range");
    int N = std::max(0, s.trunc() - 1);
    std::vector<std::pair<MultiIndex, Coeff>> terms;
    for (const auto& [r, c] : s.terms()) {
        MultiIndex e = s.exps(r);
        if (e[var] == 0) continue;
        Coeff k = Coeff::integer(e[var], s.mode());
        e[var] -= 1;
        terms.emplace_back(std::move(e), c * k);
    }
    return Series::from_terms(s.dim(), N, s.ring(), terms);
}

Series tau_integral(const Series& s, int var) {
    if (var < 0 || var >= s.dim()) fail(ErrorKind::Domain, "tau_integral: variable index out of range");
    std::vector<Series::Term> terms;
    for (const auto& [r, c] : s.terms()) {
        int e = s.exps(r)[var];
        terms.emplace_back(r, e ? c / Coeff::integer(e + 1, s.mode()) : c);
    }
    return Series::from_ranked(s.dim(), s.trunc(), s.ring(), std::move(terms));
}

double max_abs_diff(const SeriesMap& a, const SeriesMap& b) {
    if (a.size() != b.size()) fail(ErrorKind::Domain, "max_abs_diff: arity mismatch");
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).max_abs());
    return m;
}

bool exactly_equal(const SeriesMap& a, const SeriesMap& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!(a[i] - b[i]).is_zero()) return false;
    return true;
}

SeriesMap with_trunc(const SeriesMap& f, int n) {
    SeriesMap out;
    for (const auto& s : f) out.push_back(s.with_trunc(n));
    return out;
}

}  // namespace rigidnf
