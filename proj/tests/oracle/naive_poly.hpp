#pragma once

// Reference polynomial arithmetic used only by tests. It shares no code with
// the library: exponent vectors live in a std::map, coefficients are real
// rationals, and every operation is the textbook definition.

#include "rigidnf/series.hpp"

#include <gmpxx.h>
#include <map>
#include <random>
#include <vector>

namespace naive {

using Exp = std::vector<int>;

struct Poly {
    int dim = 0;
    std::map<Exp, mpq_class> c;

    static Poly var(int dim, int i) {
        Poly p{dim, {}};
        Exp e(dim, 0);
        e[i] = 1;
        p.c[e] = 1;
        return p;
    }
    static Poly constant(int dim, const mpq_class& v) {
        Poly p{dim, {}};
        if (v != 0) p.c[Exp(dim, 0)] = v;
        return p;
    }
};

inline int deg(const Exp& e) {
    int s = 0;
    for (int x : e) s += x;
    return s;
}

inline Poly cut(Poly p, int N) {
    for (auto it = p.c.begin(); it != p.c.end();)
        if (deg(it->first) > N || it->second == 0) it = p.c.erase(it);
        else ++it;
    return p;
}

inline Poly add(const Poly& a, const Poly& b) {
    Poly r = a;
    for (const auto& [e, v] : b.c) r.c[e] += v;
    return cut(r, 1 << 20);
}

inline Poly scale(const Poly& a, const mpq_class& s) {
    Poly r{a.dim, {}};
    for (const auto& [e, v] : a.c) r.c[e] = v * s;
    return cut(r, 1 << 20);
}

inline Poly mul(const Poly& a, const Poly& b, int N) {
    Poly r{a.dim, {}};
    for (const auto& [ea, va] : a.c)
        for (const auto& [eb, vb] : b.c) {
            Exp e(a.dim);
            for (int i = 0; i < a.dim; ++i) e[i] = ea[i] + eb[i];
            if (deg(e) <= N) r.c[e] += va * vb;
        }
    return cut(r, N);
}

inline Poly pow(const Poly& a, int k, int N) {
    Poly r = Poly::constant(a.dim, 1);
    for (int i = 0; i < k; ++i) r = mul(r, a, N);
    return r;
}

// Term-by-term substitution: sum_c c * prod_i inner_i^{e_i}.
inline Poly compose(const Poly& outer, const std::vector<Poly>& inner, int N) {
    int d = inner[0].dim;
    Poly r{d, {}};
    for (const auto& [e, v] : outer.c) {
        Poly t = Poly::constant(d, v);
        for (size_t i = 0; i < e.size(); ++i) t = mul(t, pow(inner[i], e[i], N), N);
        r = add(r, t);
    }
    return cut(r, N);
}

inline Poly derivative(const Poly& a, int var) {
    Poly r{a.dim, {}};
    for (const auto& [e, v] : a.c) {
        if (e[var] == 0) continue;
        Exp f = e;
        f[var] -= 1;
        r.c[f] += v * e[var];
    }
    return cut(r, 1 << 20);
}

// Cofactor expansion; fine for the tiny matrices used in tests.
inline Poly determinant(const std::vector<std::vector<Poly>>& m, int N) {
    size_t n = m.size();
    if (n == 1) return m[0][0];
    Poly r = Poly::constant(m[0][0].dim, 0);
    for (size_t j = 0; j < n; ++j) {
        std::vector<std::vector<Poly>> minor;
        for (size_t i = 1; i < n; ++i) {
            std::vector<Poly> row;
            for (size_t k = 0; k < n; ++k)
                if (k != j) row.push_back(m[i][k]);
            minor.push_back(row);
        }
        Poly t = mul(m[0][j], determinant(minor, N), N);
        r = add(r, j % 2 ? scale(t, -1) : t);
    }
    return r;
}

inline Poly from_series(const rigidnf::Series& s) {
    Poly p{s.dim(), {}};
    for (const auto& [r, c] : s.terms()) {
        rigidnf::Coeff e = c.in_mode(rigidnf::Mode::Exact);
        p.c[s.exps(r)] = e.gauss().re;
    }
    return p;
}

inline rigidnf::Series to_series(const Poly& p, int N, rigidnf::Ring ring) {
    std::vector<std::pair<rigidnf::MultiIndex, rigidnf::Coeff>> t;
    for (const auto& [e, v] : p.c) t.emplace_back(e, rigidnf::Coeff::rational(v, ring.mode));
    return rigidnf::Series::from_terms(p.dim, N, ring, t);
}

inline bool same(const Poly& a, const Poly& b) { return cut(a, 1 << 20).c == cut(b, 1 << 20).c; }

// Random polynomial with small rational coefficients and a given lowest degree.
inline Poly random_poly(std::mt19937_64& rng, int dim, int lo, int N, int nterms) {
    Poly p{dim, {}};
    std::uniform_int_distribution<int> num(-5, 5), den(1, 4), var(0, dim - 1), dg(lo, N);
    for (int t = 0; t < nterms; ++t) {
        int D = dg(rng);
        Exp e(dim, 0);
        for (int k = 0; k < D; ++k) e[var(rng)]++;
        mpq_class v(num(rng), den(rng));
        v.canonicalize();
        p.c[e] += v;
    }
    return cut(p, N);
}

}  // namespace naive
