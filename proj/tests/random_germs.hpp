#pragma once

// Random contracting rigid germs with a known block layout, for property
// tests. Coordinates are ordered u (periodic critical), y (non-periodic
// critical), v (nonzero eigenvalue), z (at most one, affine).

#include "rigidnf/germ.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

struct RandomGerm {
    rigidnf::GermMap germ;
    std::string roles;
    bool resonant = false;
};

class GermGenerator {
public:
    GermGenerator(uint64_t seed, rigidnf::Ring ring) : rng_(seed), ring_(ring) {}

    RandomGerm next(int d, int N, bool resonant) {
        static const std::vector<std::string> two = {"vv", "uv", "uu", "uy", "yv", "uz", "yz"};
        static const std::vector<std::string> three = {"vvv", "uvv", "uuv", "uyv", "uyy", "yyv", "uvz",
                                                       "uyz", "yyz", "uuz", "uuy", "yyy"};
        const auto& pool = d == 2 ? two : three;
        return build(pool[pick(pool.size())], N, resonant);
    }

    RandomGerm build(const std::string& roles, int N, bool resonant) {
        using namespace rigidnf;
        const int d = static_cast<int>(roles.size());
        std::vector<int> u, y, v, z;
        for (int i = 0; i < d; ++i) (roles[i] == 'u' ? u : roles[i] == 'y' ? y : roles[i] == 'v' ? v : z).push_back(i);
        std::vector<int> uv = u, uvy;
        uv.insert(uv.end(), v.begin(), v.end());
        uvy = uv;
        uvy.insert(uvy.end(), y.begin(), y.end());

        // Linear data.
        std::vector<double> alpha(u.size()), mu(v.size());
        std::vector<std::vector<int>> D;
        bool secondary = resonant && y.size() == 2 && !u.empty() && coin();
        int square_of = -1;  // v.back() is resonant with the square of this coordinate
        for (size_t k = 0; k < u.size(); ++k) alpha[k] = generic(k);
        for (size_t k = 0; k < v.size(); ++k) mu[k] = generic(u.size() + k);
        if (secondary) {
            if (coin()) {
                D = {{2, 1}, {1, 0}};
                alpha[0] = 1.0 - std::sqrt(2.0);
            } else {
                D = {{2, 1}, {1, 1}};
                alpha[0] = (3.0 - std::sqrt(5.0)) / 2.0;
            }
        } else if (resonant) {
            // One primary relation: a v eigenvalue equals the square of another eigenvalue.
            std::vector<double*> slots;
            for (auto& a : alpha) slots.push_back(&a);
            for (auto& m : mu) slots.push_back(&m);
            if (!slots.empty()) *slots[0] = 0.5;
            if (!mu.empty() && slots.size() >= 2) {
                mu.back() = 0.25;
                square_of = u.empty() ? v[0] : u[0];
            } else if (!alpha.empty()) {
                alpha[0] = 0.5;
            }
        }
        if (D.empty() && !y.empty()) D = random_injective(y.size());

        GermMap g;
        g.critical_count = static_cast<int>(u.size() + y.size());
        for (int i = 0; i < d; ++i) g.comps.emplace_back(d, N, ring_);
        for (size_t k = 0; k < u.size(); ++k) {
            Series unit = one(d, N) + small_poly(d, N, uvy, 1, 2);
            g.comps[u[k]] = mono(d, N, {{u[k], 1}}, coeff(alpha[k])) * unit;
        }
        // Critical monomials only involve critical variables; anything else
        // would add a hyperplane to the critical set.
        for (size_t j = 0; j < y.size(); ++j) {
            std::vector<std::pair<int, int>> e;
            int total = 0;
            for (size_t i = 0; i < y.size(); ++i) {
                e.push_back({y[i], D[i][j]});
                total += D[i][j];
            }
            if (total < 2) e.push_back({u.empty() ? y[j] : u[0], 2 - total});
            Series unit = one(d, N) + small_poly(d, N, uvy, 1, 2);
            if (secondary) unit = unit + mono(d, N, {{u[0], 1}}, rational_coeff(1 + pick(3), 2));
            g.comps[y[j]] = mono(d, N, e, rational_coeff(1 + pick(3), 1 + pick(2))) * unit;
        }
        for (size_t k = 0; k < v.size(); ++k)
            g.comps[v[k]] = mono(d, N, {{v[k], 1}}, coeff(mu[k])) + small_poly(d, N, uv, 2, 3);
        if (square_of >= 0) g.comps[v.back()] = g.comps[v.back()] + mono(d, N, {{square_of, 2}}, rational_coeff(1 + pick(3), 1));
        for (int zi : z) {
            std::vector<std::pair<int, int>> e = {{zi, 1}};
            std::vector<int> base = u;
            base.insert(base.end(), y.begin(), y.end());
            e.push_back({base[pick(base.size())], 1});
            std::vector<int> all = uvy;
            all.push_back(zi);
            Series unit = one(d, N) + small_poly(d, N, all, 1, 2);
            g.comps[zi] = mono(d, N, e, rational_coeff(1 + pick(3), 1 + pick(2))) * unit + small_poly(d, N, uvy, 2, 3);
        }
        return {g, roles, resonant};
    }

    std::mt19937_64& rng() { return rng_; }

private:
    size_t pick(size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng_); }
    bool coin() { return pick(2) == 1; }

    // sqrt(prime) / 4 with a sign: no multiplicative relations among them.
    double generic(size_t k) {
        static const int primes[] = {2, 3, 5, 7, 11, 13};
        double s = std::sqrt(static_cast<double>(primes[(k + pick(3)) % 6])) / 4.0;
        return coin() ? s : -s;
    }

    rigidnf::Coeff coeff(double x) const {
        if (ring_.mode == rigidnf::Mode::Float) return rigidnf::Coeff(x);
        return rigidnf::Coeff::rational(rigidnf::rationalize(x, 1000000), rigidnf::Mode::Exact);
    }
    rigidnf::Coeff rational_coeff(long a, long b) {
        long sa = coin() ? a : -a;
        if (ring_.mode == rigidnf::Mode::Float) return rigidnf::Coeff(static_cast<double>(sa) / static_cast<double>(b));
        return rigidnf::Coeff::rational(mpq_class(sa, b), rigidnf::Mode::Exact);
    }

    rigidnf::Series one(int d, int N) const {
        return rigidnf::Series::constant(d, N, ring_, rigidnf::Coeff::one(ring_.mode));
    }
    rigidnf::Series mono(int d, int N, const std::vector<std::pair<int, int>>& e, const rigidnf::Coeff& c) const {
        rigidnf::MultiIndex n(d, 0);
        for (auto [i, k] : e) n[i] += k;
        return rigidnf::Series::monomial(d, N, ring_, n, c);
    }

    // Sparse random polynomial in `vars` with degrees in [lo, hi].
    rigidnf::Series small_poly(int d, int N, const std::vector<int>& vars, int lo, int hi) {
        rigidnf::Series s(d, N, ring_);
        if (vars.empty()) return s;
        int terms = 1 + static_cast<int>(pick(3));
        for (int t = 0; t < terms; ++t) {
            int deg = lo + static_cast<int>(pick(hi - lo + 1));
            rigidnf::MultiIndex n(d, 0);
            for (int k = 0; k < deg; ++k) n[vars[pick(vars.size())]]++;
            s.add_term(n, rational_coeff(1 + pick(3), 1 + pick(3)));
        }
        return s;
    }

    // D(i, j) = exponent of y_i in component j. Kept small so det df stays
    // below degree 5.
    std::vector<std::vector<int>> random_injective(size_t p) {
        static const std::vector<std::vector<std::vector<int>>> one = {{{2}}, {{3}}};
        static const std::vector<std::vector<std::vector<int>>> two = {
            {{2, 1}, {0, 1}}, {{2, 1}, {1, 1}}, {{1, 0}, {1, 2}}, {{2, 0}, {0, 2}}};
        static const std::vector<std::vector<std::vector<int>>> three = {
            {{1, 0, 1}, {1, 1, 0}, {0, 1, 1}}, {{2, 0, 0}, {0, 2, 0}, {0, 0, 2}}};
        const auto& pool = p == 1 ? one : p == 2 ? two : three;
        return pool[pick(pool.size())];
    }

    std::mt19937_64 rng_;
    rigidnf::Ring ring_;
};

}  // namespace testsupport
