#include "rigidnf/resonance.hpp"

#include "rigidnf/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rigidnf {

MultiIndex PrimaryResonance::n_x() const {
    MultiIndex n = n_u;
    n.insert(n.end(), n_v.begin(), n_v.end());
    return n;
}

bool ResonanceReport::is_primary(int k, const MultiIndex& n_x) const {
    for (const auto& p : primary)
        if (p.k == k && p.n_x() == n_x) return true;
    return false;
}

bool ResonanceReport::is_secondary(const MultiIndex& n_x) const {
    for (const auto& s : secondary)
        if (s.n_x == n_x) return true;
    return false;
}

std::vector<Coeff> xi_values(const BlockStructure& b) {
    std::vector<Coeff> xi(b.r);
    for (const auto& cyc : b.cycles) {
        Coeff prod = Coeff::one(b.alpha.empty() ? Mode::Float : b.alpha[0].mode());
        for (int c : cyc) prod *= b.alpha[c];
        Coeff val = prod.pow(b.eta / static_cast<long>(cyc.size()));
        for (int c : cyc) xi[c] = val;
    }
    return xi;
}

std::vector<Coeff> eta_eigenvalues(const BlockStructure& b) {
    std::vector<Coeff> g = xi_values(b);
    for (const auto& m : b.mu) g.push_back(m.pow(b.eta));
    return g;
}

double nonzero_spectral_radius(const BlockStructure& b) {
    double L = 0;
    for (const auto& cyc : b.cycles) {
        double prod = 1;
        for (int c : cyc) prod *= b.alpha[c].abs();
        L = std::max(L, std::pow(prod, 1.0 / static_cast<double>(cyc.size())));
    }
    for (const auto& m : b.mu) L = std::max(L, m.abs());
    return L;
}

namespace {

CMatrix d_power(const BlockStructure& b, Mode mode) { return CMatrix::from_q(b.D.pow(b.eta), mode); }

Coeff power_product(const std::vector<Coeff>& base, const MultiIndex& n, Mode mode) {
    Coeff v = Coeff::one(mode);
    for (size_t i = 0; i < n.size(); ++i)
        if (n[i]) v *= base[i].pow(n[i]);
    return v;
}

std::string index_str(const MultiIndex& n) {
    std::string s = "(";
    for (size_t i = 0; i < n.size(); ++i) s += (i ? "," : "") + std::to_string(n[i]);
    return s + ")";
}

}  // namespace

int degree_bound(const BlockStructure& b) {
    if (!b.split) fail(ErrorKind::Domain, "degree_bound needs the v/z split");
    if (b.s == 0 || (b.e == 0 && b.p == 0)) return 0;
    double L = nonzero_spectral_radius(b);
    if (L >= 1.0) fail(ErrorKind::NotContracting, "nonzero eigenvalue of modulus >= 1");
    double target = 1.0;
    for (const auto& m : b.mu) target = std::min(target, std::pow(m.abs(), b.eta));
    if (b.p > 0)
        for (auto z : eigenvalues(d_power(b, Mode::Float))) target = std::min(target, std::abs(z));
    // A hair of slack keeps exact ties (Lambda^N == target) on the safe side.
    target *= 1.0 - 1e-9;
    int N = 1;
    double pw = L;
    while (!(pw < target)) {
        pw *= L;
        ++N;
        if (N > 10000) fail(ErrorKind::Solver, "resonance degree bound does not terminate");
    }
    return N;
}

std::vector<PrimaryResonance> primary_resonances(const BlockStructure& b, Mode mode, double tol_res, int max_degree,
                                                 std::vector<std::string>* warnings) {
    std::vector<PrimaryResonance> out;
    int s = b.r + b.e;
    if (b.e == 0 || s == 0 || max_degree < 1) return out;
    auto g = eta_eigenvalues(b);
    auto tab = MonomialTable::get(s, max_degree);
    for (int k = 0; k < b.e; ++k) {
        Coeff target = g[b.r + k];
        for (int i = 1; i < tab->size(); ++i) {
            const MultiIndex& n = tab->exps(i);
            if (tab->degree(i) == 1 && n[b.r + k] == 1) continue;  // the linear term itself
            Coeff diff = power_product(g, n, mode) - target;
            bool hit;
            if (mode == Mode::Exact) hit = diff.is_zero(0);
            else {
                double rel = diff.abs() / std::max(target.abs(), 1e-300);
                hit = rel <= tol_res;
                if (!hit && rel <= 10 * tol_res && warnings)
                    warnings->push_back("near-miss primary resonance for coordinate " + std::to_string(k + 1) + " at " + index_str(n));
            }
            if (hit) out.push_back({k, MultiIndex(n.begin(), n.begin() + b.r), MultiIndex(n.begin() + b.r, n.end())});
        }
    }
    return out;
}

std::vector<SecondaryResonance> secondary_resonances(const BlockStructure& b, Mode mode, double tol_res, int max_degree,
                                                     std::vector<std::string>* warnings) {
    std::vector<SecondaryResonance> out;
    int s = b.r + b.e;
    if (b.p == 0 || s == 0 || max_degree < 1) return out;
    auto g = eta_eigenvalues(b);
    CMatrix De = d_power(b, mode);
    double scale = std::pow(std::max(1.0, De.max_abs()), b.p);
    auto tab = MonomialTable::get(s, max_degree);
    for (int i = 1; i < tab->size(); ++i) {
        const MultiIndex& n = tab->exps(i);
        Coeff val = power_product(g, n, mode);
        Coeff dt = det(De - CMatrix::identity(b.p, mode).scaled(val), 0.0);
        bool hit;
        if (mode == Mode::Exact) hit = dt.is_zero(0);
        else {
            double rel = dt.abs() / scale;
            hit = rel <= tol_res;
            if (!hit && rel <= 10 * tol_res && warnings) warnings->push_back("near-miss secondary resonance at " + index_str(n));
        }
        if (hit) out.push_back({n});
    }
    return out;
}

ResonanceReport analyze_resonances(const BlockStructure& b, Mode mode, double tol_res, const DeclaredResonances* declared) {
    ResonanceReport rep;
    rep.mode = mode;
    rep.tol_res = tol_res;
    rep.eta = b.eta;
    rep.degree_bound = degree_bound(b);
    int s = b.r + b.e;
    if (declared && declared->primary) {
        rep.primary_declared = true;
        for (const auto& [k, n] : *declared->primary) {
            if (k < 1 || k > b.e || static_cast<int>(n.size()) != s)
                fail(ErrorKind::Parse, "declared primary resonance does not match the block sizes (need k in 1..e and " + std::to_string(s) + " exponents)");
            rep.primary.push_back({k - 1, MultiIndex(n.begin(), n.begin() + b.r), MultiIndex(n.begin() + b.r, n.end())});
            rep.degree_bound = std::max(rep.degree_bound, total_degree(n));
        }
    }
    if (declared && declared->secondary) {
        rep.secondary_declared = true;
        for (const auto& n : *declared->secondary) {
            if (static_cast<int>(n.size()) != s)
                fail(ErrorKind::Parse, "declared secondary resonance needs " + std::to_string(s) + " exponents");
            rep.secondary.push_back({n});
            rep.degree_bound = std::max(rep.degree_bound, total_degree(n));
        }
    }
    if (!rep.primary_declared) rep.primary = primary_resonances(b, mode, tol_res, rep.degree_bound, &rep.warnings);
    if (!rep.secondary_declared) rep.secondary = secondary_resonances(b, mode, tol_res, rep.degree_bound, &rep.warnings);
    return rep;
}

}  // namespace rigidnf
