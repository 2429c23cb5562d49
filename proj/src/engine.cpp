#include "rigidnf/engine.hpp"

#include "rigidnf/errors.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <tuple>

namespace rigidnf {

namespace {

std::string key_str(int k, const MultiIndex& n) {
    std::string s = "(" + std::to_string(k + 1) + "; ";
    for (size_t i = 0; i < n.size(); ++i) s += (i ? "," : "") + std::to_string(n[i]);
    return s + ")";
}

// Tarjan's algorithm; components come out in reverse topological order.
std::vector<std::vector<int>> strong_components(const std::vector<std::vector<int>>& adj) {
    int n = static_cast<int>(adj.size());
    std::vector<int> index(n, -1), low(n, 0), stack;
    std::vector<bool> on(n, false);
    std::vector<std::vector<int>> comps;
    int counter = 0;
    std::function<void(int)> visit = [&](int v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on[v] = true;
        for (int w : adj[v]) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on[w]) low[v] = std::min(low[v], index[w]);
        }
        if (low[v] == index[v]) {
            std::vector<int> c;
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on[w] = false;
                c.push_back(w);
            } while (w != v);
            std::sort(c.begin(), c.end());
            comps.push_back(std::move(c));
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[v] < 0) visit(v);
    return comps;
}

// std::map default-constructs a float zero; keep exact entries exact.
void accumulate(std::map<int, Coeff>& m, int key, const Coeff& c) {
    auto it = m.find(key);
    if (it == m.end()) m.emplace(key, c);
    else it->second += c;
}

}  // namespace

EngineResult solve_by_degree(const EngineProblem& p) {
    const Mode mode = p.ring.mode;
    const bool exact = mode == Mode::Exact;
    const double edge_tol = exact ? 0.0 : p.ring.tol;
    auto tab = MonomialTable::get(p.dim, p.trunc);

    EngineResult out;
    out.phi.assign(p.ncomp, Series(p.dim, p.trunc, p.ring));
    out.slots.assign(p.ncomp, Series(p.dim, p.trunc, p.ring));
    std::set<std::pair<int, int>> fixed_keys;
    for (int k = 0; k < static_cast<int>(p.fixed.size()); ++k)
        for (const auto& [n, c] : p.fixed[k]) {
            out.phi[k].add_term(n, c);
            fixed_keys.insert({k, tab->index(n)});
        }

    for (int D = p.min_degree; D <= std::min(p.max_degree, p.trunc); ++D) {
        const int b0 = tab->deg_begin(D), nD = tab->deg_end(D) - b0;
        const int nkeys = p.ncomp * nD;
        auto key_of = [&](int k, int rank) { return k * nD + (rank - b0); };
        auto comp_of = [&](int key) { return key / nD; };
        auto rank_of = [&](int key) { return b0 + key % nD; };

        // Image of each degree-D monomial under the transport part of J.
        SeriesMap lin = linear_map(p.lin, D, p.ring);
        std::vector<Series> img(nD);
        for (int i = 0; i < nD; ++i) {
            const MultiIndex& n = tab->exps(b0 + i);
            Series mono = Series::monomial(p.dim, D, p.ring, n, Coeff::one(mode));
            Series im = compose(mono, lin).scaled(p.c_lin);
            if (p.z_var >= 0 && n[p.z_var] > 0) {
                Series dz = compose(partial_derivative(mono, p.z_var), with_trunc(lin, D - 1)).with_trunc(D);
                im = im + tau_integral(p.omega_lin.with_trunc(D) * dz, p.z_var).scaled(p.c_z);
            }
            img[i] = im.homogeneous(D);
        }

        // Column a lists (equation key, coefficient) for unknown key a.
        std::vector<bool> fixed(nkeys, false);
        for (int key = 0; key < nkeys; ++key) fixed[key] = fixed_keys.count({comp_of(key), rank_of(key)}) > 0;
        std::vector<std::map<int, Coeff>> col(nkeys);
        for (int j = 0; j < p.ncomp; ++j)
            for (int i = 0; i < nD; ++i) {
                int a = key_of(j, b0 + i);
                if (fixed[a]) continue;
                for (const auto& [r, c] : img[i].terms()) accumulate(col[a], key_of(j, r), c);
                for (int k = 0; k < p.ncomp; ++k)
                    if (!p.mix(k, j).is_zero(0)) accumulate(col[a], key_of(k, b0 + i), p.mix(k, j));
            }
        std::vector<std::map<int, Coeff>> row(nkeys);
        std::vector<std::vector<int>> adj(nkeys);
        for (int a = 0; a < nkeys; ++a)
            for (const auto& [b, c] : col[a]) {
                if (fixed[b] || c.is_zero(edge_tol)) continue;
                row[b][a] = c;
                if (a != b) adj[a].push_back(b);
            }

        auto comps = strong_components(adj);
        std::vector<int> comp_id(nkeys, -1);
        for (int c = 0; c < static_cast<int>(comps.size()); ++c)
            for (int v : comps[c]) comp_id[v] = c;
        std::vector<int> indeg(comps.size(), 0);
        std::vector<std::set<int>> succ(comps.size());
        for (int a = 0; a < nkeys; ++a)
            for (int b : adj[a])
                if (comp_id[a] != comp_id[b] && succ[comp_id[a]].insert(comp_id[b]).second) ++indeg[comp_id[b]];

        // Kahn's order, smallest (coordinate, rank) first among ready blocks.
        using Ready = std::tuple<int, int, int>;
        std::priority_queue<Ready, std::vector<Ready>, std::greater<Ready>> ready;
        auto push = [&](int c) { ready.emplace(comp_of(comps[c][0]), rank_of(comps[c][0]), c); };
        for (int c = 0; c < static_cast<int>(comps.size()); ++c)
            if (!fixed[comps[c][0]] && indeg[c] == 0) push(c);

        SeriesMap res = p.residual(out.phi, out.slots);
        std::vector<Coeff> x(nkeys, Coeff::zero(mode));
        std::vector<Coeff> slot(nkeys, Coeff::zero(mode));
        while (!ready.empty()) {
            int c = std::get<2>(ready.top());
            ready.pop();
            const auto& S = comps[c];
            std::set<int> inS(S.begin(), S.end());
            std::vector<Coeff> rhs;
            bool all_slots = true;
            for (int b : S) {
                Coeff v = -res[comp_of(b)].coeff_rank(rank_of(b));
                for (const auto& [a, coef] : row[b])
                    if (!inS.count(a)) v -= coef * x[a];
                rhs.push_back(v);
                all_slots = all_slots && p.slot_eligible && p.slot_eligible(comp_of(b), tab->exps(rank_of(b)));
            }
            CMatrix M(static_cast<int>(S.size()), static_cast<int>(S.size()), mode);
            for (size_t i = 0; i < S.size(); ++i)
                for (size_t j = 0; j < S.size(); ++j) {
                    auto it = row[S[i]].find(S[j]);
                    if (it != row[S[i]].end()) M(static_cast<int>(i), static_cast<int>(j)) = it->second;
                }
            if (all_slots) {
                // Keep only what phi cannot absorb: the part of rhs off the range of M.
                // Then M phi = rhs + slot is consistent.
                std::vector<Coeff> off = M.max_abs() == 0 ? rhs : project_off_range(M, rhs, exact ? 0.0 : p.rank_tol);
                std::vector<Coeff> fit(rhs.size(), Coeff::zero(mode));
                for (size_t i = 0; i < S.size(); ++i) {
                    slot[S[i]] = -off[i];
                    fit[i] = rhs[i] - off[i];
                }
                if (M.max_abs() != 0) {
                    auto phi_s = solve_particular(M, fit, exact ? 0.0 : p.rank_tol);
                    for (size_t i = 0; i < S.size(); ++i) x[S[i]] = phi_s[i];
                }
            } else {
                auto sol = solve(M, rhs, exact ? 0.0 : p.rank_tol);
                if (!sol)
                    fail(ErrorKind::Solver, p.stage + ": singular system at non-resonant key " +
                                                key_str(comp_of(S[0]), tab->exps(rank_of(S[0]))) + " of degree " +
                                                std::to_string(D) + "; the resonance tolerance likely misclassified it");
                for (size_t i = 0; i < S.size(); ++i) x[S[i]] = (*sol)[i];
            }
            for (int b : S) out.order.emplace_back(comp_of(b), tab->exps(rank_of(b)));
            for (int nc : succ[c])
                if (--indeg[nc] == 0) push(nc);
        }

        for (int key = 0; key < nkeys; ++key) {
            if (fixed[key]) continue;
            const MultiIndex& n = tab->exps(rank_of(key));
            if (!x[key].is_zero(0)) out.phi[comp_of(key)].add_term(n, x[key]);
            if (!slot[key].is_zero(0)) out.slots[comp_of(key)].add_term(n, slot[key]);
        }
    }
    return out;
}

}  // namespace rigidnf
