#include "rigidnf/report.hpp"

#include "rigidnf/errors.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace rigidnf {

using ojson = nlohmann::ordered_json;

const char* command_name(Command c) {
    switch (c) {
    case Command::Check: return "check";
    case Command::Resonances: return "resonances";
    case Command::Normalize: return "normalize";
    case Command::Classify: return "classify";
    }
    return "?";
}

std::optional<Command> parse_command(const std::string& name) {
    for (Command c : {Command::Check, Command::Resonances, Command::Normalize, Command::Classify})
        if (name == command_name(c)) return c;
    return std::nullopt;
}

ojson to_json(const Coeff& c) { return c.str(); }

ojson to_json(const QMatrix& m) {
    ojson rows = ojson::array();
    for (const auto& r : m.str_rows()) rows.push_back(r);
    return rows;
}

namespace {

ojson index_json(const MultiIndex& n) { return ojson(std::vector<int>(n.begin(), n.end())); }

ojson coeffs_json(const std::vector<Coeff>& v) {
    ojson out = ojson::array();
    for (const auto& c : v) out.push_back(to_json(c));
    return out;
}

ojson map_json(const SeriesMap& m, const std::vector<std::string>& vars) {
    ojson out = ojson::array();
    for (const auto& s : m) out.push_back(series_to_text(s, vars));
    return out;
}

}  // namespace

ojson to_json(const RigidityCertificate& c) {
    ojson out;
    out["jacobian_monomial"] = index_json(c.jacobian_monomial);
    out["jacobian_unit_constant"] = to_json(c.jacobian_unit_constant);
    ojson comps = ojson::array();
    for (size_t k = 0; k < c.component_monomials.size(); ++k)
        comps.push_back({{"monomial", index_json(c.component_monomials[k])},
                         {"unit_constant", to_json(c.component_unit_constants[k])}});
    out["critical_components"] = comps;
    out["pullback"] = to_json(c.pullback);
    out["verified_to_degree"] = c.verified_to_degree;
    return out;
}

ojson to_json(const ContractionInfo& c) {
    ojson out;
    out["contracting"] = c.contracting;
    out["spectral_radius"] = Coeff(c.radius).str();
    ojson ev = ojson::array();
    for (const auto& z : c.eigenvalues) ev.push_back(Coeff(z).str());
    out["eigenvalues"] = ev;
    return out;
}

std::vector<std::string> role_names(const BlockStructure& b) {
    std::vector<std::string> out;
    int ne = b.split ? b.e : 0;
    int nt = b.dim - b.r - b.p - (b.split ? b.e : 0);
    for (int k = 0; k < b.r; ++k) out.push_back("u" + std::to_string(k + 1));
    for (int k = 0; k < ne; ++k) out.push_back("v" + std::to_string(k + 1));
    for (int k = 0; k < b.p; ++k) out.push_back("y" + std::to_string(k + 1));
    for (int k = 0; k < nt; ++k) out.push_back((b.split ? "z" : "t") + std::to_string(k + 1));
    return out;
}

ojson to_json(const BlockStructure& b) {
    ojson out;
    out["dim"] = b.dim;
    out["q"] = b.q;
    out["r"] = b.r;
    out["p"] = b.p;
    out["e"] = b.e;
    out["s"] = b.s;
    out["eta"] = b.eta;
    out["coordinates"] = role_names(b);
    out["input_index"] = b.perm;
    out["internal_action"] = to_json(b.A);
    out["sigma"] = b.sigma;
    out["cycles"] = b.cycles;
    out["alpha"] = coeffs_json(b.alpha);
    out["beta"] = coeffs_json(b.beta);
    if (b.split) out["mu"] = coeffs_json(b.mu);
    return out;
}

ojson to_json(const ResonanceReport& r) {
    ojson out;
    ojson prim = ojson::array(), sec = ojson::array();
    for (const auto& p : r.primary) prim.push_back({{"k", p.k + 1}, {"n_u", index_json(p.n_u)}, {"n_v", index_json(p.n_v)}});
    for (const auto& s : r.secondary) sec.push_back({{"n_x", index_json(s.n_x)}});
    out["primary"] = prim;
    out["secondary"] = sec;
    out["degree_bound"] = r.degree_bound;
    out["eta"] = r.eta;
    out["primary_declared"] = r.primary_declared;
    out["secondary_declared"] = r.secondary_declared;
    out["warnings"] = r.warnings;
    return out;
}

ojson to_json(const ClassRow& row) {
    ojson out;
    out["q"] = row.q;
    out["r"] = row.r;
    out["s"] = row.s;
    out["eta"] = row.eta;
    out["crit_shape"] = row.crit_shape;
    out["form_id"] = row.form_id;
    out["form"] = row.form;
    out["unresolved"] = row.unresolved;
    if (row.unresolved) out["citation"] = row.citation;
    ojson coeffs = ojson::object(), exps = ojson::object(), flags = ojson::object(), series = ojson::object();
    for (const auto& [k, c] : row.coefficients) coeffs[k] = to_json(c);
    for (const auto& [k, v] : row.exponents) exps[k] = v;
    for (const auto& [k, v] : row.flags) flags[k] = v;
    for (const auto& [k, s] : row.series) series[k] = s;
    out["coefficients"] = coeffs;
    out["exponents"] = exps;
    out["flags"] = flags;
    out["series"] = series;
    out["relations"] = row.relations;
    out["coordinates"] = row.coordinates;
    return out;
}

ojson to_json(const ConjugacyCertificate& c, const std::vector<std::string>& vars) {
    std::vector<std::string> names = role_names(c.blocks);
    ojson out;
    out["residual"] = Coeff(c.residual).str();
    out["passes_applied"] = c.passes_applied;
    out["blocks"] = to_json(c.blocks);
    if (c.resonances) out["resonances"] = to_json(*c.resonances);
    out["normalized_variables"] = names;
    out["normalized"] = map_json(c.normalized.comps, names);
    out["phi"] = map_json(c.phi, vars);
    ojson stages = ojson::array();
    for (const auto& s : c.stages) {
        ojson st;
        st["name"] = s.name;
        st["applied"] = s.applied;
        st["engine_degree"] = s.engine_degree;
        st["tail_iterations"] = s.tail_iterations;
        st["tail_increment"] = Coeff(s.tail_increment).str();
        stages.push_back(st);
    }
    out["stages"] = stages;
    if (c.blocks.split && c.normalized.dim() > 0) {
        auto sup = normal_form_support(c.normalized, c.blocks, c.normalized.mode() == Mode::Exact ? 0.0 : 1e-7);
        ojson v = ojson::array(), y = ojson::array();
        // Support indices count within their block.
        for (const auto& [k, n] : sup.v_terms)
            v.push_back({{"component", names[c.blocks.v0() + k]}, {"monomial", index_json(n)}});
        for (const auto& [k, n] : sup.y_terms)
            y.push_back({{"component", names[c.blocks.y0() + k]}, {"monomial", index_json(n)}});
        out["support"] = {{"v_terms", v}, {"y_terms", y}};
    }
    out["warnings"] = c.warnings;
    return out;
}

namespace {

ojson options_json(const GermFile& f, const CommandOptions& o) {
    ojson out;
    out["degree"] = f.trunc;
    out["mode"] = mode_name(f.mode);
    out["pass"] = o.pass == PassKind::Affine ? "all" : pass_name(o.pass);
    out["tolerances"] = {{"coeff", Coeff(f.tol.coeff).str()},        {"res", Coeff(f.tol.res).str()},
                         {"eig", Coeff(f.tol.eig).str()},            {"residual", Coeff(f.tol.residual).str()},
                         {"series", Coeff(f.tol.series).str()},      {"max_iter", f.tol.max_iter}};
    return out;
}

void apply_overrides(GermFile& f, const CommandOptions& o) {
    if (o.degree) {
        if (*o.degree < 1) fail(ErrorKind::Parse, "--degree must be at least 1");
        f.trunc = *o.degree;
    }
    if (o.mode) f.mode = *o.mode;
    if (o.tol_coeff) f.tol.coeff = *o.tol_coeff;
    if (o.tol_res) f.tol.res = *o.tol_res;
    if (o.tol_eig) f.tol.eig = *o.tol_eig;
    if (o.tol_residual) f.tol.residual = *o.tol_residual;
    if (o.tol_series) f.tol.series = *o.tol_series;
}

ojson run_check(const GermMap& g, const GermFile& f) {
    ojson out;
    auto rc = rigidity_check(g);
    out["rigid"] = true;
    out["rigidity"] = to_json(rc);
    auto blocks = detect_blocks(g, rc);
    out["blocks"] = to_json(blocks);
    auto ci = is_contracting(g, f.tol.eig);
    out["contraction"] = to_json(ci);
    if (!ci.contracting) fail(ErrorKind::NotContracting, "spectral radius " + Coeff(ci.radius).str() + " is not below 1");
    return out;
}

ojson run_resonances(const GermMap& g, const GermFile& f) {
    auto blocks = detect_blocks(g, rigidity_check(g));
    auto ci = is_contracting(g, f.tol.eig);
    if (!ci.contracting) fail(ErrorKind::NotContracting, "spectral radius " + Coeff(ci.radius).str() + " is not below 1");
    auto js = jordan_split(apply_prepared_order(g, blocks), blocks, f.tol.eig);
    auto res = analyze_resonances(js.blocks, f.mode, f.mode == Mode::Exact ? 0.0 : f.tol.res, &f.declared);
    ojson out;
    out["blocks"] = to_json(js.blocks);
    out["resonances"] = to_json(res);
    out["warnings"] = js.warnings;
    return out;
}

NormalizeOptions normalize_options(const GermFile& f, PassKind last) {
    NormalizeOptions no;
    no.tol = f.tol;
    no.declared = f.declared;
    no.last = last;
    return no;
}

}  // namespace

Report run_command(Command cmd, const std::string& input, const std::string& digest, const CommandOptions& opts) {
    Report rep;
    auto& doc = rep.doc;
    doc["command"] = command_name(cmd);
    doc["input_sha256"] = digest;
    auto t0 = std::chrono::steady_clock::now();
    try {
        GermFile file = parse_germ_schema(input);
        apply_overrides(file, opts);
        doc["name"] = file.name;
        doc["variables"] = file.variables;
        doc["options"] = options_json(file, opts);
        GermMap g = build_germ(file);
        ojson outcome;
        switch (cmd) {
        case Command::Check: outcome = run_check(g, file); break;
        case Command::Resonances: outcome = run_resonances(g, file); break;
        case Command::Normalize: {
            auto cert = normalize_full(g, normalize_options(file, opts.pass));
            outcome["certificate"] = to_json(cert, file.variables);
            break;
        }
        case Command::Classify: {
            if (g.dim() != 3) fail(ErrorKind::Domain, "classify: the table covers dimension 3 only");
            auto cert = normalize_full(g, normalize_options(file, PassKind::Affine));
            ClassRow row = classify(cert, file.tol);
            outcome["class_row"] = to_json(row);
            outcome["residual"] = Coeff(cert.residual).str();
            outcome["warnings"] = cert.warnings;
            if (row.unresolved) {
                rep.exit_code = exit_code(ErrorKind::Unresolved);
                rep.error_code = error_code(ErrorKind::Unresolved);
                rep.message = "row " + row.form_id + " has no explicit normal form";
            }
            break;
        }
        }
        doc["status"] = rep.error_code.empty() ? "ok" : rep.error_code;
        doc["outcome"] = outcome;
    } catch (const SchemaError& e) {
        rep.exit_code = exit_code(e.kind());
        rep.error_code = error_code(e.kind());
        rep.message = e.what();
        doc["status"] = rep.error_code;
        doc["outcome"] = {{"error", rep.error_code}, {"message", rep.message}, {"violations", e.violations()}};
    } catch (const Error& e) {
        rep.exit_code = exit_code(e.kind());
        rep.error_code = error_code(e.kind());
        rep.message = e.what();
        doc["status"] = rep.error_code;
        doc["outcome"] = {{"error", rep.error_code}, {"message", rep.message}};
    } catch (const std::exception& e) {
        rep.exit_code = exit_code(ErrorKind::Solver);
        rep.error_code = error_code(ErrorKind::Solver);
        rep.message = std::string("internal: ") + e.what();
        doc["status"] = rep.error_code;
        doc["outcome"] = {{"error", rep.error_code}, {"message", rep.message}};
    }
    doc["exit_code"] = rep.exit_code;
    if (opts.timings)
        doc["timings"] = {{"total_ms", std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count()}};
    return rep;
}

std::string render_json(const Report& r) { return r.doc.dump(2) + "\n"; }

namespace {

void text_lines(const ojson& j, const std::string& prefix, std::ostringstream& os) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
            const auto& v = it.value();
            bool scalar_list = v.is_array() && std::all_of(v.begin(), v.end(), [](const ojson& x) { return x.is_primitive(); });
            if (v.is_primitive() || scalar_list) os << key << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
            else text_lines(v, key, os);
        }
    } else if (j.is_array()) {
        for (size_t i = 0; i < j.size(); ++i) {
            std::string key = prefix + "[" + std::to_string(i) + "]";
            if (j[i].is_primitive()) os << key << ": " << (j[i].is_string() ? j[i].get<std::string>() : j[i].dump()) << "\n";
            else text_lines(j[i], key, os);
        }
    }
}

}  // namespace

std::string render_text(const Report& r) {
    std::ostringstream os;
    text_lines(r.doc, "", os);
    return os.str();
}

std::string error_line(const Report& r) {
    std::string msg;
    for (char c : r.message) {
        if (c == '"' || c == '\\') msg += '\\';
        msg += c == '\n' ? ' ' : c;
    }
    return "rigidnf: error=" + r.error_code + " exit=" + std::to_string(r.exit_code) + " message=\"" + msg + "\"";
}

}  // namespace rigidnf
