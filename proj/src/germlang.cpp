#include "rigidnf/germlang.hpp"

#include <json.hpp>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace rigidnf {

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "; " : "") + v[i];
    return s;
}

class Parser {
public:
    Parser(const std::string& src, const std::vector<std::string>& vars, int trunc, Ring ring)
        : s_(src), vars_(vars), N_(trunc), ring_(ring), d_(static_cast<int>(vars.size())) {}

    Series run() {
        skip();
        if (at_end()) throw ParseError(pos_, "empty expression");
        Series v = expr();
        skip();
        if (!at_end()) throw ParseError(pos_, std::string("unexpected character '") + s_[pos_] + "'");
        return v;
    }

private:
    bool at_end() const { return pos_ >= s_.size(); }
    void skip() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (!at_end() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    Series constant(const Coeff& c) const { return Series::constant(d_, N_, ring_, c); }

    Series expr() {
        Series acc = term();
        for (;;) {
            if (eat('+')) acc = acc + term();
            else if (eat('-')) acc = acc - term();
            else return acc;
        }
    }

    Series term() {
        Series acc = unary();
        for (;;) {
            skip();
            size_t at = pos_;
            if (eat('*')) acc = acc * unary();
            else if (eat('/')) {
                Series den = unary();
                if (den.constant_term().is_zero(ring_.tol))
                    throw ParseError(at, "division by a series with zero constant term");
                acc = acc * unit_inverse(den);
            } else return acc;
        }
    }

    Series unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return powexpr();
    }

    Series powexpr() {
        Series base = atom();
        skip();
        if (eat('^')) {
            skip();
            size_t at = pos_;
            if (at_end() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
                throw ParseError(at, "exponent must be a nonnegative integer literal");
            long e = 0;
            while (!at_end() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                e = e * 10 + (s_[pos_] - '0');
                if (e > 1000000000L) throw ParseError(at, "exponent too large");
                ++pos_;
            }
            skip();
            if (!at_end() && s_[pos_] == '^') throw ParseError(pos_, "chained exponents need parentheses");
            // Powers past the cutoff vanish when the base has no constant term.
            if (e > N_ && base.constant_term().is_zero(ring_.tol)) return Series(d_, N_, ring_);
            return power(base, e);
        }
        return base;
    }

    Series atom() {
        skip();
        if (at_end()) throw ParseError(pos_, "unexpected end of expression");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Series v = expr();
            if (!eat(')')) throw ParseError(pos_, "expected ')'");
            return v;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string id = s_.substr(start, pos_ - start);
            if (id == "I") return constant(Coeff::complex(0, 1, ring_.mode));
            for (int i = 0; i < d_; ++i)
                if (vars_[i] == id) return Series::variable(d_, N_, ring_, i);
            throw ParseError(start, "unknown variable '" + id + "'");
        }
        throw ParseError(pos_, std::string("unexpected character '") + c + "'");
    }

    Series number() {
        size_t start = pos_;
        std::string intpart, frac;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) intpart += s_[pos_++];
        if (!at_end() && s_[pos_] == '.') {
            ++pos_;
            while (!at_end() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) frac += s_[pos_++];
        }
        if (intpart.empty() && frac.empty()) throw ParseError(start, "malformed number");
        long ex = 0;
        if (!at_end() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            size_t save = pos_++;
            int sign = 1;
            if (!at_end() && (s_[pos_] == '+' || s_[pos_] == '-')) sign = s_[pos_++] == '-' ? -1 : 1;
            if (at_end() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) throw ParseError(save, "malformed exponent in number");
            while (!at_end() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                ex = ex * 10 + (s_[pos_++] - '0');
                if (ex > 400) throw ParseError(save, "number exponent out of range");
            }
            ex *= sign;
        }
        if (ring_.mode == Mode::Float) {
            std::string lit = s_.substr(start, pos_ - start);
            return constant(Coeff(std::strtod(lit.c_str(), nullptr)));
        }
        // Exact decimal fraction.
        mpz_class num(intpart.empty() ? std::string("0") : intpart);
        for (char ch : frac) num = num * 10 + (ch - '0');
        long scale = ex - static_cast<long>(frac.size());
        mpz_class p10;
        mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
        mpq_class q = scale < 0 ? mpq_class(num, p10) : mpq_class(num * p10);
        q.canonicalize();
        return constant(Coeff::rational(q, Mode::Exact));
    }

    const std::string& s_;
    const std::vector<std::string>& vars_;
    int N_;
    Ring ring_;
    int d_;
    size_t pos_ = 0;
};

bool valid_identifier(const std::string& s) {
    if (s.empty() || s == "I") return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

}  // namespace

SchemaError::SchemaError(std::vector<std::string> v) : Error(ErrorKind::Parse, "invalid germ file: " + join(v)), v_(std::move(v)) {}

Series parse_expr(const std::string& src, const std::vector<std::string>& vars, int trunc, Ring ring) {
    if (vars.empty()) throw ParseError(0, "no variables declared");
    return Parser(src, vars, trunc, ring).run();
}

GermFile parse_germ_schema(const std::string& doc) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(doc);
    } catch (const json::parse_error& e) {
        throw SchemaError({std::string("malformed document: ") + e.what()});
    }
    if (!j.is_object()) throw SchemaError({"document root must be an object"});

    std::vector<std::string> errs;
    GermFile f;
    static const std::set<std::string> known = {"name", "description", "dim", "trunc", "mode", "critical_count", "variables",
                                                "components", "declared_resonances", "tolerances"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) errs.push_back("unknown key '" + it.key() + "'");

    auto get_int = [&](const char* key, int& out, bool required, int lo, int hi) {
        if (!j.contains(key)) {
            if (required) errs.push_back(std::string("missing key '") + key + "'");
            return;
        }
        if (!j[key].is_number_integer()) {
            errs.push_back(std::string("'") + key + "' must be an integer");
            return;
        }
        long v = j[key].get<long>();
        if (v < lo || v > hi) {
            errs.push_back(std::string("'") + key + "' out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return;
        }
        out = static_cast<int>(v);
    };
    if (j.contains("name")) {
        if (j["name"].is_string()) f.name = j["name"].get<std::string>();
        else errs.push_back("'name' must be a string");
    }
    if (j.contains("description") && !j["description"].is_string()) errs.push_back("'description' must be a string");
    get_int("dim", f.dim, true, 1, 8);
    get_int("trunc", f.trunc, false, 1, 64);
    get_int("critical_count", f.critical_count, false, 0, 8);
    if (j.contains("mode")) {
        if (j["mode"] == "exact") f.mode = Mode::Exact;
        else if (j["mode"] == "float") f.mode = Mode::Float;
        else errs.push_back("'mode' must be \"exact\" or \"float\"");
    }
    if (!j.contains("variables")) errs.push_back("missing key 'variables'");
    else if (!j["variables"].is_array()) errs.push_back("'variables' must be an array of names");
    else {
        std::set<std::string> seen;
        for (const auto& v : j["variables"]) {
            if (!v.is_string()) {
                errs.push_back("variable names must be strings");
                continue;
            }
            std::string name = v.get<std::string>();
            if (!valid_identifier(name)) errs.push_back("invalid variable name '" + name + "'");
            else if (!seen.insert(name).second) errs.push_back("duplicate variable name '" + name + "'");
            f.variables.push_back(name);
        }
    }
    if (!j.contains("components")) errs.push_back("missing key 'components'");
    else if (!j["components"].is_array()) errs.push_back("'components' must be an array of expressions");
    else
        for (const auto& c : j["components"]) {
            if (!c.is_string()) errs.push_back("components must be expression strings");
            else f.components.push_back(c.get<std::string>());
        }
    if (f.dim > 0) {
        if (j.contains("variables") && j["variables"].is_array() && static_cast<int>(j["variables"].size()) != f.dim)
            errs.push_back("variable count " + std::to_string(j["variables"].size()) + " differs from dim " + std::to_string(f.dim));
        if (j.contains("components") && j["components"].is_array() && static_cast<int>(j["components"].size()) != f.dim)
            errs.push_back("component count " + std::to_string(j["components"].size()) + " differs from dim " + std::to_string(f.dim));
        if (f.critical_count > f.dim) errs.push_back("'critical_count' exceeds dim");
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (!t.is_object()) errs.push_back("'tolerances' must be an object");
        else
            for (auto it = t.begin(); it != t.end(); ++it) {
                double* slot = nullptr;
                if (it.key() == "coeff") slot = &f.tol.coeff;
                else if (it.key() == "res") slot = &f.tol.res;
                else if (it.key() == "eig") slot = &f.tol.eig;
                else if (it.key() == "residual") slot = &f.tol.residual;
                else if (it.key() == "series") slot = &f.tol.series;
                if (it.key() == "max_iter") {
                    if (it->is_number_integer() && it->get<long>() > 0) f.tol.max_iter = it->get<long>();
                    else errs.push_back("tolerance 'max_iter' must be a positive integer");
                    continue;
                }
                if (!slot) errs.push_back("unknown tolerance '" + it.key() + "'");
                else if (!it->is_number() || it->get<double>() <= 0) errs.push_back("tolerance '" + it.key() + "' must be a positive number");
                else *slot = it->get<double>();
            }
    }
    if (j.contains("declared_resonances")) {
        const auto& dr = j["declared_resonances"];
        auto read_index = [&](const json& a, MultiIndex& out) {
            if (!a.is_array()) return false;
            for (const auto& x : a) {
                if (!x.is_number_integer() || x.get<long>() < 0) return false;
                out.push_back(static_cast<int>(x.get<long>()));
            }
            return true;
        };
        if (!dr.is_object()) errs.push_back("'declared_resonances' must be an object");
        else
            for (auto it = dr.begin(); it != dr.end(); ++it) {
                if (it.key() == "primary") {
                    std::vector<std::pair<int, MultiIndex>> list;
                    bool ok = it->is_array();
                    if (ok)
                        for (const auto& e : *it) {
                            MultiIndex n;
                            if (!read_index(e, n) || n.size() < 2 || n[0] < 1) {
                                ok = false;
                                break;
                            }
                            list.emplace_back(n[0], MultiIndex(n.begin() + 1, n.end()));
                        }
                    if (!ok) errs.push_back("'declared_resonances.primary' must be a list of [k, n...] with k >= 1");
                    else f.declared.primary = list;
                } else if (it.key() == "secondary") {
                    std::vector<MultiIndex> list;
                    bool ok = it->is_array();
                    if (ok)
                        for (const auto& e : *it) {
                            MultiIndex n;
                            if (!read_index(e, n) || n.empty()) {
                                ok = false;
                                break;
                            }
                            list.push_back(n);
                        }
                    if (!ok) errs.push_back("'declared_resonances.secondary' must be a list of [n...]");
                    else f.declared.secondary = list;
                } else errs.push_back("unknown declared resonance kind '" + it.key() + "'");
            }
    }
    if (!errs.empty()) throw SchemaError(errs);
    return f;
}

GermMap build_germ(const GermFile& file) {
    Ring ring{file.mode, file.tol.coeff};
    GermMap g;
    g.critical_count = file.critical_count;
    std::vector<std::string> errs;
    for (size_t i = 0; i < file.components.size(); ++i) {
        try {
            g.comps.push_back(parse_expr(file.components[i], file.variables, file.trunc, ring));
            if (!g.comps.back().constant_term().is_zero(ring.tol))
                errs.push_back("component " + std::to_string(i + 1) + " does not vanish at the origin");
        } catch (const ParseError& e) {
            errs.push_back("component " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    if (!errs.empty()) throw SchemaError(errs);
    return g;
}

ParsedGerm parse_germ_file(const std::string& doc) {
    GermFile f = parse_germ_schema(doc);
    GermMap g = build_germ(f);
    return {std::move(f), std::move(g)};
}

std::string series_to_text(const Series& s, const std::vector<std::string>& vars) { return s.str(vars); }

std::string germ_to_document(const GermFile& meta, const GermMap& g) {
    nlohmann::ordered_json j;
    if (!meta.name.empty()) j["name"] = meta.name;
    j["dim"] = g.dim();
    j["trunc"] = g.trunc();
    j["mode"] = mode_name(g.mode());
    j["critical_count"] = g.critical_count;
    j["variables"] = meta.variables;
    std::vector<std::string> comps;
    for (const auto& s : g.comps) comps.push_back(s.str(meta.variables));
    j["components"] = comps;
    return j.dump(2);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Parse, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace rigidnf
