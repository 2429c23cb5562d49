#pragma once

#include "rigidnf/errors.hpp"
#include "rigidnf/germ.hpp"
#include "rigidnf/resonance.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rigidnf {

/// Syntax or evaluation error inside one expression; `pos` is a 0-based
/// character offset into the source text.
class ParseError : public Error {
public:
    ParseError(size_t pos, const std::string& msg)
        : Error(ErrorKind::Parse, "at position " + std::to_string(pos) + ": " + msg), pos_(pos) {}
    size_t pos() const { return pos_; }

private:
    size_t pos_;
};

/// All schema violations of a germ file, collected before failing.
class SchemaError : public Error {
public:
    explicit SchemaError(std::vector<std::string> v);
    const std::vector<std::string>& violations() const { return v_; }

private:
    std::vector<std::string> v_;
};

/// Grammar: sums and differences of products and quotients of signed powers
/// of atoms. Atoms are decimal or integer literals, the imaginary unit `I`,
/// variable names and parenthesized expressions. Exponents are nonnegative
/// integer literals; divisors must have a nonzero constant term.
Series parse_expr(const std::string& src, const std::vector<std::string>& vars, int trunc, Ring ring);

struct GermFile {
    std::string name;
    int dim = 0;
    int trunc = 8;
    Mode mode = Mode::Float;
    int critical_count = 0;
    std::vector<std::string> variables;
    std::vector<std::string> components;
    DeclaredResonances declared;
    Tolerances tol;
};

/// Validates the document structure only; expressions are parsed by build_germ.
GermFile parse_germ_schema(const std::string& doc);
GermMap build_germ(const GermFile& file);

struct ParsedGerm {
    GermFile file;
    GermMap germ;
};
ParsedGerm parse_germ_file(const std::string& doc);
/// Whole file as text; Parse error when it cannot be opened.
std::string read_text_file(const std::string& path);

std::string series_to_text(const Series& s, const std::vector<std::string>& vars);
/// Serializes a germ back to the file schema.
std::string germ_to_document(const GermFile& meta, const GermMap& g);

}  // namespace rigidnf
