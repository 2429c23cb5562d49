#pragma once

#include "rigidnf/classifier.hpp"
#include "rigidnf/germlang.hpp"
#include "rigidnf/normalizer.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rigidnf {

enum class Command { Check, Resonances, Normalize, Classify };

const char* command_name(Command c);
std::optional<Command> parse_command(const std::string& name);

/// Command-line overrides; unset fields keep the value from the germ file.
struct CommandOptions {
    std::optional<int> degree;
    std::optional<Mode> mode;
    std::optional<double> tol_coeff, tol_res, tol_eig, tol_residual, tol_series;
    PassKind pass = PassKind::Affine;
    bool timings = false;  // off by default so reports stay byte-identical
};

struct Report {
    nlohmann::ordered_json doc;
    int exit_code = 0;
    std::string error_code;  // empty on success
    std::string message;
};

/// Runs one command on the text of a germ file. Every failure is captured in
/// the report with its exit code; nothing throws.
Report run_command(Command cmd, const std::string& input, const std::string& digest, const CommandOptions& opts);

std::string render_json(const Report& r);
std::string render_text(const Report& r);
/// Single machine-parsable line for stderr: rigidnf: error=<code> exit=<n> message="...".
std::string error_line(const Report& r);

// Serializers. Coefficients are strings: "p/q" style in exact mode, 17
// significant digits in float mode.
nlohmann::ordered_json to_json(const Coeff& c);
nlohmann::ordered_json to_json(const QMatrix& m);
nlohmann::ordered_json to_json(const RigidityCertificate& c);
nlohmann::ordered_json to_json(const ContractionInfo& c);
nlohmann::ordered_json to_json(const BlockStructure& b);
nlohmann::ordered_json to_json(const ResonanceReport& r);
nlohmann::ordered_json to_json(const ClassRow& row);
/// `vars` names the input coordinates; normalized coordinates are named by role.
nlohmann::ordered_json to_json(const ConjugacyCertificate& c, const std::vector<std::string>& vars);

/// u1.., v1.., y1.., z1.. in the order of the block structure.
std::vector<std::string> role_names(const BlockStructure& b);

}  // namespace rigidnf
