#pragma once

#include <stdexcept>
#include <string>

namespace rigidnf {

/// Failure categories. Each one maps to a distinct CLI exit code.
enum class ErrorKind {
    Domain,          // precondition violated (bad index, arity, constant term...)
    Parse,           // malformed germ file or expression
    NotRigid,        // rigidity certificate could not be produced
    NotContracting,  // spectral radius >= 1 or undecidable within tolerance
    NonInjective,    // internal action has a singular non-periodic block
    Solver,          // singular linear system, divergent tail, residual too large
    Unresolved,      // classifier hit an undetermined table row
};

const char* error_code(ErrorKind k);
int exit_code(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) { throw Error(k, msg); }

}  // namespace rigidnf
