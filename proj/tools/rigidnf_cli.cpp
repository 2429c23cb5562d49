// rigidnf: rigidity check, resonances, normalization and dimension-3
// classification of contracting rigid germs.

#include "rigidnf/report.hpp"

#include "CLI11.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <iostream>
#include <iterator>
#include <map>

namespace {

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

struct Args {
    std::string file;
    std::optional<int> degree;
    std::string mode, pass = "all", report = "json";
    std::optional<double> tol_coeff, tol_res, tol_eig, tol_residual, tol_series;
    bool timings = false;
};

void add_common(CLI::App* sub, Args& a, bool with_pass) {
    sub->add_option("file", a.file, "germ file, or - for stdin")->required();
    sub->add_option("--degree", a.degree, "truncation degree N (default: file value, else 8)");
    sub->add_option("--mode", a.mode, "coefficient field (default: file value, else float)")
        ->check(CLI::IsMember({"exact", "float"}));
    sub->add_option("--tol-coeff", a.tol_coeff, "coefficient zero test (default 1e-12)");
    sub->add_option("--tol-res", a.tol_res, "resonance relation test (default 1e-9)");
    sub->add_option("--tol-eig", a.tol_eig, "eigenvalue clustering (default 1e-9)");
    sub->add_option("--tol-residual", a.tol_residual, "accepted conjugacy residual (default 1e-8)");
    sub->add_option("--tol-series", a.tol_series, "tail stopping increment (default 1e-14)");
    if (with_pass)
        sub->add_option("--pass", a.pass, "last pass to run (default all)")
            ->check(CLI::IsMember({"linear", "jordan", "primary", "secondary", "affine", "all"}));
    sub->add_option("--report", a.report, "report format (default json)")->check(CLI::IsMember({"json", "text"}));
    sub->add_flag("--timings", a.timings, "add wall-clock timings to the report");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Normal forms of contracting rigid germs"};
    app.require_subcommand(1);
    Args args;
    std::map<CLI::App*, rigidnf::Command> cmds;
    cmds[app.add_subcommand("check", "rigidity, contraction and block structure")] = rigidnf::Command::Check;
    cmds[app.add_subcommand("resonances", "primary and secondary resonances")] = rigidnf::Command::Resonances;
    cmds[app.add_subcommand("normalize", "normal form and conjugacy certificate")] = rigidnf::Command::Normalize;
    cmds[app.add_subcommand("classify", "row of the dimension-3 table")] = rigidnf::Command::Classify;
    for (auto& [sub, c] : cmds) add_common(sub, args, c == rigidnf::Command::Normalize);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        if (rc == 0) return 0;
        std::cerr << "rigidnf: error=usage exit=2 message=\"" << e.what() << "\"\n";
        return 2;
    }

    rigidnf::Command cmd = rigidnf::Command::Check;
    for (auto& [sub, c] : cmds)
        if (sub->parsed()) cmd = c;

    rigidnf::CommandOptions opts;
    opts.degree = args.degree;
    if (!args.mode.empty()) opts.mode = args.mode == "exact" ? rigidnf::Mode::Exact : rigidnf::Mode::Float;
    opts.tol_coeff = args.tol_coeff;
    opts.tol_res = args.tol_res;
    opts.tol_eig = args.tol_eig;
    opts.tol_residual = args.tol_residual;
    opts.tol_series = args.tol_series;
    opts.pass = *rigidnf::parse_pass(args.pass);
    opts.timings = args.timings;

    std::string input;
    rigidnf::Report rep;
    try {
        input = args.file == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), {}) : rigidnf::read_text_file(args.file);
        rep = rigidnf::run_command(cmd, input, sha256_hex(input), opts);
    } catch (const rigidnf::Error& e) {
        rep.exit_code = rigidnf::exit_code(e.kind());
        rep.error_code = rigidnf::error_code(e.kind());
        rep.message = e.what();
        rep.doc["command"] = rigidnf::command_name(cmd);
        rep.doc["status"] = rep.error_code;
        rep.doc["outcome"] = {{"error", rep.error_code}, {"message", rep.message}};
        rep.doc["exit_code"] = rep.exit_code;
    }

    std::cout << (args.report == "text" ? rigidnf::render_text(rep) : rigidnf::render_json(rep));
    if (rep.exit_code != 0) std::cerr << rigidnf::error_line(rep) << "\n";
    return rep.exit_code;
}
