// qhist: command-line front end for scenario files.
//
//   qhist [--format table|json|csv] [--cap N] [--seed N] [-o FILE] COMMAND SCENARIO [options]
//   qhist demo NAME
//
// SCENARIO is a path or builtin:NAME.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qhist/builtin_scenarios.hpp"
#include "qhist/cli.hpp"

namespace {

qhist::ScenarioFile resolve(const std::string& arg) {
    constexpr std::string_view prefix = "builtin:";
    if (arg.starts_with(prefix)) {
        const std::string name = arg.substr(prefix.size());
        const auto& table = qhist::builtin::scenarios();
        const auto it = table.find(name);
        if (it == table.end()) throw qhist::ValidationError("no built-in scenario '" + name + "'");
        return qhist::parse_scenario_text(it->second, arg);
    }
    return qhist::load_scenario(arg);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace qhist;
    using cli::Format;

    CLI::App app{"Quantum history simulator"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string format_name = "table";
    app.add_option("--format", format_name, "Output format: table, json or csv")->check(CLI::IsMember({"table", "json", "csv"}));
    cli::CommandRequest req;
    app.add_option("--cap", req.cap, "Maximum number of enumerated outcome sequences");
    app.add_option("--seed", req.seed, "Seed for sampled output");
    std::string output;
    app.add_option("-o,--output", output, "Write output to FILE instead of stdout");

    std::string scenario_path;
    auto with_scenario = [&](CLI::App* sub) {
        sub->add_option("scenario", scenario_path, "Scenario file or builtin:NAME")->required();
        return sub;
    };

    with_scenario(app.add_subcommand("vector", "History vector content"));
    auto* probs = with_scenario(app.add_subcommand("probs", "Probabilities of every outcome sequence"));
    probs->add_option("--samples", req.samples, "Also draw this many seeded samples");
    auto* consistency = with_scenario(app.add_subcommand("consistency", "Decoherence-functional consistency check"));
    consistency->add_option("--tol", req.tol, "Interference tolerance");
    with_scenario(app.add_subcommand("marginals", "Amplitude and probability sum rules"));
    auto* entropy = with_scenario(app.add_subcommand("entropy", "Entropy of a reduced history density matrix"));
    entropy->add_option("--trace-out", req.trace_out, "Slots to trace out (comma separated, 1-based)")->delimiter(',');
    std::string subsystem;
    entropy->add_option("--subsystem", subsystem, "Keep subsystem A or B")->check(CLI::IsMember({"A", "B"}));
    std::string base = "e";
    entropy->add_option("--base", base, "Logarithm base")->check(CLI::IsMember({"e", "2"}));
    auto* protocol = with_scenario(app.add_subcommand("protocol-check", "Compare the clone-gate protocol with the history vector"));
    protocol->add_option("--tol", req.tol, "Amplitude tolerance");
    auto* lg = with_scenario(app.add_subcommand("lg", "Leggett-Garg evaluation"));
    lg->add_option("--tol", req.tol, "Interference tolerance");
    auto* chsh = with_scenario(app.add_subcommand("chsh", "Temporal CHSH evaluation"));
    std::string mode;
    chsh->add_option("--mode", mode, "fixed-basis or per-pair")->check(CLI::IsMember({"fixed-basis", "per-pair"}));
    auto* intermediate = with_scenario(app.add_subcommand("intermediate", "Intermediate state under postselection at t2"));
    intermediate->add_option("--beta2", req.beta2, "Postselected outcome index at t2")->required();
    auto* demo = app.add_subcommand("demo", "Built-in demonstrations: xz-example, bell2-chsh, precession-lg");
    std::string demo_name;
    demo->add_option("name", demo_name)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kValidation;
    }

    const Format format = format_name == "json" ? Format::Json : format_name == "csv" ? Format::Csv : Format::Table;
    CLI::App* sub = app.get_subcommands().front();
    req.command = sub->get_name();
    if (!subsystem.empty()) req.subsystem = subsystem == "A" ? Subsystem::A : Subsystem::B;
    req.base = base == "2" ? LogBase::Two : LogBase::E;
    if (!mode.empty()) req.mode = parse_chsh_mode(mode);

    cli::RunResult result;
    if (sub == demo) {
        result = cli::run_demo(demo_name, builtin::scenarios(), req);
    } else {
        try {
            result = cli::run_command(resolve(scenario_path), req);
        } catch (const ValidationError& e) {
            result = {req.command, {}, cli::kValidation, e.what()};
        } catch (const NumericalError& e) {
            result = {req.command, {}, cli::kNumerical, e.what()};
        }
    }

    const std::string text = cli::render(result, format);
    if (output.empty()) {
        (result.exit_code == 0 || !result.sections.empty() ? std::cout : std::cerr) << text;
    } else {
        std::ofstream out(output, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << output << "\n";
            return cli::kValidation;
        }
        out << text;
        if (result.exit_code != 0) std::cerr << "error: " << result.error << "\n";
    }
    return result.exit_code;
}
