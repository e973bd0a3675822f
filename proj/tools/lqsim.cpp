// Command-line front end: runs scenario configs and writes reports and diagrams.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lqsim/errors.hpp"
#include "lqsim/runner.hpp"
#include "lqsim/scenario.hpp"

namespace {

struct Flags {
    std::uint64_t seed = 0;
    double tolerance = 0.0;
    std::string out;
    std::string format = "text";
    std::size_t max_qubits = 20;
    bool no_svg = false;
    std::size_t threads = 0;
};

lqs::RunOptions options_from(const Flags& f, const CLI::App& app)
{
    lqs::RunOptions o;
    if (app.count("--seed"))
        o.seed = f.seed;
    if (app.count("--tolerance"))
        o.tolerance = f.tolerance;
    o.out_dir = f.out;
    o.format = f.format == "records" ? lqs::ReportFormat::Records : lqs::ReportFormat::Text;
    o.max_qubits = f.max_qubits;
    o.svg = !f.no_svg;
    return o;
}

void add_common(CLI::App& app, Flags& f)
{
    app.add_option("--seed", f.seed, "Override the scenario seed");
    app.add_option("--tolerance", f.tolerance, "Override the scenario check tolerance")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", f.out, "Directory for report, expanded config and diagrams");
    app.add_option("--format", f.format, "Report format")->check(CLI::IsMember({"text", "records"}));
    app.add_option("--max-qubits", f.max_qubits, "Statevector size cap")->check(CLI::Range(1, 24));
    app.add_flag("--no-svg", f.no_svg, "Skip the SVG diagram");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Logical-qubit grouping toolkit: solve, verify, schedule, compile, simulate and compare scenarios"};
    app.require_subcommand(1);
    Flags flags;
    std::string config;
    std::string action;

    const char* actions[][2] = {
        {"solve", "Sequential linear solve for an exact pattern"},
        {"optimize", "Maximize the shared coupling of a ratio pattern"},
        {"verify", "Check the scenario vectors against its pattern"},
        {"schedule", "Build flip schedules and check them with the phase oracle"},
        {"compile", "Compile the logical circuit into a pulse program"},
        {"simulate", "Statevector run or Trotter error study"},
        {"compare", "Grouping versus SWAP-based cost model"},
        {"render", "Interaction-graph diagram of the pattern or vectors"},
    };
    for (const auto& a : actions) {
        auto* sub = app.add_subcommand(a[0], a[1]);
        sub->add_option("config", config, "Scenario config (JSON)")->required();
        add_common(*sub, flags);
        sub->callback([&action, name = std::string(a[0])] { action = name; });
    }
    std::string dir = "scenarios";
    auto* all = app.add_subcommand("run-all", "Run every fixture in a directory with its own action");
    all->add_option("dir", dir, "Fixture directory");
    all->add_option("--threads", flags.threads, "Concurrent fixtures (0 = hardware threads)");
    add_common(*all, flags);
    all->callback([&action] { action = "run-all"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lqs::kExitConfig;
    }

    const CLI::App& used = *app.get_subcommands().front();
    const auto opt = options_from(flags, used);
    try {
        if (action == "run-all") {
            const auto b = lqs::run_all(dir, opt, flags.threads);
            std::cout << b.summary.format(opt.format);
            return b.exit_code;
        }
        const auto scenario = lqs::load_scenario(config);
        const auto r = lqs::run_scenario(scenario, action, opt);
        std::cout << r.report.format(opt.format);
        return r.exit_code;
    } catch (const lqs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return lqs::kExitConfig;
    }
}
