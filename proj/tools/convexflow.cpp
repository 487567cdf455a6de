// Command-line front end: solve, verify and trace.

#include <convexflow/io.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <sstream>

int main(int argc, char** argv)
{
    using namespace convexflow::io;

    CLI::App app{"Exact separable convex min-cost flow and Fisher market solver"};
    app.require_subcommand(1);

    SolveFlags flags;
    std::string mode = "enhanced";
    auto* solve = app.add_subcommand("solve", "Solve an instance and write the solution JSON");
    solve->add_option("--input,-i", flags.input, "Instance JSON")->required()->check(CLI::ExistingFile);
    solve->add_option("--output,-o", flags.output, "Solution JSON (default: stdout)");
    solve->add_option("--mode", mode, "Algorithm")->check(CLI::IsMember({"enhanced", "basic"}));
    solve->add_option("--phase-budget", flags.phase_budget, "Number of scaling phases in basic mode");
    solve->add_option("--trace", flags.trace, "Write the event trace as JSON lines");
    solve->add_flag("--verify", flags.verify, "Check optimality conditions before writing");

    std::string instance, solution;
    auto* verify = app.add_subcommand("verify", "Check a solution against an instance");
    verify->add_option("instance", instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    verify->add_option("solution", solution, "Solution JSON")->required()->check(CLI::ExistingFile);

    std::string trace_input;
    auto* trace = app.add_subcommand("trace", "Solve with the enhanced algorithm and print the trace to stdout");
    trace->add_option("--input,-i", trace_input, "Instance JSON")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (*solve) {
        flags.mode = mode == "basic" ? Mode::Basic : Mode::Enhanced;
        if (flags.mode == Mode::Basic && solve->count("--phase-budget") == 0) {
            std::cerr << "--phase-budget is required in basic mode\n";
            return 1;
        }
        return solve_command(flags);
    }
    if (*verify) return verify_command(instance, solution);

    try {
        auto outcome = solve_doc(parse_instance(read_file(trace_input)), {});
        write_trace(std::cout, outcome.events);
        return outcome.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
