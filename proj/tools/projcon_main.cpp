#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "projcon/harness.hpp"

using namespace projcon;

namespace {

struct CommonArgs {
    std::string scenario;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<long> steps;
    std::optional<long> horizon;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--scenario", args.scenario, "scenario file")->required();
    cmd->add_option("--out-dir", args.out_dir, "directory for trace/report artifacts");
    cmd->add_option("--seed", args.seed, "override the scenario seed");
    cmd->add_option("--steps", args.steps, "override the scenario round count");
    cmd->add_option("--horizon", args.horizon, "window count / prefix length for sequence checks");
}

void write_report(const std::string& out_dir, const nlohmann::json& report) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir + "/report.json");
    out << report.dump(2) << '\n';
}

int dispatch(const std::string& command, const CommonArgs& args) {
    Scenario scenario = parse_scenario(args.scenario);
    if (scenario.self_arcs_added)
        std::cerr << "warning: input graphs were missing self-arcs; they were added\n";
    long horizon = args.horizon.value_or(10);

    if (command == "simulate") {
        RunOptions opts;
        opts.out_dir = args.out_dir;
        opts.steps = args.steps;
        opts.seed = args.seed;
        opts.horizon = args.horizon;
        RunReport rep = run(scenario, opts);
        std::cout << "final_error " << rep.final_error << "\n"
                  << "final_disagreement " << rep.final_disagreement << "\n"
                  << "fitted_rate " << rep.fitted_rate << "\n"
                  << "wall_time_s " << rep.wall_time_s << "\n"
                  << "artifacts " << args.out_dir << "/trace.csv " << args.out_dir
                  << "/report.json\n";
        return exit_ok;
    }

    Problem problem = scenario.build_problem();
    const GraphSequence& seq = *scenario.sequence;
    nlohmann::json report;
    if (command == "analyze") {
        report["stability"] = analyze_stability(problem, seq.at(1));
    } else if (command == "check-connectivity") {
        report["connectivity"] = analyze_connectivity(problem, seq, horizon);
    } else if (command == "rate-bound") {
        report["rate"] = analyze_rate(problem, seq, horizon);
    } else if (command == "witness") {
        report["witness"] = analyze_witness(problem, seq, horizon);
    }
    write_report(args.out_dir, report);
    std::cout << report.dump(2) << '\n';
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distributed projection-consensus solver and graph analysis"};
    app.require_subcommand(1);

    std::map<std::string, CommonArgs> args;
    for (const char* name : {"simulate", "analyze", "check-connectivity", "rate-bound", "witness"})
        add_common(app.add_subcommand(name), args[name]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_parse;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return dispatch(command, args[command]);
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return exit_parse;
    } catch (const inconsistent_system& e) {
        std::cerr << "inconsistent system: " << e.what() << "\n";
        return exit_inconsistent;
    } catch (const capacity_error& e) {
        std::cerr << "capacity: " << e.what() << "\n";
        return exit_capacity;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_internal;
    }
}
