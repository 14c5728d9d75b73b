#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "projcon/analysis.hpp"
#include "projcon/solver.hpp"

namespace projcon {

// Parsed scenario file: the problem data, the neighbor-graph source, run
// length, and which analyses to attach to the report.
struct Scenario {
    int n = 0;
    std::vector<Matrix> A_blocks;
    std::vector<Vector> b_blocks;
    std::optional<GraphSequence> sequence;
    long steps = 100;
    std::uint64_t seed = 0;
    InitPolicy init = InitPolicy::LeastNorm;
    enum class Mode { Exact, LeastSquares } mode = Mode::Exact;
    std::vector<std::string> analyses;
    bool self_arcs_added = false;  // some input graph was missing self-arcs

    int agent_count() const { return static_cast<int>(A_blocks.size()); }
    Problem build_problem() const;  // applies the least-squares transform when asked
};

// Reads the documented line-oriented format; throws parse_error with the
// offending line number.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<string>");

// Neighbor graph at time t >= 1 for a sequence spec.
DiGraph gen_sequence(const GraphSequence& spec, long t);

struct RunOptions {
    std::string out_dir = ".";
    std::optional<long> steps;
    std::optional<std::uint64_t> seed;
    std::optional<long> horizon;  // windows for repeated checks / prefix length
};

struct RunReport {
    double final_error = 0.0;
    double final_disagreement = 0.0;
    double fitted_rate = 0.0;  // log-slope per round over the last half
    double wall_time_s = 0.0;
    nlohmann::json analyses;
};

// Simulates, writes trace.csv and report.json under out_dir, and returns the
// summary. Deterministic artifacts for a fixed (scenario, seed).
RunReport run(const Scenario& scenario, const RunOptions& options);

// Slope of the least-squares line through (t, log(series + floor)).
inline constexpr double kLogFloor = 1e-15;
double fitted_geometric_rate(const std::vector<double>& series);

void write_trace_csv(const std::string& path, const SimulationTrace& trace);

// Report serialization.
nlohmann::json to_json(const StabilityReport& rep);
nlohmann::json to_json(const ConnectivityReport& rep);
nlohmann::json to_json(const ContractionCertificate& cert);
nlohmann::json to_json(const RateBound& rb);
nlohmann::json to_json(const UnitEigenvalueWitness& wit);
nlohmann::json to_json(const RepeatedCheckResult& res);

// Analyses shared by `run` and the single-purpose CLI commands.
nlohmann::json analyze_stability(const Problem& problem, const DiGraph& G);
nlohmann::json analyze_connectivity(const Problem& problem, const GraphSequence& seq, long horizon);
nlohmann::json analyze_rate(const Problem& problem, const GraphSequence& seq, long horizon);
nlohmann::json analyze_certificate(const Problem& problem, const GraphSequence& seq, long horizon);
nlohmann::json analyze_witness(const Problem& problem, const GraphSequence& seq, long horizon);

// Finite prefix of a sequence used by witness/certificate analyses: the whole
// explicit list, one period, or `horizon` random draws.
std::vector<DiGraph> sequence_prefix(const GraphSequence& seq, long horizon);

}  // namespace projcon
