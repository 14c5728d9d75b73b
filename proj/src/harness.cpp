#include "projcon/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace projcon {

namespace {

std::string strip_comment(const std::string& line) {
    auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

std::vector<std::string> tokens_of(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double parse_number(const std::string& tok, int line_no) {
    try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw parse_error("expected a number, got '" + tok + "'", line_no);
    }
}

long parse_count(const std::string& tok, int line_no) {
    double v = parse_number(tok, line_no);
    if (v < 0 || v != std::floor(v)) throw parse_error("expected a nonnegative integer", line_no);
    return static_cast<long>(v);
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
    Scenario sc;
    std::istringstream input(text);
    std::string raw;
    int line_no = 0;
    bool seen_n = false;

    auto next_tokens = [&](std::vector<std::string>& toks) {
        while (std::getline(input, raw)) {
            ++line_no;
            toks = tokens_of(strip_comment(raw));
            if (!toks.empty()) return true;
        }
        return false;
    };

    std::vector<std::string> toks;
    while (next_tokens(toks)) {
        const std::string& key = toks[0];
        if (key == "n") {
            if (toks.size() != 2) throw parse_error("usage: n <dimension>", line_no);
            sc.n = static_cast<int>(parse_count(toks[1], line_no));
            if (sc.n < 1) throw parse_error("state dimension must be >= 1", line_no);
            seen_n = true;
        } else if (key == "agent") {
            if (!seen_n) throw parse_error("agent block before 'n'", line_no);
            std::vector<Vector> rows;
            Vector b;
            bool seen_b = false, closed = false;
            while (next_tokens(toks)) {
                if (toks[0] == "end") {
                    closed = true;
                    break;
                }
                if (toks[0] == "row") {
                    if (static_cast<int>(toks.size()) - 1 != sc.n)
                        throw parse_error("agent " + std::to_string(sc.agent_count() + 1) +
                                              ": row needs " + std::to_string(sc.n) + " entries",
                                          line_no);
                    Vector r(sc.n);
                    for (int i = 0; i < sc.n; ++i) r(i) = parse_number(toks[i + 1], line_no);
                    rows.push_back(std::move(r));
                } else if (toks[0] == "b") {
                    b.resize(static_cast<long>(toks.size()) - 1);
                    for (size_t i = 1; i < toks.size(); ++i)
                        b(static_cast<long>(i - 1)) = parse_number(toks[i], line_no);
                    seen_b = true;
                } else {
                    throw parse_error("unexpected '" + toks[0] + "' inside agent block", line_no);
                }
            }
            if (!closed) throw parse_error("agent block not closed with 'end'", line_no);
            if (!seen_b) b = Vector::Zero(static_cast<long>(rows.size()));
            if (b.size() != static_cast<long>(rows.size()))
                throw parse_error("agent " + std::to_string(sc.agent_count() + 1) + ": b has " +
                                      std::to_string(b.size()) + " entries for " +
                                      std::to_string(rows.size()) + " rows",
                                  line_no);
            Matrix A(static_cast<long>(rows.size()), sc.n);
            for (size_t r = 0; r < rows.size(); ++r) A.row(static_cast<long>(r)) = rows[r];
            sc.A_blocks.push_back(std::move(A));
            sc.b_blocks.push_back(std::move(b));
        } else if (key == "sequence") {
            if (sc.agent_count() == 0) throw parse_error("sequence before any agent block", line_no);
            if (toks.size() < 2) throw parse_error("usage: sequence <explicit|periodic|random>", line_no);
            const int m = sc.agent_count();
            if (toks[1] == "random") {
                double p = -1.0;
                std::optional<std::uint64_t> seed;
                for (size_t i = 2; i + 1 < toks.size(); i += 2) {
                    if (toks[i] == "p") p = parse_number(toks[i + 1], line_no);
                    else if (toks[i] == "seed")
                        seed = static_cast<std::uint64_t>(parse_count(toks[i + 1], line_no));
                    else
                        throw parse_error("unknown random-sequence option '" + toks[i] + "'", line_no);
                }
                if (p < 0.0 || p > 1.0)
                    throw parse_error("random sequence needs p in [0,1]", line_no);
                if (!seed) throw parse_error("random sequence needs a seed", line_no);
                sc.sequence = GraphSequence::random(m, p, *seed);
            } else if (toks[1] == "explicit" || toks[1] == "periodic") {
                bool periodic = toks[1] == "periodic";
                std::vector<DiGraph> graphs;
                bool closed = false;
                while (next_tokens(toks)) {
                    if (toks[0] == "end") {
                        closed = true;
                        break;
                    }
                    if (toks[0] != "graph")
                        throw parse_error("expected 'graph ...' or 'end' in sequence block", line_no);
                    std::ostringstream arcs;
                    for (size_t i = 1; i < toks.size(); ++i) arcs << toks[i] << ' ';
                    bool added = false;
                    try {
                        graphs.push_back(DiGraph::from_text(m, arcs.str(), &added));
                    } catch (const invalid_input& e) {
                        throw parse_error(e.what(), line_no);
                    }
                    sc.self_arcs_added = sc.self_arcs_added || added;
                }
                if (!closed) throw parse_error("sequence block not closed with 'end'", line_no);
                if (graphs.empty()) throw parse_error("sequence block has no graphs", line_no);
                sc.sequence = periodic ? GraphSequence::periodic(std::move(graphs))
                                       : GraphSequence::explicit_list(std::move(graphs));
            } else {
                throw parse_error("unknown sequence kind '" + toks[1] + "'", line_no);
            }
        } else if (key == "steps" || key == "T") {
            if (toks.size() != 2) throw parse_error("usage: steps <count>", line_no);
            sc.steps = parse_count(toks[1], line_no);
            if (sc.steps < 1) throw parse_error("steps must be >= 1", line_no);
        } else if (key == "seed") {
            if (toks.size() != 2) throw parse_error("usage: seed <value>", line_no);
            sc.seed = static_cast<std::uint64_t>(parse_count(toks[1], line_no));
        } else if (key == "init") {
            if (toks.size() != 2) throw parse_error("usage: init <least-norm|random-kernel>", line_no);
            if (toks[1] == "least-norm") sc.init = InitPolicy::LeastNorm;
            else if (toks[1] == "random-kernel") sc.init = InitPolicy::RandomKernel;
            else throw parse_error("unknown init policy '" + toks[1] + "'", line_no);
        } else if (key == "mode") {
            if (toks.size() != 2) throw parse_error("usage: mode <exact|least-squares>", line_no);
            if (toks[1] == "exact") sc.mode = Scenario::Mode::Exact;
            else if (toks[1] == "least-squares") sc.mode = Scenario::Mode::LeastSquares;
            else throw parse_error("unknown mode '" + toks[1] + "'", line_no);
        } else if (key == "analyze") {
            for (size_t i = 1; i < toks.size(); ++i) {
                static const std::vector<std::string> known = {
                    "stability", "connectivity", "rate", "certificate", "witness"};
                if (std::find(known.begin(), known.end(), toks[i]) == known.end())
                    throw parse_error("unknown analysis '" + toks[i] + "'", line_no);
                sc.analyses.push_back(toks[i]);
            }
        } else {
            throw parse_error("unknown directive '" + key + "' in " + origin, line_no);
        }
    }

    if (!seen_n) throw parse_error("missing 'n' directive", line_no);
    if (sc.agent_count() == 0) throw parse_error("no agent blocks", line_no);
    if (!sc.sequence) throw parse_error("missing sequence block", line_no);
    return sc;
}

Scenario parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open scenario file '" + path + "'", 0);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path);
}

Problem Scenario::build_problem() const {
    Problem p = Problem::from_blocks(A_blocks, b_blocks);
    return mode == Mode::LeastSquares ? to_least_squares(p) : p;
}

DiGraph gen_sequence(const GraphSequence& spec, long t) { return spec.at(t); }

double fitted_geometric_rate(const std::vector<double>& series) {
    const size_t start = series.size() / 2;
    const size_t count = series.size() - start;
    if (count < 2) return 0.0;
    double sum_t = 0, sum_y = 0, sum_tt = 0, sum_ty = 0;
    for (size_t k = start; k < series.size(); ++k) {
        double t = static_cast<double>(k);
        double y = std::log(series[k] + kLogFloor);
        sum_t += t;
        sum_y += y;
        sum_tt += t * t;
        sum_ty += t * y;
    }
    double nd = static_cast<double>(count);
    return (nd * sum_ty - sum_t * sum_y) / (nd * sum_tt - sum_t * sum_t);
}

void write_trace_csv(const std::string& path, const SimulationTrace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace file '" + path + "'");
    out << "t,agent,error,disagreement,residual\n";
    char buf[3][32];
    for (const auto& round : trace.rounds) {
        for (size_t i = 0; i < round.errors.size(); ++i) {
            std::snprintf(buf[0], sizeof buf[0], "%.17g", round.errors[i]);
            std::snprintf(buf[1], sizeof buf[1], "%.17g", round.disagreement);
            std::snprintf(buf[2], sizeof buf[2], "%.17g", round.residual);
            out << round.t << ',' << (i + 1) << ',' << buf[0] << ',' << buf[1] << ',' << buf[2]
                << '\n';
        }
    }
}

nlohmann::json to_json(const StabilityReport& rep) {
    nlohmann::json j;
    if (std::isnan(rep.spectral_radius)) j["spectral_radius"] = nullptr;
    else j["spectral_radius"] = rep.spectral_radius;
    j["is_stable"] = rep.is_stable;
    j["scc_certificate"] = nlohmann::json::array();
    for (const SccCertEntry& e : rep.scc_certificate)
        j["scc_certificate"].push_back({{"component", e.component},
                                        {"has_external_in_arc", e.has_external_in_arc},
                                        {"intersection_dim", e.intersection_dim}});
    if (rep.bruteforce_agreement) j["bruteforce_agreement"] = *rep.bruteforce_agreement;
    return j;
}

nlohmann::json to_json(const ConnectivityReport& rep) {
    nlohmann::json j;
    j["m"] = rep.m;
    j["global_intersection_dim"] = rep.global_intersection_dim;
    j["d_connected"] = rep.d_connected;
    j["per_vertex"] = nlohmann::json::array();
    for (const auto& e : rep.per_vertex)
        j["per_vertex"].push_back({{"vertex", e.vertex},
                                   {"sunk_set", e.sunk_set},
                                   {"intersection_dim", e.intersection_dim},
                                   {"fully_populated", e.fully_populated}});
    if (rep.failing_subsets) j["failing_subsets"] = *rep.failing_subsets;
    return j;
}

nlohmann::json to_json(const ContractionCertificate& cert) {
    nlohmann::json j;
    j["tau"] = cert.tau;
    j["mixed_norm"] = cert.mixed_norm;
    j["per_row_witness"] = nlohmann::json::array();
    for (const RouteWitness& w : cert.per_row_witness)
        j["per_row_witness"].push_back(
            {{"vertex", w.vertex}, {"route", w.route}, {"covered", w.covered}});
    return j;
}

nlohmann::json to_json(const RateBound& rb) {
    return {{"lambda", rb.lambda},
            {"tau", rb.tau},
            {"rho", rb.rho},
            {"omega", rb.omega},
            {"formula_used",
             rb.formula == RateBound::Formula::Corollary ? "corollary" : "strong-sequence-theorem"},
            {"certified", rb.certified}};
}

nlohmann::json to_json(const UnitEigenvalueWitness& wit) {
    nlohmann::json j;
    j["failing_subset"] = wit.failing_subset;
    j["residual"] = wit.residual;
    j["full_product_fixed"] = wit.full_product_fixed;
    j["direction"] = std::vector<double>(wit.direction.data(),
                                         wit.direction.data() + wit.direction.size());
    j["eigenvector"] = std::vector<double>(wit.eigenvector.data(),
                                           wit.eigenvector.data() + wit.eigenvector.size());
    return j;
}

nlohmann::json to_json(const RepeatedCheckResult& res) {
    nlohmann::json j;
    j["ok"] = res.ok;
    j["verified_up_to_windows"] = res.windows_checked;
    j["window_length"] = res.window_length;
    j["tau0"] = res.tau0;
    j["note"] = "finite verification; the property is asymptotic";
    if (res.failing_window) j["failing_window"] = *res.failing_window;
    return j;
}

std::vector<DiGraph> sequence_prefix(const GraphSequence& seq, long horizon) {
    long count = 0;
    switch (seq.kind()) {
        case GraphSequence::Kind::Explicit:
            count = *seq.length();
            break;
        case GraphSequence::Kind::Periodic:
            count = static_cast<long>(seq.graphs().size());
            break;
        case GraphSequence::Kind::Random:
            count = horizon;
            break;
    }
    std::vector<DiGraph> out;
    for (long t = 1; t <= count; ++t) out.push_back(seq.at(t));
    return out;
}

nlohmann::json analyze_stability(const Problem& problem, const DiGraph& G) {
    return to_json(stability_report(problem, G));
}

nlohmann::json analyze_connectivity(const Problem& problem, const GraphSequence& seq,
                                    long horizon) {
    PopulationOracle oracle = problem.oracle();
    nlohmann::json j;
    j["first_graph"] = to_json(connectivity_report(oracle, seq.at(1)));
    long l = seq.kind() == GraphSequence::Kind::Periodic
                 ? static_cast<long>(seq.graphs().size())
                 : 1;
    long windows = horizon;
    if (seq.length()) windows = std::min(windows, *seq.length() / l);
    if (windows >= 1) {
        j["repeated_d_connected"] =
            to_json(is_repeatedly_jointly(&oracle, seq, l, 1, windows, JointProperty::DConnected));
        j["repeated_rooted"] =
            to_json(is_repeatedly_jointly(nullptr, seq, l, 1, windows, JointProperty::Rooted));
        j["repeated_strongly_connected"] = to_json(
            is_repeatedly_jointly(nullptr, seq, l, 1, windows, JointProperty::StronglyConnected));
    }
    return j;
}

namespace {

std::vector<DiGraph> distinct_graphs(const std::vector<DiGraph>& seq) {
    std::vector<DiGraph> out;
    for (const DiGraph& g : seq)
        if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
    return out;
}

}  // namespace

nlohmann::json analyze_rate(const Problem& problem, const GraphSequence& seq, long horizon) {
    std::vector<DiGraph> set = distinct_graphs(sequence_prefix(seq, horizon));
    bool all_strong = true;
    for (const DiGraph& g : set) all_strong = all_strong && is_strongly_connected(g);
    RateBound rb = all_strong ? rate_bound_strong_sequences(problem, set, 1)
                              : rate_bound_corollary(problem, set);
    return to_json(rb);
}

nlohmann::json analyze_certificate(const Problem& problem, const GraphSequence& seq,
                                   long horizon) {
    PopulationOracle oracle = problem.oracle();
    std::vector<DiGraph> prefix = sequence_prefix(seq, horizon);
    std::vector<DiGraph> attempt;
    for (long rep = 1; rep <= std::max<long>(1, horizon); ++rep) {
        attempt.insert(attempt.end(), prefix.begin(), prefix.end());
        if (auto cert = contraction_certificate(attempt, oracle)) return to_json(*cert);
        if (seq.kind() == GraphSequence::Kind::Explicit) break;  // nothing more to append
    }
    return {{"found", false}, {"tried_length", static_cast<long>(attempt.size())}};
}

nlohmann::json analyze_witness(const Problem& problem, const GraphSequence& seq, long horizon) {
    std::vector<DiGraph> prefix = sequence_prefix(seq, horizon);
    if (auto wit = unit_eigenvalue_witness(prefix, problem)) return to_json(*wit);
    return {{"found", false}, {"jointly_d_connected", true}};
}

RunReport run(const Scenario& scenario, const RunOptions& options) {
    auto clock_start = std::chrono::steady_clock::now();
    Problem problem = scenario.build_problem();
    const GraphSequence& seq = *scenario.sequence;
    long T = options.steps.value_or(scenario.steps);
    std::uint64_t seed = options.seed.value_or(scenario.seed);
    long horizon = options.horizon.value_or(10);

    SimulationTrace trace = simulate(problem, seq, T, scenario.init, seed);

    RunReport rep;
    const auto& last = trace.rounds.back();
    rep.final_error = *std::max_element(last.errors.begin(), last.errors.end());
    rep.final_disagreement = last.disagreement;
    std::vector<double> series;
    series.reserve(trace.rounds.size());
    for (const auto& r : trace.rounds)
        series.push_back(r.disagreement + *std::max_element(r.errors.begin(), r.errors.end()));
    rep.fitted_rate = fitted_geometric_rate(series);

    rep.analyses = nlohmann::json::object();
    for (const std::string& a : scenario.analyses) {
        if (a == "stability") rep.analyses["stability"] = analyze_stability(problem, seq.at(1));
        else if (a == "connectivity")
            rep.analyses["connectivity"] = analyze_connectivity(problem, seq, horizon);
        else if (a == "rate") rep.analyses["rate"] = analyze_rate(problem, seq, horizon);
        else if (a == "certificate")
            rep.analyses["certificate"] = analyze_certificate(problem, seq, horizon);
        else if (a == "witness") rep.analyses["witness"] = analyze_witness(problem, seq, horizon);
    }

    std::filesystem::create_directories(options.out_dir);
    write_trace_csv(options.out_dir + "/trace.csv", trace);

    nlohmann::json report;
    report["final_error"] = rep.final_error;
    report["final_disagreement"] = rep.final_disagreement;
    report["fitted_rate"] = rep.fitted_rate;
    report["steps"] = T;
    report["mode"] = scenario.mode == Scenario::Mode::Exact ? "exact" : "least-squares";
    report["self_arcs_added"] = scenario.self_arcs_added;
    report["unique_solution"] = problem.unique_solution();
    report["analyses"] = rep.analyses;
    std::ofstream out(options.out_dir + "/report.json");
    out << report.dump(2) << '\n';

    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    return rep;
}

}  // namespace projcon
