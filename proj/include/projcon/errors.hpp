#pragma once

#include <stdexcept>
#include <string>

namespace projcon {

// Thrown when an argument violates a documented precondition.
class invalid_input : public std::invalid_argument {
public:
    explicit invalid_input(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when a request exceeds a hard size cap (eigensolver dimension,
// subset enumeration, route-search state space, word enumeration).
class capacity_error : public std::runtime_error {
public:
    explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a linear system that must be solvable is not.
class inconsistent_system : public std::runtime_error {
public:
    explicit inconsistent_system(const std::string& what, int agent = -1)
        : std::runtime_error(what), agent_label(agent) {}
    // 1-based label of the offending agent, or -1 for the stacked system.
    int agent_label;
};

// Thrown by the scenario reader; carries the offending line.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, int line_no)
        : std::runtime_error(what + " (line " + std::to_string(line_no) + ")"),
          line(line_no) {}
    int line;
};

// Process exit codes used by the CLI.
enum exit_code : int {
    exit_ok = 0,
    exit_parse = 2,
    exit_inconsistent = 3,
    exit_capacity = 4,
    exit_internal = 5,
};

}  // namespace projcon
