#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "projcon/connectivity.hpp"
#include "projcon/digraph.hpp"
#include "projcon/linalg.hpp"

namespace projcon {

// One agent's private block of the stacked equation, with the derived
// kernel basis and projector.
struct AgentData {
    Matrix A;          // n_i x n, n_i may be 0
    Vector b;          // n_i
    Subspace kernel;   // ker A
    Projector proj;    // onto ker A
    Vector least_norm;              // minimum-norm solution of A x = b
    bool consistent = true;         // whether A x = b is solvable at all
};

struct Problem {
    int n = 0;
    std::vector<AgentData> agents;
    Subspace kernel_intersection;              // over all agents
    std::optional<Vector> particular_solution; // unset when the stacked system is inconsistent

    int agent_count() const { return static_cast<int>(agents.size()); }
    bool unique_solution() const { return kernel_intersection.dim() == 0; }
    bool consistent() const { return particular_solution.has_value(); }

    Matrix stacked_A() const;
    Vector stacked_b() const;
    bool is_zero_A() const;

    PopulationOracle oracle() const;

    static Problem from_blocks(std::vector<Matrix> A_blocks, std::vector<Vector> b_blocks,
                               double rel_tol = kDefaultRankTol);
};

// P (F⊗I) P for the flocking matrix F of the source graph; block (i, j) is
// F_ij P_i P_j.
struct StackedOperator {
    int m = 0, n = 0;
    BlockMatrix blocks;
    DiGraph source_graph;

    std::vector<Vector> apply(const std::vector<Vector>& y) const;
    Matrix dense() const { return blocks.dense(); }
};

StackedOperator build_stacked(const Problem& problem, const DiGraph& G);

// Product of per-step operators over a finite graph sequence, later steps on
// the left. Optionally built from caller-supplied projectors instead of the
// problem's own (used for quotient dynamics).
BlockMatrix stacked_product(const std::vector<Projector>& projectors,
                            const std::vector<DiGraph>& seq);

enum class InitPolicy { LeastNorm, RandomKernel };

// x_i(1) solving A_i x = b_i per agent. RandomKernel adds a seeded offset
// inside ker A_i. Throws inconsistent_system naming the first bad agent.
std::vector<Vector> init_states(const Problem& problem, InitPolicy policy,
                                std::uint64_t seed = 0);

// One synchronous round: x_i <- x_i - (1/m_i) P_i (m_i x_i - sum of in-neighbor
// states). Self-arcs required. Agents update concurrently within the round.
std::vector<Vector> step(const Problem& problem, const std::vector<Vector>& states,
                         const DiGraph& G);
std::vector<Vector> step_serial(const Problem& problem, const std::vector<Vector>& states,
                                const DiGraph& G);

struct SimulationTrace {
    struct Round {
        long t = 0;
        std::vector<Vector> states;
        std::vector<double> errors;  // |x_i - reference|
        double disagreement = 0.0;   // max over pairs |x_i - x_j|
        double residual = 0.0;       // max over agents |A_i x_i - b_i|
    };
    std::vector<Round> rounds;
    Vector reference;  // the solution errors are measured against
};

// Runs init then T-1 rounds. The reference is the unique solution when there
// is one, otherwise the projection of the final average state onto the
// solution set. States are re-projected onto their constraint sets every
// kReprojectEvery rounds to stop drift.
inline constexpr long kReprojectEvery = 1000;
SimulationTrace simulate(const Problem& problem, const GraphSequence& seq, long T,
                         InitPolicy policy = InitPolicy::LeastNorm, std::uint64_t seed = 0);

// Rows of Q span the orthogonal complement of the overall kernel
// intersection; quotient projectors are Q P_i Q'.
struct QuotientDecomposition {
    Matrix Q;
    std::vector<Projector> quotient_projectors;
};

// Only defined for non-unique problems with A != 0.
QuotientDecomposition quotient_decompose(const Problem& problem);

// Plain neighborhood averaging; the component of the dynamics that lives in
// the kernel intersection.
std::vector<Vector> consensus_subsystem_step(const std::vector<Vector>& states_z,
                                             const DiGraph& G);

// Derived problem over the normal equations A'A x = A'b, row-partitioned into
// contiguous near-equal blocks. Always consistent; shares least-squares
// solutions with the original.
Problem to_least_squares(const Problem& problem);

}  // namespace projcon
