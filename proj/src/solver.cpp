#include "projcon/solver.hpp"

#include <algorithm>
#include <cmath>

namespace projcon {

Matrix Problem::stacked_A() const {
    long rows = 0;
    for (const AgentData& a : agents) rows += a.A.rows();
    Matrix A(rows, n);
    long at = 0;
    for (const AgentData& a : agents) {
        A.middleRows(at, a.A.rows()) = a.A;
        at += a.A.rows();
    }
    return A;
}

Vector Problem::stacked_b() const {
    long rows = 0;
    for (const AgentData& a : agents) rows += a.b.size();
    Vector b(rows);
    long at = 0;
    for (const AgentData& a : agents) {
        b.segment(at, a.b.size()) = a.b;
        at += a.b.size();
    }
    return b;
}

bool Problem::is_zero_A() const {
    for (const AgentData& a : agents)
        if (a.A.size() != 0 && a.A.cwiseAbs().maxCoeff() > 0.0) return false;
    return true;
}

PopulationOracle Problem::oracle() const {
    std::vector<Subspace> subspaces;
    subspaces.reserve(agents.size());
    for (const AgentData& a : agents) subspaces.push_back(a.kernel);
    return PopulationOracle::from_subspaces(std::move(subspaces));
}

Problem Problem::from_blocks(std::vector<Matrix> A_blocks, std::vector<Vector> b_blocks,
                             double rel_tol) {
    if (A_blocks.empty() || A_blocks.size() != b_blocks.size())
        throw invalid_input("Problem: need matching nonempty agent block lists");
    Problem p;
    p.n = static_cast<int>(A_blocks.front().cols());
    if (p.n < 1) throw invalid_input("Problem: state dimension must be >= 1");

    for (size_t i = 0; i < A_blocks.size(); ++i) {
        if (A_blocks[i].cols() != p.n)
            throw invalid_input("Problem: agent " + std::to_string(i + 1) +
                                " has wrong column count");
        if (A_blocks[i].rows() != b_blocks[i].size())
            throw invalid_input("Problem: agent " + std::to_string(i + 1) +
                                " row/b length mismatch");
        AgentData a;
        a.A = std::move(A_blocks[i]);
        a.b = std::move(b_blocks[i]);
        a.kernel = kernel_basis(a.A, rel_tol);
        a.proj = projector_onto(a.kernel);
        a.least_norm = least_norm_solution(a.A, a.b, rel_tol);
        double res = a.A.rows() ? (a.A * a.least_norm - a.b).norm() : 0.0;
        a.consistent = res <= 1e-8 * (1.0 + a.b.norm());
        p.agents.push_back(std::move(a));
    }

    std::vector<Subspace> kernels;
    for (const AgentData& a : p.agents) kernels.push_back(a.kernel);
    p.kernel_intersection = intersect(kernels, rel_tol);

    Matrix A = p.stacked_A();
    Vector b = p.stacked_b();
    if (A.rows() == 0) {
        p.particular_solution = Vector::Zero(p.n);
    } else {
        Vector x = least_norm_solution(A, b, rel_tol);
        if ((A * x - b).norm() <= 1e-7 * (1.0 + b.norm())) p.particular_solution = x;
    }
    return p;
}

StackedOperator build_stacked(const Problem& problem, const DiGraph& G) {
    if (G.vertex_count() != problem.agent_count())
        throw invalid_input("build_stacked: graph size mismatch");
    const int m = problem.agent_count();
    const int n = problem.n;
    Matrix F = flocking_matrix(G);
    BlockMatrix blocks = BlockMatrix::zero(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (F(i, j) != 0.0)
                blocks.block(i, j) = F(i, j) * problem.agents[i].proj.mat *
                                     problem.agents[j].proj.mat;
    return StackedOperator{m, n, std::move(blocks), G};
}

BlockMatrix stacked_product(const std::vector<Projector>& projectors,
                            const std::vector<DiGraph>& seq) {
    if (projectors.empty() || seq.empty()) throw invalid_input("stacked_product: empty input");
    const int m = static_cast<int>(projectors.size());
    const int n = projectors.front().dim();
    BlockMatrix acc = BlockMatrix::identity(m, n);
    bool first = true;
    for (const DiGraph& g : seq) {
        if (g.vertex_count() != m) throw invalid_input("stacked_product: graph size mismatch");
        Matrix F = flocking_matrix(g);
        BlockMatrix step = BlockMatrix::zero(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (F(i, j) != 0.0)
                    step.block(i, j) = F(i, j) * projectors[i].mat * projectors[j].mat;
        acc = first ? step : step.multiply(acc);
        first = false;
    }
    return acc;
}

std::vector<Vector> StackedOperator::apply(const std::vector<Vector>& y) const {
    if (static_cast<int>(y.size()) != m) throw invalid_input("StackedOperator::apply: size mismatch");
    std::vector<Vector> out(static_cast<size_t>(m), Vector::Zero(n));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (blocks.block(i, j).size()) out[i].noalias() += blocks.block(i, j) * y[j];
    return out;
}

std::vector<Vector> init_states(const Problem& problem, InitPolicy policy, std::uint64_t seed) {
    std::vector<Vector> states;
    states.reserve(problem.agents.size());
    for (size_t i = 0; i < problem.agents.size(); ++i) {
        const AgentData& a = problem.agents[i];
        if (!a.consistent)
            throw inconsistent_system(
                "init_states: agent " + std::to_string(i + 1) + " has no solution to its block",
                static_cast<int>(i + 1));
        Vector x = a.least_norm;
        if (policy == InitPolicy::RandomKernel && a.kernel.dim() > 0) {
            Vector w(a.kernel.dim());
            for (int k = 0; k < w.size(); ++k) {
                std::uint64_t word =
                    splitmix64(seed ^ splitmix64((i + 1) * 7919ULL + static_cast<std::uint64_t>(k)));
                w(k) = 2.0 * (static_cast<double>(word >> 11) * 0x1.0p-53) - 1.0;
            }
            x += a.kernel.basis * w;
        }
        states.push_back(std::move(x));
    }
    return states;
}

namespace {

Vector agent_update(const AgentData& a, const std::vector<Vector>& states,
                    const std::vector<int>& nbrs, const Vector& x_i) {
    const auto m_i = static_cast<double>(nbrs.size());
    Vector sum = Vector::Zero(x_i.size());
    for (int j : nbrs) sum += states[static_cast<size_t>(j - 1)];
    return x_i - a.proj.mat * (m_i * x_i - sum) / m_i;
}

void check_step_args(const Problem& problem, const std::vector<Vector>& states, const DiGraph& G) {
    if (G.vertex_count() != problem.agent_count()) throw invalid_input("step: graph size mismatch");
    if (states.size() != problem.agents.size()) throw invalid_input("step: state count mismatch");
    if (!G.has_all_self_arcs()) throw invalid_input("step: graph must have self-arcs at all vertices");
}

}  // namespace

std::vector<Vector> step_serial(const Problem& problem, const std::vector<Vector>& states,
                                const DiGraph& G) {
    check_step_args(problem, states, G);
    const int m = problem.agent_count();
    std::vector<Vector> next(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
        next[i] = agent_update(problem.agents[i], states, G.in_neighbors(i + 1), states[i]);
    return next;
}

std::vector<Vector> step(const Problem& problem, const std::vector<Vector>& states,
                         const DiGraph& G) {
    check_step_args(problem, states, G);
    const int m = problem.agent_count();
    std::vector<Vector> next(static_cast<size_t>(m));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i)
        next[i] = agent_update(problem.agents[i], states, G.in_neighbors(i + 1), states[i]);
    return next;
}

namespace {

double max_disagreement(const std::vector<Vector>& states) {
    double worst = 0.0;
    for (size_t i = 0; i < states.size(); ++i)
        for (size_t j = i + 1; j < states.size(); ++j)
            worst = std::max(worst, (states[i] - states[j]).norm());
    return worst;
}

double max_residual(const Problem& problem, const std::vector<Vector>& states) {
    double worst = 0.0;
    for (size_t i = 0; i < states.size(); ++i) {
        const AgentData& a = problem.agents[i];
        if (a.A.rows()) worst = std::max(worst, (a.A * states[i] - a.b).norm());
    }
    return worst;
}

void reproject(const Problem& problem, std::vector<Vector>& states) {
    for (size_t i = 0; i < states.size(); ++i) {
        const AgentData& a = problem.agents[i];
        if (!a.A.rows()) continue;
        states[i] -= least_norm_solution(a.A, Vector(a.A * states[i] - a.b));
    }
}

}  // namespace

SimulationTrace simulate(const Problem& problem, const GraphSequence& seq, long T,
                         InitPolicy policy, std::uint64_t seed) {
    if (T < 1) throw invalid_input("simulate: T must be >= 1");
    if (!problem.consistent())
        throw inconsistent_system("simulate: stacked system has no solution");
    if (seq.vertex_count() != problem.agent_count())
        throw invalid_input("simulate: sequence vertex count mismatch");

    SimulationTrace trace;
    std::vector<Vector> states = init_states(problem, policy, seed);
    std::vector<std::vector<Vector>> history;
    history.push_back(states);
    for (long t = 1; t < T; ++t) {
        states = step(problem, states, seq.at(t));
        if (t % kReprojectEvery == 0) reproject(problem, states);
        history.push_back(states);
    }

    // Reference: unique solution when there is one, else the projection of
    // the final average onto the solution set.
    const Vector& x_star = *problem.particular_solution;
    if (problem.unique_solution()) {
        trace.reference = x_star;
    } else {
        Vector avg = Vector::Zero(problem.n);
        for (const Vector& x : history.back()) avg += x;
        avg /= static_cast<double>(problem.agent_count());
        Matrix Pglob = projector_onto(problem.kernel_intersection).mat;
        trace.reference = x_star + Pglob * (avg - x_star);
    }

    for (long t = 1; t <= T; ++t) {
        SimulationTrace::Round round;
        round.t = t;
        round.states = history[static_cast<size_t>(t - 1)];
        for (const Vector& x : round.states) round.errors.push_back((x - trace.reference).norm());
        round.disagreement = max_disagreement(round.states);
        round.residual = max_residual(problem, round.states);
        trace.rounds.push_back(std::move(round));
    }
    return trace;
}

QuotientDecomposition quotient_decompose(const Problem& problem) {
    if (problem.unique_solution())
        throw invalid_input("quotient_decompose: problem has a unique solution");
    if (problem.is_zero_A())
        throw invalid_input("quotient_decompose: A = 0 leaves an empty quotient");

    // Columns of Q' = orthonormal basis of the complement: kernel of the
    // intersection's projector. Rows of Q are that basis transposed.
    Matrix Pglob = projector_onto(problem.kernel_intersection).mat;
    Subspace complement = kernel_basis(Pglob);
    QuotientDecomposition d;
    d.Q = complement.basis.transpose();
    for (const AgentData& a : problem.agents) {
        Projector pb;
        pb.mat = d.Q * a.proj.mat * d.Q.transpose();
        d.quotient_projectors.push_back(std::move(pb));
    }
    return d;
}

std::vector<Vector> consensus_subsystem_step(const std::vector<Vector>& states_z,
                                             const DiGraph& G) {
    if (static_cast<int>(states_z.size()) != G.vertex_count())
        throw invalid_input("consensus_subsystem_step: state count mismatch");
    if (!G.has_all_self_arcs())
        throw invalid_input("consensus_subsystem_step: graph must have self-arcs");
    std::vector<Vector> next(states_z.size());
    for (int i = 1; i <= G.vertex_count(); ++i) {
        auto nbrs = G.in_neighbors(i);
        Vector sum = Vector::Zero(states_z.front().size());
        for (int j : nbrs) sum += states_z[static_cast<size_t>(j - 1)];
        next[static_cast<size_t>(i - 1)] = sum / static_cast<double>(nbrs.size());
    }
    return next;
}

Problem to_least_squares(const Problem& problem) {
    Matrix A = problem.stacked_A();
    Vector b = problem.stacked_b();
    Matrix G = A.transpose() * A;
    Vector h = A.transpose() * b;

    const int m = problem.agent_count();
    const int n = problem.n;
    std::vector<Matrix> A_blocks;
    std::vector<Vector> b_blocks;
    int base = n / m, extra = n % m, at = 0;
    for (int i = 0; i < m; ++i) {
        int rows = base + (i < extra ? 1 : 0);
        A_blocks.push_back(G.middleRows(at, rows));
        b_blocks.push_back(h.segment(at, rows));
        at += rows;
    }
    return Problem::from_blocks(std::move(A_blocks), std::move(b_blocks));
}

}  // namespace projcon
