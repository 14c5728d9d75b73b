#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "projcon/solver.hpp"
#include "test_util.hpp"

using namespace projcon;
using testutil::four_agent_example;
using testutil::random_consistent_problem;
using testutil::random_graph;
using testutil::random_matrix;
using testutil::random_unique_problem;
using testutil::random_vector;

namespace {

// Single random rows with n > m: the kernel intersection keeps dimension
// n - m generically, so the solution set is a nontrivial affine subspace.
Problem random_nonunique_problem(std::mt19937_64& rng, int m, int n) {
    for (;;) {
        Vector x = random_vector(rng, n);
        std::vector<Matrix> As;
        std::vector<Vector> bs;
        for (int i = 0; i < m; ++i) {
            Matrix A = random_matrix(rng, 1, n);
            As.push_back(A);
            bs.push_back(A * x);
        }
        Problem p = Problem::from_blocks(std::move(As), std::move(bs));
        if (!p.unique_solution() && !p.is_zero_A()) return p;
    }
}

Problem zero_problem(int m, int n) {
    std::vector<Matrix> As(static_cast<size_t>(m), Matrix::Zero(0, n));
    std::vector<Vector> bs(static_cast<size_t>(m), Vector::Zero(0));
    return Problem::from_blocks(std::move(As), std::move(bs));
}

}  // namespace

TEST_CASE("problem construction") {
    Problem p = four_agent_example();
    CHECK(p.n == 4);
    CHECK(p.agent_count() == 4);
    CHECK(p.kernel_intersection.dim() == 2);
    CHECK_FALSE(p.unique_solution());
    REQUIRE(p.consistent());
    Matrix A = p.stacked_A();
    Vector b = p.stacked_b();
    CHECK((A * *p.particular_solution - b).norm() <= 1e-7 * (1.0 + b.norm()));

    for (const AgentData& a : p.agents) {
        CHECK(a.proj.valid());
        CHECK((a.A * a.kernel.basis).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("init_states") {
    // Full-rank block pins the agent to its own solution.
    Problem ident = Problem::from_blocks({Matrix::Identity(3, 3)}, {Vector::Constant(3, 2.5)});
    CHECK((init_states(ident, InitPolicy::LeastNorm)[0] - Vector::Constant(3, 2.5)).norm() == 0.0);

    Problem zero = zero_problem(2, 3);
    auto states = init_states(zero, InitPolicy::LeastNorm);
    CHECK(states[0].isZero(0));
    auto seeded = init_states(zero, InitPolicy::RandomKernel, 9);
    CHECK(seeded[0].norm() > 0.0);
    CHECK(seeded[0] == init_states(zero, InitPolicy::RandomKernel, 9)[0]);        // reproducible
    CHECK(seeded[0] != init_states(zero, InitPolicy::RandomKernel, 10)[0]);

    Matrix A(1, 2);
    A << 1, 1;
    Problem lsn = Problem::from_blocks({A}, {Vector::Constant(1, 2.0)});
    CHECK((init_states(lsn, InitPolicy::LeastNorm)[0] - Vector::Ones(2)).norm() <= 1e-10);

    // Per-agent inconsistency is reported with the agent's label.
    Matrix bad(2, 1);
    bad << 1, 1;
    Vector rhs(2);
    rhs << 0, 1;
    Problem p = Problem::from_blocks({Matrix::Identity(1, 1), bad}, {Vector::Zero(1), rhs});
    CHECK_FALSE(p.agents[1].consistent);
    try {
        init_states(p, InitPolicy::LeastNorm);
        FAIL("expected inconsistent_system");
    } catch (const inconsistent_system& e) {
        CHECK(e.agent_label == 2);
    }
}

TEST_CASE("step fixed points") {
    std::mt19937_64 rng(3);
    // Every A_i square full rank: all projectors vanish and states freeze.
    std::vector<Matrix> As;
    std::vector<Vector> bs;
    Vector x = random_vector(rng, 3);
    for (int i = 0; i < 3; ++i) {
        Matrix A = random_matrix(rng, 3, 3);
        As.push_back(A);
        bs.push_back(A * x);
    }
    Problem pinned = Problem::from_blocks(As, bs);
    REQUIRE(pinned.unique_solution());
    auto states = init_states(pinned, InitPolicy::LeastNorm);
    auto next = step(pinned, states, DiGraph::complete(3));
    for (int i = 0; i < 3; ++i) CHECK((next[i] - states[i]).norm() <= 1e-9);

    // Self-arcs only: nothing moves regardless of the data.
    Problem p = random_consistent_problem(rng, 4, 5);
    auto s0 = init_states(p, InitPolicy::RandomKernel, 4);
    auto s1 = step(p, s0, DiGraph::self_arcs_only(4));
    for (int i = 0; i < 4; ++i) CHECK((s1[i] - s0[i]).norm() == 0.0);

    DiGraph no_self(4, {{1, 2}});
    CHECK_THROWS_AS(step(p, s0, no_self), invalid_input);
}

TEST_CASE("step equals plain averaging when A is zero") {
    std::mt19937_64 rng(5);
    Problem zero = zero_problem(4, 3);
    std::vector<Vector> states;
    for (int i = 0; i < 4; ++i) states.push_back(random_vector(rng, 3));
    for (int trial = 0; trial < 20; ++trial) {
        DiGraph g = random_graph(rng, 4, 0.4);
        auto via_step = step(zero, states, g);
        auto via_avg = consensus_subsystem_step(states, g);
        for (int i = 0; i < 4; ++i) CHECK((via_step[i] - via_avg[i]).norm() <= 1e-14);
        states = via_step;
    }
}

TEST_CASE("serial and parallel rounds agree exactly") {
    std::mt19937_64 rng(7);
    Problem p = random_consistent_problem(rng, 5, 4);
    auto states = init_states(p, InitPolicy::RandomKernel, 1);
    for (int t = 0; t < 10; ++t) {
        DiGraph g = random_graph(rng, 5, 0.5);
        auto a = step(p, states, g);
        auto b = step_serial(p, states, g);
        for (int i = 0; i < 5; ++i) CHECK(a[i] == b[i]);
        states = a;
    }
}

TEST_CASE("states stay on their constraint sets") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        Problem p = random_consistent_problem(rng, 3 + trial % 3, 4);
        double scale = 1e-7 * (1.0 + p.stacked_b().norm());
        GraphSequence seq = GraphSequence::random(p.agent_count(), 0.5, trial);
        SimulationTrace trace = simulate(p, seq, 60, InitPolicy::RandomKernel, trial);
        for (const auto& round : trace.rounds) CHECK(round.residual <= scale);
    }
}

TEST_CASE("stacked operator blocks and non-expansiveness") {
    // All-zero data turns the operator into F kron I.
    Problem zero = zero_problem(3, 2);
    DiGraph g = DiGraph::complete(3);
    StackedOperator op = build_stacked(zero, g);
    Matrix F = flocking_matrix(g);
    Matrix kron = Matrix::Zero(6, 6);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) kron.block(i * 2, j * 2, 2, 2) = F(i, j) * Matrix::Identity(2, 2);
    CHECK((op.dense() - kron).cwiseAbs().maxCoeff() <= 1e-14);

    // Two agents pinned to x2 = 0 averaging over the complete graph.
    Matrix A(1, 2);
    A << 0, 1;
    Problem pinned = Problem::from_blocks({A, A}, {Vector::Zero(1), Vector::Zero(1)});
    StackedOperator op2 = build_stacked(pinned, DiGraph::complete(2));
    Matrix expect = Matrix::Zero(2, 2);
    expect(0, 0) = 0.5;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK((op2.blocks.block(i, j) - expect).cwiseAbs().maxCoeff() <= 1e-14);

    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        Problem p = random_consistent_problem(rng, 2 + trial % 4, 3 + trial % 3);
        DiGraph h = random_graph(rng, p.agent_count(), 0.5);
        CHECK(mixed_matrix_norm(build_stacked(p, h).blocks) <= 1.0 + 1e-9);
    }
}

TEST_CASE("direct rounds match the stacked error recursion") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        Problem p = random_consistent_problem(rng, 3 + trial % 3, 4);
        const Vector& x_star = *p.particular_solution;
        auto states = init_states(p, InitPolicy::RandomKernel, trial);
        for (int t = 0; t < 5; ++t) {
            DiGraph g = random_graph(rng, p.agent_count(), 0.5);
            StackedOperator op = build_stacked(p, g);
            std::vector<Vector> y;
            for (const Vector& x : states) y.push_back(x - x_star);
            auto propagated = op.apply(y);
            states = step(p, states, g);
            for (int i = 0; i < p.agent_count(); ++i)
                CHECK((states[i] - x_star - propagated[i]).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("simulate on a constant D-connected graph drives the error down") {
    std::mt19937_64 rng(19);
    Problem p = random_unique_problem(rng, 4, 4);
    GraphSequence seq = GraphSequence::periodic({DiGraph::complete(4)});
    SimulationTrace trace = simulate(p, seq, 200, InitPolicy::RandomKernel, 2);
    double first = trace.rounds.front().errors[0];
    double last = *std::max_element(trace.rounds.back().errors.begin(),
                                    trace.rounds.back().errors.end());
    CHECK(last < 1e-8);
    CHECK(last < first);
    CHECK(trace.rounds.back().disagreement < 1e-8);
}

TEST_CASE("simulate freezes on the idle sequence") {
    std::mt19937_64 rng(23);
    Problem p = random_consistent_problem(rng, 3, 4);
    GraphSequence seq = GraphSequence::periodic({DiGraph::self_arcs_only(3)});
    SimulationTrace trace = simulate(p, seq, 20, InitPolicy::RandomKernel, 3);
    for (const auto& round : trace.rounds)
        for (int i = 0; i < 3; ++i)
            CHECK((round.states[i] - trace.rounds.front().states[i]).norm() == 0.0);
}

TEST_CASE("non-unique case agrees on a solution under rooted plus D-connected graphs") {
    Problem p = four_agent_example();
    // Complete graph is both rooted and D-connected. The quotient contracts
    // at about 0.984 per round here, so give it room.
    GraphSequence seq = GraphSequence::periodic({DiGraph::complete(4)});
    SimulationTrace trace = simulate(p, seq, 1500, InitPolicy::RandomKernel, 5);
    const auto& last = trace.rounds.back();
    CHECK(last.disagreement < 1e-8);
    Vector agreed = last.states[0];
    CHECK((p.stacked_A() * agreed - p.stacked_b()).norm() < 1e-7);
    // The reported reference lies on the solution set and near the agreement.
    CHECK((p.stacked_A() * trace.reference - p.stacked_b()).norm() < 1e-6);
    CHECK(*std::max_element(last.errors.begin(), last.errors.end()) < 1e-6);
}

TEST_CASE("quotient decomposition properties") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 100; ++trial) {
        Problem p = random_nonunique_problem(rng, 2 + trial % 3, 4 + trial % 3);
        QuotientDecomposition d = quotient_decompose(p);
        const long q_rows = d.Q.rows();
        CHECK(q_rows == p.n - p.kernel_intersection.dim());
        CHECK((d.Q * d.Q.transpose() - Matrix::Identity(q_rows, q_rows)).cwiseAbs().maxCoeff() <=
              1e-10);
        for (int i = 0; i < p.agent_count(); ++i) {
            const Projector& pb = d.quotient_projectors[i];
            CHECK(pb.valid());  // idempotent and symmetric
            CHECK((d.Q * p.agents[i].proj.mat - pb.mat * d.Q).cwiseAbs().maxCoeff() <= 1e-9);
        }
        // Quotient ranges intersect trivially across the whole network.
        std::vector<Subspace> ranges;
        for (const Projector& pb : d.quotient_projectors)
            ranges.push_back(kernel_basis(Matrix(Matrix::Identity(q_rows, q_rows) - pb.mat)));
        CHECK(intersect(ranges).dim() == 0);
    }
}

TEST_CASE("quotient population classes transfer") {
    Problem p = four_agent_example();
    QuotientDecomposition d = quotient_decompose(p);
    PopulationOracle oracle = p.oracle();
    const long q_rows = d.Q.rows();
    std::vector<Subspace> ranges;
    for (const Projector& pb : d.quotient_projectors)
        ranges.push_back(kernel_basis(Matrix(Matrix::Identity(q_rows, q_rows) - pb.mat)));
    for (std::uint32_t mask = 1; mask < (1u << 4); ++mask) {
        std::vector<int> members = mask_to_vertices(mask);
        std::vector<Subspace> subset;
        for (int v : members) subset.push_back(ranges[static_cast<size_t>(v - 1)]);
        bool quotient_trivial = intersect(subset).dim() == 0;
        bool fully = classify_subset(oracle, members) == SubsetClass::FullyPopulated;
        CHECK(quotient_trivial == fully);
    }
}

TEST_CASE("quotient of identical blocks is zero") {
    Matrix A(2, 4);
    A << 1, 0, 1, 0, 0, 1, 0, 1;  // rank 2
    Vector b = Vector::Zero(2);
    Problem p = Problem::from_blocks({A, A, A}, {b, b, b});
    QuotientDecomposition d = quotient_decompose(p);
    CHECK(d.Q.rows() == 2);
    for (const Projector& pb : d.quotient_projectors) CHECK(pb.mat.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("quotient rejects unique and all-zero problems") {
    std::mt19937_64 rng(31);
    CHECK_THROWS_AS(quotient_decompose(random_unique_problem(rng, 3, 3)), invalid_input);
    CHECK_THROWS_AS(quotient_decompose(zero_problem(2, 3)), invalid_input);
}

TEST_CASE("consensus subsystem") {
    std::mt19937_64 rng(37);
    Vector z = random_vector(rng, 3);
    std::vector<Vector> equal(4, z);
    auto next = consensus_subsystem_step(equal, random_graph(rng, 4, 0.5));
    for (const Vector& v : next) CHECK((v - z).norm() <= 1e-14);

    std::vector<Vector> states;
    for (int i = 0; i < 4; ++i) states.push_back(random_vector(rng, 3));
    Vector mean = (states[0] + states[1] + states[2] + states[3]) / 4.0;
    for (const Vector& v : consensus_subsystem_step(states, DiGraph::complete(4)))
        CHECK((v - mean).norm() <= 1e-14);
}

TEST_CASE("quotient plus consensus reproduces the full dynamics") {
    std::mt19937_64 rng(41);
    Problem p = random_nonunique_problem(rng, 3, 5);
    QuotientDecomposition d = quotient_decompose(p);
    const Vector& x_star = *p.particular_solution;

    auto states = init_states(p, InitPolicy::RandomKernel, 11);
    std::vector<Vector> ybar, z;
    for (const Vector& x : states) {
        Vector y = x - x_star;
        ybar.push_back(d.Q * y);
        z.push_back(y - d.Q.transpose() * (d.Q * y));
    }
    Matrix Pglob = projector_onto(p.kernel_intersection).mat;
    for (const Vector& zi : z) CHECK((zi - Pglob * zi).norm() <= 1e-8);

    for (int t = 0; t < 20; ++t) {
        DiGraph g = random_graph(rng, 3, 0.5);
        states = step(p, states, g);
        // Quotient recursion with the reduced projectors.
        std::vector<Vector> next_bar(ybar.size());
        for (int i = 1; i <= 3; ++i) {
            auto nbrs = g.in_neighbors(i);
            Vector sum = Vector::Zero(d.Q.rows());
            for (int j : nbrs) sum += d.quotient_projectors[j - 1].mat * ybar[j - 1];
            next_bar[i - 1] =
                d.quotient_projectors[i - 1].mat * sum / static_cast<double>(nbrs.size());
        }
        ybar = next_bar;
        z = consensus_subsystem_step(z, g);
        for (int i = 0; i < 3; ++i) {
            Vector rebuilt = x_star + d.Q.transpose() * ybar[i] + z[i];
            CHECK((rebuilt - states[i]).norm() <= 1e-8);
        }
    }
}

TEST_CASE("least squares transform") {
    // Two copies of the same inconsistent scalar equation.
    Matrix a1(1, 1), a2(1, 1);
    a1 << 1;
    a2 << 1;
    Vector b1(1), b2(1);
    b1 << 0;
    b2 << 2;
    Problem original = Problem::from_blocks({a1, a2}, {b1, b2});
    CHECK_FALSE(original.consistent());
    Problem derived = to_least_squares(original);
    CHECK(derived.consistent());
    REQUIRE(derived.particular_solution.has_value());
    CHECK((*derived.particular_solution - Vector::Ones(1)).norm() <= 1e-10);
    // One of the two agents ends up with an empty block; its projector is I.
    CHECK(derived.agents[1].A.rows() == 0);
    CHECK(derived.agents[1].proj.mat.isApprox(Matrix::Identity(1, 1)));

    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + trial % 3;
        int rows = n + 2;
        Matrix A = random_matrix(rng, rows, n);  // full column rank
        Vector b = random_vector(rng, rows);
        int first = rows / 2 + rows % 2;
        std::vector<Matrix> As{A.topRows(first), A.bottomRows(rows - first)};
        std::vector<Vector> bs{b.head(first), b.tail(rows - first)};
        Problem orig = Problem::from_blocks(As, bs);
        Problem ls = to_least_squares(orig);
        REQUIRE(ls.consistent());
        CHECK(ls.unique_solution());
        Vector pinv = least_norm_solution(A, b);
        CHECK((*ls.particular_solution - pinv).norm() <= 1e-6);

        // The derived problem also solves distributively; the contraction
        // rate depends on the draw, so iterate until the tolerance is met.
        DiGraph g = DiGraph::complete(2);
        auto states = init_states(ls, InitPolicy::LeastNorm);
        long t = 0;
        while ((states[0] - pinv).norm() > 1e-6 && t < 100000) {
            states = step(ls, states, g);
            ++t;
        }
        CHECK((states[0] - pinv).norm() <= 1e-6);
    }
}
