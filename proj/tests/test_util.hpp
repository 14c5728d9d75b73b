#pragma once

#include <random>
#include <vector>

#include "projcon/digraph.hpp"
#include "projcon/linalg.hpp"
#include "projcon/connectivity.hpp"
#include "projcon/solver.hpp"

namespace testutil {

using projcon::DiGraph;
using projcon::Matrix;
using projcon::Problem;
using projcon::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> gauss;
    Matrix M(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) M(r, c) = gauss(rng);
    return M;
}

inline Vector random_vector(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> gauss;
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = gauss(rng);
    return v;
}

inline Matrix random_nonnegative(std::mt19937_64& rng, int rows, int cols, double density = 0.6) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Matrix M = Matrix::Zero(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (uni(rng) < density) M(r, c) = uni(rng);
    return M;
}

inline DiGraph random_graph(std::mt19937_64& rng, int m, double p, bool self_arcs = true) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    DiGraph g(m);
    if (self_arcs) g.add_self_arcs();
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            if (i != j && uni(rng) < p) g.add_arc(i, j);
    return g;
}

inline DiGraph random_strongly_connected(std::mt19937_64& rng, int m, double p = 0.3) {
    for (;;) {
        DiGraph g = random_graph(rng, m, p);
        if (projcon::is_strongly_connected(g)) return g;
    }
}

// Consistent instance: random row blocks against a planted solution.
inline Problem random_consistent_problem(std::mt19937_64& rng, int m, int n, int max_rows = 2) {
    std::uniform_int_distribution<int> rows_of(1, max_rows);
    Vector x = random_vector(rng, n);
    std::vector<Matrix> As;
    std::vector<Vector> bs;
    for (int i = 0; i < m; ++i) {
        Matrix A = random_matrix(rng, rows_of(rng), n);
        As.push_back(A);
        bs.push_back(A * x);
    }
    return Problem::from_blocks(std::move(As), std::move(bs));
}

// Keeps drawing until the stacked system has full column rank.
inline Problem random_unique_problem(std::mt19937_64& rng, int m, int n, int max_rows = 2) {
    for (;;) {
        Problem p = random_consistent_problem(rng, m, n, max_rows);
        if (p.unique_solution()) return p;
    }
}

// Kernels with planted redundancy: some agents reuse earlier rows, so proper
// fully populated subsets show up often.
inline projcon::PopulationOracle random_oracle(std::mt19937_64& rng, int m, int n) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<Matrix> rows;
    std::vector<projcon::Subspace> subs;
    for (int i = 0; i < m; ++i) {
        Matrix A;
        if (!rows.empty() && uni(rng) < 0.3) {
            A = rows[rng() % rows.size()] * (0.5 + uni(rng));
        } else {
            A = random_matrix(rng, 1 + static_cast<int>(rng() % 2), n);
        }
        rows.push_back(A);
        subs.push_back(projcon::kernel_basis(A));
    }
    return projcon::PopulationOracle::from_subspaces(std::move(subs));
}

// The worked 4-agent instance: rows 3 and 4 are multiples of rows 1 and 2,
// so the partially populated family is {1},{2},{3},{4},{1,3},{2,4}.
inline Problem four_agent_example() {
    Matrix A(4, 4);
    A << 1, 2, 3, 4, 5, 6, 7, 8, 3, 6, 9, 12, 10, 12, 14, 16;
    Vector x = Vector::Ones(4);
    std::vector<Matrix> As;
    std::vector<Vector> bs;
    for (int i = 0; i < 4; ++i) {
        As.push_back(A.row(i));
        bs.push_back(A.row(i) * x);
    }
    return Problem::from_blocks(std::move(As), std::move(bs));
}

}  // namespace testutil
