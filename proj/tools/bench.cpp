// Compares the OpenMP kernels against their serial references: subset
// classification sweeps, projector-word norm enumeration, and the per-agent
// simulation round. Results must match exactly; timings are informational.
#include <chrono>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "projcon/analysis.hpp"
#include "projcon/connectivity.hpp"
#include "projcon/solver.hpp"

using namespace projcon;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

PopulationOracle random_oracle(int m, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<Subspace> subs;
    for (int i = 0; i < m; ++i) {
        Matrix A(1, n);
        for (int c = 0; c < n; ++c) A(0, c) = gauss(rng);
        subs.push_back(kernel_basis(A));
    }
    return PopulationOracle::from_subspaces(std::move(subs));
}

Problem random_problem(int m, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = gauss(rng);
    std::vector<Matrix> As;
    std::vector<Vector> bs;
    for (int i = 0; i < m; ++i) {
        Matrix A(1, n);
        for (int c = 0; c < n; ++c) A(0, c) = gauss(rng);
        As.push_back(A);
        bs.push_back(A * x);
    }
    return Problem::from_blocks(std::move(As), std::move(bs));
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled; parallel kernels run serially\n");
#endif

    {
        PopulationOracle oracle = random_oracle(14, 6, 1);
        auto t0 = std::chrono::steady_clock::now();
        auto serial = partially_populated_subsets_serial(oracle);
        double ts = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        auto parallel = partially_populated_subsets(oracle);
        double tp = seconds_since(t0);
        std::printf("subset sweep (m=14, 16383 subsets): serial %.3fs, parallel %.3fs, %s\n", ts,
                    tp, serial == parallel ? "results identical" : "MISMATCH");
    }

    {
        PopulationOracle oracle = random_oracle(5, 6, 2);
        std::vector<Projector> projectors;
        for (const Subspace& s : oracle.subspaces) projectors.push_back(projector_onto(s));
        const int len = 8;  // 5^8 = 390625 words
        auto t0 = std::chrono::steady_clock::now();
        double serial = rho_max_covering_words_serial(projectors, len);
        double ts = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        double parallel = rho_max_covering_words(projectors, len);
        double tp = seconds_since(t0);
        std::printf("word norms (5^8 words): serial %.3fs, parallel %.3fs, %s\n", ts, tp,
                    serial == parallel ? "results identical" : "MISMATCH");
    }

    {
        Problem problem = random_problem(48, 24, 3);
        DiGraph g = DiGraph::complete(48);
        std::vector<Vector> states = init_states(problem, InitPolicy::RandomKernel, 7);
        const int rounds = 400;
        auto t0 = std::chrono::steady_clock::now();
        std::vector<Vector> a = states;
        for (int r = 0; r < rounds; ++r) a = step_serial(problem, a, g);
        double ts = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        std::vector<Vector> b = states;
        for (int r = 0; r < rounds; ++r) b = step(problem, b, g);
        double tp = seconds_since(t0);
        bool same = true;
        for (size_t i = 0; i < a.size(); ++i) same = same && a[i] == b[i];
        std::printf("simulation rounds (m=48, n=24, %d rounds): serial %.3fs, parallel %.3fs, %s\n",
                    rounds, ts, tp, same ? "results identical" : "MISMATCH");
    }
    return 0;
}
