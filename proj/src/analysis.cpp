#include "projcon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace projcon {

StabilityReport stability_spectral(const StackedOperator& op) {
    StabilityReport rep;
    rep.spectral_radius = spectral_radius(op.dense());
    rep.is_stable = rep.spectral_radius < 1.0 - kStabilityTol;
    return rep;
}

StabilityReport stability_scc(const Problem& problem, const DiGraph& G) {
    if (G.vertex_count() != problem.agent_count())
        throw invalid_input("stability_scc: graph size mismatch");
    PopulationOracle oracle = problem.oracle();
    StabilityReport rep;
    rep.spectral_radius = std::numeric_limits<double>::quiet_NaN();
    rep.is_stable = true;
    for (const SccComponent& c : scc_decomposition(G)) {
        SccCertEntry e;
        e.component = c.vertices;
        e.has_external_in_arc = c.has_external_in_arc;
        e.intersection_dim = oracle.intersection_dim(c.vertices);
        // Components fed from outside are damped regardless of their
        // intersection; closed ones must pin the solution down alone.
        if (!e.has_external_in_arc && e.intersection_dim != 0) rep.is_stable = false;
        rep.scc_certificate.push_back(std::move(e));
    }
    return rep;
}

StabilityReport stability_report(const Problem& problem, const DiGraph& G) {
    StabilityReport spectral = stability_spectral(build_stacked(problem, G));
    StabilityReport scc = stability_scc(problem, G);
    spectral.scc_certificate = std::move(scc.scc_certificate);
    spectral.bruteforce_agreement = spectral.is_stable == scc.is_stable;
    return spectral;
}

namespace {

std::vector<Projector> plain_projectors(const PopulationOracle& oracle) {
    std::vector<Projector> out;
    out.reserve(oracle.subspaces.size());
    for (const Subspace& s : oracle.subspaces) out.push_back(projector_onto(s));
    return out;
}

}  // namespace

std::vector<Projector> certificate_projectors(const PopulationOracle& oracle) {
    if (oracle.global_dim() == 0) return plain_projectors(oracle);
    Matrix Pglob = projector_onto(oracle.global_intersection).mat;
    Matrix Q = kernel_basis(Pglob).basis.transpose();
    std::vector<Projector> out;
    out.reserve(oracle.subspaces.size());
    for (const Subspace& s : oracle.subspaces) {
        Projector p;
        p.mat = Q * projector_onto(s).mat * Q.transpose();
        out.push_back(std::move(p));
    }
    return out;
}

std::optional<UnitEigenvalueWitness> unit_eigenvalue_witness(const std::vector<DiGraph>& seq,
                                                             const Problem& problem) {
    PopulationOracle oracle = problem.oracle();
    DiGraph composed = compose_sequence(seq);
    if (composed.vertex_count() != oracle.m)
        throw invalid_input("unit_eigenvalue_witness: graph size mismatch");

    std::vector<int> failing;
    for (int v = 1; v <= oracle.m; ++v) {
        std::vector<int> sunk = sunk_vertex_set(composed, v);
        if (oracle.intersection_dim(sunk) != oracle.global_dim()) {
            failing = std::move(sunk);
            break;
        }
    }
    if (failing.empty()) return std::nullopt;

    // Direction inside the subset's intersection but outside the global one.
    Matrix basis = oracle.intersection_of(failing).basis;
    Matrix Pglob = projector_onto(oracle.global_intersection).mat;
    Matrix excess = basis - Pglob * basis;
    Eigen::JacobiSVD<Matrix> svd(excess, Eigen::ComputeFullU);
    Vector z = svd.matrixU().col(0);

    const int m = problem.agent_count();
    const int n = problem.n;
    std::vector<char> in_subset(static_cast<size_t>(m) + 1, 0);
    for (int v : failing) in_subset[v] = 1;

    Vector vec = Vector::Zero(static_cast<long>(m) * n);
    for (int i = 1; i <= m; ++i)
        if (in_subset[i]) vec.segment(static_cast<long>(i - 1) * n, n) = z;

    std::vector<Projector> projectors;
    for (const AgentData& a : problem.agents) projectors.push_back(a.proj);
    Matrix M = stacked_product(projectors, seq).dense();

    // Complete the blocks outside the subset so the whole product fixes the
    // vector: solve (I - C) w = B z_stack on the complement rows.
    std::vector<long> outside_rows;
    for (int i = 1; i <= m; ++i)
        if (!in_subset[i])
            for (int r = 0; r < n; ++r) outside_rows.push_back(static_cast<long>(i - 1) * n + r);
    if (!outside_rows.empty()) {
        const long k = static_cast<long>(outside_rows.size());
        Matrix C(k, k);
        Vector Bz(k);
        Vector Mv = M * vec;
        for (long r = 0; r < k; ++r) {
            Bz(r) = Mv(outside_rows[r]);
            for (long c = 0; c < k; ++c) C(r, c) = M(outside_rows[r], outside_rows[c]);
        }
        Matrix lhs = Matrix::Identity(k, k) - C;
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(lhs);
        Vector w = cod.solve(Bz);
        if ((lhs * w - Bz).norm() <= 1e-9 * (1.0 + Bz.norm()))
            for (long r = 0; r < k; ++r) vec(outside_rows[r]) = w(r);
    }

    UnitEigenvalueWitness wit;
    wit.direction = z;
    wit.failing_subset = std::move(failing);
    wit.residual = (M * vec - vec).norm() / vec.norm();
    wit.full_product_fixed = wit.residual <= 1e-8;
    wit.eigenvector = std::move(vec);
    return wit;
}

namespace {

// Forward reachability over (vertex, visited-set) states. Returns, for each
// end vertex, the first fully populated covering found, as (route, covered).
struct RouteCoverage {
    bool complete = false;
    std::vector<RouteWitness> witnesses;
};

RouteCoverage route_coverage(const std::vector<DiGraph>& seq, const PopulationOracle& oracle) {
    if (seq.empty()) throw invalid_input("route_coverage: empty sequence");
    const int m = oracle.m;
    const long q = static_cast<long>(seq.size());
    const long states = static_cast<long>(m) << m;
    if (states > kRouteStateCap)
        throw capacity_error("route search: m=" + std::to_string(m) +
                             " exceeds the state-space cap");
    for (const DiGraph& g : seq) {
        if (g.vertex_count() != m) throw invalid_input("route_coverage: graph size mismatch");
        if (!g.has_all_self_arcs())
            throw invalid_input("route_coverage: graphs must have self-arcs");
    }

    auto idx = [m](int vertex, std::uint32_t mask) {
        return static_cast<long>(mask) * m + (vertex - 1);
    };
    // pred[k][state]: encoded predecessor state at position k-1, -1 for a
    // start state, -2 unreached. First assignment wins; iteration order makes
    // the result deterministic.
    std::vector<std::vector<long>> pred(static_cast<size_t>(q) + 1,
                                        std::vector<long>(static_cast<size_t>(states), -2));
    for (int v = 1; v <= m; ++v) pred[0][idx(v, 1u << (v - 1))] = -1;

    for (long k = 1; k <= q; ++k) {
        const DiGraph& g = seq[static_cast<size_t>(k - 1)];
        std::vector<std::vector<int>> out(static_cast<size_t>(m) + 1);
        for (int v = 1; v <= m; ++v) out[v] = g.out_neighbors(v);
        for (long s = 0; s < states; ++s) {
            if (pred[k - 1][s] == -2) continue;
            int a = static_cast<int>(s % m) + 1;
            auto mask = static_cast<std::uint32_t>(s / m);
            for (int b : out[a]) {
                long t = idx(b, mask | (1u << (b - 1)));
                if (pred[k][t] == -2) pred[k][t] = s;
            }
        }
    }

    std::unordered_map<std::uint32_t, bool> fully;
    auto is_fully = [&](std::uint32_t mask) {
        auto it = fully.find(mask);
        if (it != fully.end()) return it->second;
        bool ok = oracle.intersection_dim(mask_to_vertices(mask)) == oracle.global_dim();
        fully.emplace(mask, ok);
        return ok;
    };

    RouteCoverage cov;
    cov.complete = true;
    for (int v = 1; v <= m; ++v) {
        long found = -1;
        for (std::uint32_t mask = 0; mask < (1u << m) && found < 0; ++mask) {
            long s = idx(v, mask);
            if (pred[q][s] != -2 && is_fully(mask)) found = s;
        }
        if (found < 0) {
            cov.complete = false;
            return cov;
        }
        RouteWitness w;
        w.vertex = v;
        w.covered = mask_to_vertices(static_cast<std::uint32_t>(found / m));
        std::vector<int> route(static_cast<size_t>(q) + 1);
        long s = found;
        for (long k = q; k >= 0; --k) {
            route[static_cast<size_t>(k)] = static_cast<int>(s % m) + 1;
            s = pred[static_cast<size_t>(k)][s];
        }
        w.route = std::move(route);
        cov.witnesses.push_back(std::move(w));
    }
    return cov;
}

}  // namespace

std::optional<ContractionCertificate> contraction_certificate(const std::vector<DiGraph>& seq,
                                                              const PopulationOracle& oracle) {
    RouteCoverage cov = route_coverage(seq, oracle);
    if (!cov.complete) return std::nullopt;
    ContractionCertificate cert;
    cert.tau = static_cast<long>(seq.size());
    cert.per_row_witness = std::move(cov.witnesses);
    cert.mixed_norm = mixed_matrix_norm(stacked_product(certificate_projectors(oracle), seq));
    return cert;
}

namespace {

long checked_pow(long base, int exp, long cap) {
    long out = 1;
    for (int i = 0; i < exp; ++i) {
        if (out > cap / base) return cap + 1;
        out *= base;
    }
    return out;
}

double word_norm(const std::vector<Projector>& projectors, const std::vector<int>& word) {
    Matrix acc = projectors[static_cast<size_t>(word[0])].mat;
    for (size_t k = 1; k < word.size(); ++k)
        acc = acc * projectors[static_cast<size_t>(word[k])].mat;
    return induced_two_norm(acc);
}

std::vector<int> decode_word(long index, int m, int len) {
    std::vector<int> word(static_cast<size_t>(len));
    for (int k = len - 1; k >= 0; --k) {
        word[static_cast<size_t>(k)] = static_cast<int>(index % m);
        index /= m;
    }
    return word;
}

bool covers_all(const std::vector<int>& word, int m) {
    std::uint32_t seen = 0;
    for (int j : word) seen |= 1u << j;
    return seen == (1u << m) - 1u;
}

}  // namespace

double rho_max_covering_words_serial(const std::vector<Projector>& projectors, int len,
                                     std::vector<int>* argmax_word) {
    const int m = static_cast<int>(projectors.size());
    if (len < m)
        throw invalid_input("rho enumeration: word length shorter than the projector count");
    long total = checked_pow(m, len, kWordCap);
    if (total > kWordCap)
        throw capacity_error("rho enumeration: " + std::to_string(m) + "^" + std::to_string(len) +
                             " words exceed the cap");
    double best = -1.0;
    long best_index = -1;
    for (long w = 0; w < total; ++w) {
        std::vector<int> word = decode_word(w, m, len);
        if (!covers_all(word, m)) continue;
        double norm = word_norm(projectors, word);
        if (norm > best) {
            best = norm;
            best_index = w;
        }
    }
    if (best_index < 0) throw invalid_input("rho enumeration: no covering words");
    if (argmax_word) {
        *argmax_word = decode_word(best_index, m, len);
        for (int& j : *argmax_word) ++j;  // back to 1-based labels
    }
    return best;
}

double rho_max_covering_words(const std::vector<Projector>& projectors, int len,
                              std::vector<int>* argmax_word) {
    const int m = static_cast<int>(projectors.size());
    if (len < m)
        throw invalid_input("rho enumeration: word length shorter than the projector count");
    long total = checked_pow(m, len, kWordCap);
    if (total > kWordCap)
        throw capacity_error("rho enumeration: " + std::to_string(m) + "^" + std::to_string(len) +
                             " words exceed the cap");
    std::vector<double> norms(static_cast<size_t>(total), -1.0);
#pragma omp parallel for schedule(dynamic, 256)
    for (long w = 0; w < total; ++w) {
        std::vector<int> word = decode_word(w, m, len);
        if (covers_all(word, m)) norms[static_cast<size_t>(w)] = word_norm(projectors, word);
    }
    // Serial reduction keeps the argmax deterministic regardless of schedule.
    double best = -1.0;
    long best_index = -1;
    for (long w = 0; w < total; ++w)
        if (norms[static_cast<size_t>(w)] > best) {
            best = norms[static_cast<size_t>(w)];
            best_index = w;
        }
    if (best_index < 0) throw invalid_input("rho enumeration: no covering words");
    if (argmax_word) {
        *argmax_word = decode_word(best_index, m, len);
        for (int& j : *argmax_word) ++j;
    }
    return best;
}

RateBound rate_bound_corollary(const Problem& problem, const std::vector<DiGraph>& graphs) {
    if (!problem.unique_solution())
        throw invalid_input("rate_bound_corollary: needs a unique-solution problem");
    if (graphs.empty()) throw invalid_input("rate_bound_corollary: empty graph set");
    const int m = problem.agent_count();
    if (m < 2) throw invalid_input("rate_bound_corollary: needs at least two agents");
    PopulationOracle oracle = problem.oracle();
    for (const DiGraph& g : graphs)
        if (!is_d_connected(oracle, g))
            throw invalid_input("rate_bound_corollary: set contains a non-D-connected graph");

    // Smallest length at which every graph word certifies; longer words
    // inherit the certificate through self-arcs.
    const long set_size = static_cast<long>(graphs.size());
    long tau = 0;
    for (int candidate = 1;; ++candidate) {
        long words = checked_pow(set_size, candidate, kWordCap);
        if (words > kWordCap)
            throw capacity_error("rate_bound_corollary: no certified tau within the word cap");
        bool all_ok = true;
        for (long w = 0; w < words && all_ok; ++w) {
            std::vector<int> word = decode_word(w, static_cast<int>(set_size), candidate);
            std::vector<DiGraph> seq;
            seq.reserve(word.size());
            for (int g : word) seq.push_back(graphs[static_cast<size_t>(g)]);
            all_ok = route_coverage(seq, oracle).complete;
        }
        if (all_ok) {
            tau = candidate;
            break;
        }
    }
    // rho ranges over words using every projector, which needs tau+1 >= m;
    // contraction at length >= tau keeps holding for the padded value.
    tau = std::max<long>(tau, m - 1);

    RateBound rb;
    rb.formula = RateBound::Formula::Corollary;
    rb.tau = tau;
    rb.omega = 0;
    rb.rho = rho_max_covering_words(plain_projectors(oracle), static_cast<int>(tau) + 1);
    rb.lambda = std::pow(1.0 - (m - 1) * (1.0 - rb.rho) / std::pow(m, tau), 1.0 / tau);
    rb.certified = true;
    return rb;
}

RateBound rate_bound_strong_sequences(const Problem& problem, const std::vector<DiGraph>& set,
                                      long l, std::uint64_t sample_seed) {
    if (!problem.unique_solution())
        throw invalid_input("rate_bound_strong_sequences: needs a unique-solution problem");
    if (set.empty()) throw invalid_input("rate_bound_strong_sequences: empty set");
    if (l < 1) throw invalid_input("rate_bound_strong_sequences: l must be >= 1");
    const int m = problem.agent_count();
    if (m < 2) throw invalid_input("rate_bound_strong_sequences: needs at least two agents");

    const long omega = static_cast<long>(m) * (m - 1) / 2;
    const long length = omega * l;
    const long set_size = static_cast<long>(set.size());
    std::vector<Projector> projectors = plain_projectors(problem.oracle());

    auto admissible = [&](const std::vector<int>& word) {
        for (long w = 0; w < omega; ++w) {
            std::vector<DiGraph> window;
            for (long k = 0; k < l; ++k)
                window.push_back(set[static_cast<size_t>(word[static_cast<size_t>(w * l + k)])]);
            if (!is_jointly_strongly_connected(window)) return false;
        }
        return true;
    };
    auto product_norm = [&](const std::vector<int>& word) {
        std::vector<DiGraph> seq;
        seq.reserve(word.size());
        for (int g : word) seq.push_back(set[static_cast<size_t>(g)]);
        return mixed_matrix_norm(stacked_product(projectors, seq));
    };

    RateBound rb;
    rb.formula = RateBound::Formula::StrongSequence;
    rb.omega = omega;
    rb.tau = length;

    long total = checked_pow(set_size, static_cast<int>(length), 100'000);
    double worst = -1.0;
    if (total <= 100'000) {
        for (long w = 0; w < total; ++w) {
            std::vector<int> word = decode_word(w, static_cast<int>(set_size),
                                                static_cast<int>(length));
            if (!admissible(word)) continue;
            worst = std::max(worst, product_norm(word));
        }
        rb.certified = true;
    } else {
        // Documented sampled estimate; not a certificate.
        const int draws = 200;
        int kept = 0;
        for (int d = 0; d < draws * 10 && kept < draws; ++d) {
            std::vector<int> word(static_cast<size_t>(length));
            for (long k = 0; k < length; ++k)
                word[static_cast<size_t>(k)] = static_cast<int>(
                    splitmix64(sample_seed ^ splitmix64(static_cast<std::uint64_t>(d) * 131 + k)) %
                    static_cast<std::uint64_t>(set_size));
            if (!admissible(word)) continue;
            worst = std::max(worst, product_norm(word));
            ++kept;
        }
        rb.certified = false;
    }
    if (worst < 0.0)
        throw invalid_input(
            "rate_bound_strong_sequences: no admissible word; the set is not l-compact");
    rb.rho = worst;
    rb.lambda = std::pow(worst, 1.0 / static_cast<double>(length));
    return rb;
}

bool p_convergable_check(const Problem& problem, const std::vector<DiGraph>& graphs,
                         int* failing_index) {
    if (!problem.unique_solution())
        throw invalid_input("p_convergable_check: needs a unique-solution problem");
    PopulationOracle oracle = problem.oracle();
    for (size_t i = 0; i < graphs.size(); ++i)
        if (!is_d_connected(oracle, graphs[i])) {
            if (failing_index) *failing_index = static_cast<int>(i);
            return false;
        }
    return true;
}

}  // namespace projcon
