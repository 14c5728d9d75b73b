#pragma once

#include <optional>
#include <vector>

#include "projcon/connectivity.hpp"
#include "projcon/solver.hpp"

namespace projcon {

// Margin below 1 at which an eigenvalue radius counts as stable.
inline constexpr double kStabilityTol = 1e-7;

// Word enumeration refuses above this count.
inline constexpr long kWordCap = 1'000'000;

// Route-coverage search refuses when m * 2^m exceeds this.
inline constexpr long kRouteStateCap = 12L * (1L << 12);

struct SccCertEntry {
    std::vector<int> component;
    bool has_external_in_arc = false;
    int intersection_dim = 0;
};

struct StabilityReport {
    double spectral_radius = 0.0;  // NaN when the spectral side was not run
    bool is_stable = false;
    std::vector<SccCertEntry> scc_certificate;
    std::optional<bool> bruteforce_agreement;
};

// Eigenvalue radius of the stacked operator; stable when < 1 - kStabilityTol.
StabilityReport stability_spectral(const StackedOperator& op);

// Stable iff every strongly connected component with no external in-arc has a
// zero kernel intersection. Lists each component with its intersection
// dimension. Agrees with stability_spectral.
StabilityReport stability_scc(const Problem& problem, const DiGraph& G);

// Runs both routes and records whether they agree.
StabilityReport stability_report(const Problem& problem, const DiGraph& G);

// Fixed vector of the operator product over a sequence that is not jointly
// D-connected: z in the failing subset's kernel intersection, stacked over
// the subset. The blocks outside the subset are completed so that the full
// product fixes the vector exactly whenever that completion is solvable;
// otherwise they stay zero and only the subset rows are fixed.
struct UnitEigenvalueWitness {
    Vector eigenvector;             // stacked, length m*n
    Vector direction;               // the per-agent component z
    std::vector<int> failing_subset;
    double residual = 0.0;          // |product*v - v| / |v|
    bool full_product_fixed = false;
};

std::optional<UnitEigenvalueWitness> unit_eigenvalue_witness(const std::vector<DiGraph>& seq,
                                                             const Problem& problem);

struct RouteWitness {
    int vertex = 0;                 // route ends here
    std::vector<int> route;         // i_0..i_q
    std::vector<int> covered;       // distinct vertices on the route
};

struct ContractionCertificate {
    long tau = 0;                   // certified sequence length
    std::vector<RouteWitness> per_row_witness;
    double mixed_norm = 0.0;        // < 1 when the certificate is complete
};

// For each vertex, a route over the sequence ending there whose visited set
// is fully populated; when every vertex has one the operator product is a
// contraction in the mixed matrix norm and the norm is reported. For oracles
// with a nonzero global intersection the norm is taken on the quotient
// operator, where contraction is the meaningful statement.
std::optional<ContractionCertificate> contraction_certificate(const std::vector<DiGraph>& seq,
                                                              const PopulationOracle& oracle);

struct RateBound {
    enum class Formula { Corollary, StrongSequence };
    double lambda = 1.0;
    long tau = 0;
    double rho = 1.0;
    long omega = 0;
    Formula formula = Formula::Corollary;
    bool certified = false;  // false when the sup was sampled, not enumerated
};

// lambda = (1 - (m-1)(1-rho)/m^tau)^(1/tau) with tau the smallest length at
// which every graph word from the set certifies a contraction and rho the
// exact max two-norm over projector words of length tau+1 covering every
// agent. Unique-solution problems with D-connected graphs only.
RateBound rate_bound_corollary(const Problem& problem, const std::vector<DiGraph>& graphs);

// lambda = (sup over omega*l-length admissible products of the mixed norm)
// ^(1/(omega*l)) with omega = m(m-1)/2; admissible means every aligned
// l-window composes to a strongly connected graph. Exhaustive below the word
// cap, seeded sampling (flagged non-certified) above it.
RateBound rate_bound_strong_sequences(const Problem& problem, const std::vector<DiGraph>& set,
                                      long l, std::uint64_t sample_seed = 0);

// True iff every graph in the set is D-connected. When false and failing_index
// is given, it receives the position of the first failing graph.
bool p_convergable_check(const Problem& problem, const std::vector<DiGraph>& graphs,
                         int* failing_index = nullptr);

// Max |P_{j1} ... P_{jlen}|_2 over words that use every projector at least
// once. The parallel variant must return exactly the serial result.
double rho_max_covering_words_serial(const std::vector<Projector>& projectors, int len,
                                     std::vector<int>* argmax_word = nullptr);
double rho_max_covering_words(const std::vector<Projector>& projectors, int len,
                              std::vector<int>* argmax_word = nullptr);

// Projectors backing an oracle's certificate arithmetic: the plain kernel
// projectors when the global intersection is zero, the quotient projectors
// otherwise.
std::vector<Projector> certificate_projectors(const PopulationOracle& oracle);

}  // namespace projcon
