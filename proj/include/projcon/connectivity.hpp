#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "projcon/digraph.hpp"
#include "projcon/linalg.hpp"

namespace projcon {

// Subset enumeration is exponential; refuse beyond this many agents.
inline constexpr int kSubsetEnumerationCap = 16;

// Per-agent kernels plus their cached overall intersection. All subset and
// connectivity queries run against this.
struct PopulationOracle {
    int m = 0;
    int ambient = 0;
    std::vector<Subspace> subspaces;  // kernel of agent i's block, index i-1
    Subspace global_intersection;

    static PopulationOracle from_subspaces(std::vector<Subspace> subspaces);

    // Intersection over labels in E (1-based).
    Subspace intersection_of(const std::vector<int>& E) const;
    int intersection_dim(const std::vector<int>& E) const;
    int global_dim() const { return global_intersection.dim(); }
};

enum class SubsetClass { FullyPopulated, PartiallyPopulated };

// E is fully populated when the agents in E alone pin down the same solution
// set as the whole network: their kernel intersection equals the global one.
SubsetClass classify_subset(const PopulationOracle& oracle, const std::vector<int>& E);

// All partially populated subsets as bitmasks (bit v-1 for label v), ascending.
// The parallel variant must return exactly the serial result.
std::vector<std::uint32_t> partially_populated_subsets_serial(const PopulationOracle& oracle);
std::vector<std::uint32_t> partially_populated_subsets(const PopulationOracle& oracle);

std::vector<int> mask_to_vertices(std::uint32_t mask);

// Definition check: every partially populated subset must have an in-neighbor
// outside itself. Exponential in m; capped.
bool is_d_connected_bruteforce(const PopulationOracle& oracle, const DiGraph& G);

// Polynomial check: for every vertex v, the sunk vertex set of v must be
// fully populated. Kept equivalent to the brute-force check by tests; if the
// two ever disagree, the brute-force answer is the authoritative one.
bool is_d_connected(const PopulationOracle& oracle, const DiGraph& G);

enum class JointProperty { DConnected, Rooted, StronglyConnected };

bool is_jointly_d_connected(const PopulationOracle& oracle, const std::vector<DiGraph>& seq);
bool is_jointly_rooted(const std::vector<DiGraph>& seq);
bool is_jointly_strongly_connected(const std::vector<DiGraph>& seq);
bool is_jointly(const PopulationOracle* oracle, const std::vector<DiGraph>& seq, JointProperty X);

// Finite verification of the repeated-joint property: every length-l window
// starting at tau0 + k*l, k = 0..windows-1, must be jointly X.
struct RepeatedCheckResult {
    bool ok = false;
    long windows_checked = 0;
    long window_length = 0;
    long tau0 = 1;
    std::optional<long> failing_window;  // k of the first failing window
};

RepeatedCheckResult is_repeatedly_jointly(const PopulationOracle* oracle, const GraphSequence& seq,
                                          long l, long tau0, long windows, JointProperty X);

// True when every nonempty proper subset is partially populated; then
// D-connectivity coincides with strong connectivity on graphs with self-arcs.
bool check_strong_equivalence(const PopulationOracle& oracle);

// Exhaustive search over m-vertex graphs with self-arcs for one matching the
// requested property pattern (unset = don't care). Smallest arc count wins,
// ties broken by arc-set order. m is capped at 5 (2^(m(m-1)) graphs).
struct GraphPropertyPattern {
    std::optional<bool> d_connected;
    std::optional<bool> strongly_connected;
    std::optional<bool> rooted;
};
std::optional<DiGraph> find_witness_graph(const PopulationOracle& oracle,
                                          const GraphPropertyPattern& want);

// Machine-readable connectivity summary for one graph against an oracle.
struct ConnectivityReport {
    int m = 0;
    int global_intersection_dim = 0;
    bool d_connected = false;
    struct VertexEntry {
        int vertex;
        std::vector<int> sunk_set;
        int intersection_dim;
        bool fully_populated;
    };
    std::vector<VertexEntry> per_vertex;
    // Present when m is within the enumeration cap.
    std::optional<std::vector<std::vector<int>>> failing_subsets;
};

ConnectivityReport connectivity_report(const PopulationOracle& oracle, const DiGraph& G);

}  // namespace projcon
