#include "projcon/connectivity.hpp"

#include <algorithm>
#include <bit>

namespace projcon {

PopulationOracle PopulationOracle::from_subspaces(std::vector<Subspace> subspaces) {
    if (subspaces.empty()) throw invalid_input("PopulationOracle: no subspaces");
    PopulationOracle o;
    o.m = static_cast<int>(subspaces.size());
    o.ambient = subspaces.front().ambient;
    for (const Subspace& s : subspaces)
        if (s.ambient != o.ambient)
            throw invalid_input("PopulationOracle: mismatched ambient dimensions");
    o.subspaces = std::move(subspaces);
    o.global_intersection = intersect(o.subspaces);
    return o;
}

Subspace PopulationOracle::intersection_of(const std::vector<int>& E) const {
    if (E.empty()) throw invalid_input("PopulationOracle: empty subset");
    std::vector<Subspace> members;
    members.reserve(E.size());
    for (int v : E) {
        if (v < 1 || v > m) throw invalid_input("PopulationOracle: label out of range");
        members.push_back(subspaces[static_cast<size_t>(v - 1)]);
    }
    return intersect(members);
}

int PopulationOracle::intersection_dim(const std::vector<int>& E) const {
    return intersection_of(E).dim();
}

SubsetClass classify_subset(const PopulationOracle& oracle, const std::vector<int>& E) {
    // The global intersection is contained in any subset intersection, so
    // equality of subspaces reduces to equality of dimensions.
    return oracle.intersection_dim(E) == oracle.global_dim() ? SubsetClass::FullyPopulated
                                                             : SubsetClass::PartiallyPopulated;
}

std::vector<int> mask_to_vertices(std::uint32_t mask) {
    std::vector<int> out;
    for (int v = 1; mask; ++v, mask >>= 1)
        if (mask & 1u) out.push_back(v);
    return out;
}

namespace {

void check_enumeration_cap(int m, const char* who) {
    if (m > kSubsetEnumerationCap)
        throw capacity_error(std::string(who) + ": m=" + std::to_string(m) + " exceeds cap " +
                             std::to_string(kSubsetEnumerationCap) +
                             "; use the sunk-set check instead");
}

std::vector<std::uint32_t> collect_partial(const PopulationOracle& oracle,
                                           const std::vector<char>& partial) {
    std::vector<std::uint32_t> out;
    const std::uint32_t full = (1u << oracle.m) - 1u;
    for (std::uint32_t mask = 1; mask <= full; ++mask)
        if (partial[mask]) out.push_back(mask);
    return out;
}

}  // namespace

std::vector<std::uint32_t> partially_populated_subsets_serial(const PopulationOracle& oracle) {
    check_enumeration_cap(oracle.m, "partially_populated_subsets");
    const std::uint32_t full = (1u << oracle.m) - 1u;
    std::vector<char> partial(static_cast<size_t>(full) + 1, 0);
    for (std::uint32_t mask = 1; mask <= full; ++mask)
        partial[mask] =
            oracle.intersection_dim(mask_to_vertices(mask)) != oracle.global_dim() ? 1 : 0;
    return collect_partial(oracle, partial);
}

std::vector<std::uint32_t> partially_populated_subsets(const PopulationOracle& oracle) {
    check_enumeration_cap(oracle.m, "partially_populated_subsets");
    const std::uint32_t full = (1u << oracle.m) - 1u;
    std::vector<char> partial(static_cast<size_t>(full) + 1, 0);
    const long count = static_cast<long>(full);
#pragma omp parallel for schedule(dynamic, 16)
    for (long idx = 1; idx <= count; ++idx) {
        auto mask = static_cast<std::uint32_t>(idx);
        partial[mask] =
            oracle.intersection_dim(mask_to_vertices(mask)) != oracle.global_dim() ? 1 : 0;
    }
    return collect_partial(oracle, partial);
}

bool is_d_connected_bruteforce(const PopulationOracle& oracle, const DiGraph& G) {
    if (G.vertex_count() != oracle.m)
        throw invalid_input("is_d_connected_bruteforce: graph size mismatch");
    check_enumeration_cap(oracle.m, "is_d_connected_bruteforce");
    const std::uint32_t full = (1u << oracle.m) - 1u;
    for (std::uint32_t mask : partially_populated_subsets(oracle)) {
        if (mask == full) continue;  // partially populated sets are proper, kept for safety
        std::vector<int> members = mask_to_vertices(mask);
        std::uint32_t nbrs = 0;
        for (int j : neighbor_set(G, members)) nbrs |= 1u << (j - 1);
        if ((nbrs & ~mask) == 0) return false;  // no neighbor outside the subset
    }
    return true;
}

bool is_d_connected(const PopulationOracle& oracle, const DiGraph& G) {
    if (G.vertex_count() != oracle.m) throw invalid_input("is_d_connected: graph size mismatch");
    for (int v = 1; v <= oracle.m; ++v)
        if (oracle.intersection_dim(sunk_vertex_set(G, v)) != oracle.global_dim()) return false;
    return true;
}

bool is_jointly(const PopulationOracle* oracle, const std::vector<DiGraph>& seq, JointProperty X) {
    DiGraph composed = compose_sequence(seq);
    switch (X) {
        case JointProperty::DConnected:
            if (!oracle) throw invalid_input("is_jointly: D-connectivity needs an oracle");
            return is_d_connected(*oracle, composed);
        case JointProperty::Rooted:
            return is_rooted(composed);
        case JointProperty::StronglyConnected:
            return is_strongly_connected(composed);
    }
    throw invalid_input("is_jointly: bad property");
}

bool is_jointly_d_connected(const PopulationOracle& oracle, const std::vector<DiGraph>& seq) {
    return is_jointly(&oracle, seq, JointProperty::DConnected);
}

bool is_jointly_rooted(const std::vector<DiGraph>& seq) {
    return is_jointly(nullptr, seq, JointProperty::Rooted);
}

bool is_jointly_strongly_connected(const std::vector<DiGraph>& seq) {
    return is_jointly(nullptr, seq, JointProperty::StronglyConnected);
}

RepeatedCheckResult is_repeatedly_jointly(const PopulationOracle* oracle, const GraphSequence& seq,
                                          long l, long tau0, long windows, JointProperty X) {
    if (l < 1) throw invalid_input("is_repeatedly_jointly: l must be >= 1");
    if (tau0 < 1) throw invalid_input("is_repeatedly_jointly: tau0 must be >= 1");
    if (windows < 1) throw invalid_input("is_repeatedly_jointly: need at least one window");
    if (seq.length() && tau0 + windows * l - 1 > *seq.length())
        throw invalid_input("is_repeatedly_jointly: horizon exceeds explicit sequence length");

    RepeatedCheckResult res;
    res.window_length = l;
    res.tau0 = tau0;
    res.ok = true;
    for (long k = 0; k < windows; ++k) {
        std::vector<DiGraph> window;
        window.reserve(static_cast<size_t>(l));
        for (long t = tau0 + k * l; t < tau0 + (k + 1) * l; ++t) window.push_back(seq.at(t));
        if (!is_jointly(oracle, window, X)) {
            res.ok = false;
            res.failing_window = k;
            break;
        }
        ++res.windows_checked;
    }
    if (res.ok) res.windows_checked = windows;
    return res;
}

bool check_strong_equivalence(const PopulationOracle& oracle) {
    check_enumeration_cap(oracle.m, "check_strong_equivalence");
    const std::uint32_t full = (1u << oracle.m) - 1u;
    std::vector<std::uint32_t> partial = partially_populated_subsets(oracle);
    // Every nonempty proper subset must appear.
    std::uint32_t expected = full - 1;  // count of nonempty proper subsets
    std::uint32_t found = 0;
    for (std::uint32_t mask : partial)
        if (mask != full) ++found;
    return found == expected;
}

std::optional<DiGraph> find_witness_graph(const PopulationOracle& oracle,
                                          const GraphPropertyPattern& want) {
    const int m = oracle.m;
    if (m > 5) throw capacity_error("find_witness_graph: m > 5 not supported");
    std::vector<std::pair<int, int>> off_diag;
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            if (i != j) off_diag.emplace_back(i, j);
    const std::vector<std::uint32_t> partial = partially_populated_subsets(oracle);

    std::optional<DiGraph> best;
    for (std::uint64_t bits = 0; bits < (1ULL << off_diag.size()); ++bits) {
        if (best && static_cast<int>(std::popcount(bits)) + m > best->arc_count()) continue;
        DiGraph g = DiGraph::self_arcs_only(m);
        for (size_t a = 0; a < off_diag.size(); ++a)
            if (bits & (1ULL << a)) g.add_arc(off_diag[a].first, off_diag[a].second);
        if (want.strongly_connected && is_strongly_connected(g) != *want.strongly_connected)
            continue;
        if (want.rooted && is_rooted(g) != *want.rooted) continue;
        if (want.d_connected) {
            // In-neighbor masks make the subset sweep a few bit operations.
            std::vector<std::uint32_t> in_mask(static_cast<size_t>(m) + 1, 0);
            for (auto [f, t] : g.arcs()) in_mask[t] |= 1u << (f - 1);
            bool d_conn = true;
            for (std::uint32_t mask : partial) {
                std::uint32_t nbrs = 0;
                for (int v = 1; v <= m; ++v)
                    if (mask & (1u << (v - 1))) nbrs |= in_mask[v];
                if ((nbrs & ~mask) == 0) {
                    d_conn = false;
                    break;
                }
            }
            if (d_conn != *want.d_connected) continue;
        }
        if (!best || g.arc_count() < best->arc_count() ||
            (g.arc_count() == best->arc_count() && g.arcs() < best->arcs()))
            best = g;
    }
    return best;
}

ConnectivityReport connectivity_report(const PopulationOracle& oracle, const DiGraph& G) {
    ConnectivityReport rep;
    rep.m = oracle.m;
    rep.global_intersection_dim = oracle.global_dim();
    rep.d_connected = is_d_connected(oracle, G);
    for (int v = 1; v <= oracle.m; ++v) {
        ConnectivityReport::VertexEntry e;
        e.vertex = v;
        e.sunk_set = sunk_vertex_set(G, v);
        e.intersection_dim = oracle.intersection_dim(e.sunk_set);
        e.fully_populated = e.intersection_dim == oracle.global_dim();
        rep.per_vertex.push_back(std::move(e));
    }
    if (oracle.m <= kSubsetEnumerationCap) {
        std::vector<std::vector<int>> failing;
        for (std::uint32_t mask : partially_populated_subsets(oracle)) {
            std::vector<int> members = mask_to_vertices(mask);
            std::uint32_t nbrs = 0;
            for (int j : neighbor_set(G, members)) nbrs |= 1u << (j - 1);
            if ((nbrs & ~mask) == 0) failing.push_back(members);
        }
        rep.failing_subsets = std::move(failing);
    }
    return rep;
}

}  // namespace projcon
