#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "projcon/linalg.hpp"

namespace projcon {

// Directed graph on vertices labeled 1..m.
//
// Arc (from, to) carries information from `from` to `to`; j is a neighbor of
// i exactly when (j, i) is an arc. The adjacency matrix has A[i][j] = 1 iff
// (i, j) is an arc, so the flocking matrix is D^{-1} A' with D the diagonal
// of in-degrees. One convention, fixed here, used everywhere.
class DiGraph {
public:
    DiGraph() = default;
    explicit DiGraph(int m);
    DiGraph(int m, const std::vector<std::pair<int, int>>& arcs);

    static DiGraph self_arcs_only(int m);
    static DiGraph complete(int m);

    int vertex_count() const { return m_; }
    int arc_count() const { return static_cast<int>(arcs_.size()); }
    const std::vector<std::pair<int, int>>& arcs() const { return arcs_; }

    void add_arc(int from, int to);
    void add_self_arcs();
    bool has_arc(int from, int to) const;
    bool has_all_self_arcs() const;

    // Labels j with (j, v) an arc, ascending. Sources of information for v.
    std::vector<int> in_neighbors(int v) const;
    std::vector<int> out_neighbors(int v) const;
    int in_degree(int v) const { return static_cast<int>(in_neighbors(v).size()); }

    Matrix adjacency_matrix() const;

    bool operator==(const DiGraph& other) const = default;

    // "1->2 2->3" form; self-arcs included.
    std::string to_text() const;
    // Parses the text form. Missing self-arcs are added; *added_self_arcs is
    // set when that happened.
    static DiGraph from_text(int m, const std::string& text, bool* added_self_arcs = nullptr);

private:
    void check_vertex(int v, const char* who) const;
    int m_ = 0;
    std::vector<std::pair<int, int>> arcs_;  // sorted, unique
};

// Graph of a nonnegative matrix: (i, j) is an arc iff M[j][i] > 0.
DiGraph graph_of_matrix(const Matrix& M);

// F = D^{-1} A'. Requires all self-arcs (every in-degree >= 1).
Matrix flocking_matrix(const DiGraph& G);

// Composition Gq∘Gp: (i, j) is an arc iff some k has (i, k) in Gp and (k, j)
// in Gq. Matches graph_of_matrix(Mq * Mp) for positive matrices.
DiGraph compose(const DiGraph& Gq, const DiGraph& Gp);

// Right-to-left fold: seq.back() ∘ ... ∘ seq.front().
DiGraph compose_sequence(const std::vector<DiGraph>& seq);

// beta(G, S) = { j : (j, i) is an arc for some i in S }.
std::vector<int> neighbor_set(const DiGraph& G, const std::vector<int>& S);

// {v} ∪ beta(v) ∪ ... ∪ beta^{m-1}(v): the vertices from which v is reachable.
std::vector<int> sunk_vertex_set(const DiGraph& G, int v);

bool is_strongly_connected(const DiGraph& G);

// Contains a directed spanning tree (some root reaches every vertex).
bool is_rooted(const DiGraph& G);

// Every other vertex has an arc directly to v.
bool is_strongly_sunk_at(const DiGraph& G, int v);

struct SccComponent {
    std::vector<int> vertices;      // ascending
    bool has_external_in_arc = false;
};

// Components ordered by smallest contained vertex.
std::vector<SccComponent> scc_decomposition(const DiGraph& G);

// Vertex sequence i_0..i_q with i_0 = from, i_q = to and (i_{k-1}, i_k) an
// arc of seq[k-1]. Exists iff (from, to) is an arc of the composed sequence.
std::optional<std::vector<int>> find_route(const std::vector<DiGraph>& seq, int from, int to);

// Deterministic counter-based generator state for random sequences.
std::uint64_t splitmix64(std::uint64_t x);

// Source of the neighbor graphs N(1), N(2), ... All produced graphs have m
// vertices and self-arcs at every vertex.
class GraphSequence {
public:
    enum class Kind { Explicit, Periodic, Random };

    static GraphSequence explicit_list(std::vector<DiGraph> graphs);
    static GraphSequence periodic(std::vector<DiGraph> period);
    static GraphSequence random(int m, double arc_prob, std::uint64_t seed);

    Kind kind() const { return kind_; }
    int vertex_count() const { return m_; }
    // Finite for explicit lists, unset otherwise.
    std::optional<long> length() const { return length_; }
    const std::vector<DiGraph>& graphs() const { return graphs_; }
    double arc_prob() const { return arc_prob_; }
    std::uint64_t seed() const { return seed_; }

    // Graph at time t >= 1. Deterministic per (seed, t) for random sequences;
    // throws invalid_input past the end of an explicit list.
    DiGraph at(long t) const;

private:
    Kind kind_ = Kind::Explicit;
    int m_ = 0;
    std::vector<DiGraph> graphs_;
    double arc_prob_ = 0.0;
    std::uint64_t seed_ = 0;
    std::optional<long> length_;
};

}  // namespace projcon
