#include "projcon/digraph.hpp"

#include <algorithm>
#include <sstream>

namespace projcon {

DiGraph::DiGraph(int m) : m_(m) {
    if (m < 0) throw invalid_input("DiGraph: negative vertex count");
}

DiGraph::DiGraph(int m, const std::vector<std::pair<int, int>>& arcs) : DiGraph(m) {
    for (auto [f, t] : arcs) add_arc(f, t);
}

DiGraph DiGraph::self_arcs_only(int m) {
    DiGraph g(m);
    g.add_self_arcs();
    return g;
}

DiGraph DiGraph::complete(int m) {
    DiGraph g(m);
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) g.add_arc(i, j);
    return g;
}

void DiGraph::check_vertex(int v, const char* who) const {
    if (v < 1 || v > m_)
        throw invalid_input(std::string(who) + ": vertex " + std::to_string(v) +
                            " out of range 1.." + std::to_string(m_));
}

void DiGraph::add_arc(int from, int to) {
    check_vertex(from, "add_arc");
    check_vertex(to, "add_arc");
    auto arc = std::make_pair(from, to);
    auto it = std::lower_bound(arcs_.begin(), arcs_.end(), arc);
    if (it == arcs_.end() || *it != arc) arcs_.insert(it, arc);
}

void DiGraph::add_self_arcs() {
    for (int v = 1; v <= m_; ++v) add_arc(v, v);
}

bool DiGraph::has_arc(int from, int to) const {
    return std::binary_search(arcs_.begin(), arcs_.end(), std::make_pair(from, to));
}

bool DiGraph::has_all_self_arcs() const {
    for (int v = 1; v <= m_; ++v)
        if (!has_arc(v, v)) return false;
    return true;
}

std::vector<int> DiGraph::in_neighbors(int v) const {
    check_vertex(v, "in_neighbors");
    std::vector<int> out;
    for (auto [f, t] : arcs_)
        if (t == v) out.push_back(f);
    return out;
}

std::vector<int> DiGraph::out_neighbors(int v) const {
    check_vertex(v, "out_neighbors");
    std::vector<int> out;
    auto lo = std::lower_bound(arcs_.begin(), arcs_.end(), std::make_pair(v, 1));
    for (auto it = lo; it != arcs_.end() && it->first == v; ++it) out.push_back(it->second);
    return out;
}

Matrix DiGraph::adjacency_matrix() const {
    Matrix A = Matrix::Zero(m_, m_);
    for (auto [f, t] : arcs_) A(f - 1, t - 1) = 1.0;
    return A;
}

std::string DiGraph::to_text() const {
    std::ostringstream os;
    bool first = true;
    for (auto [f, t] : arcs_) {
        if (!first) os << ' ';
        os << f << "->" << t;
        first = false;
    }
    return os.str();
}

DiGraph DiGraph::from_text(int m, const std::string& text, bool* added_self_arcs) {
    DiGraph g(m);
    std::istringstream is(text);
    std::string token;
    while (is >> token) {
        auto pos = token.find("->");
        if (pos == std::string::npos)
            throw invalid_input("DiGraph::from_text: expected from->to, got '" + token + "'");
        int from = 0, to = 0;
        try {
            from = std::stoi(token.substr(0, pos));
            to = std::stoi(token.substr(pos + 2));
        } catch (const std::exception&) {
            throw invalid_input("DiGraph::from_text: bad arc token '" + token + "'");
        }
        g.add_arc(from, to);
    }
    bool added = !g.has_all_self_arcs();
    g.add_self_arcs();
    if (added_self_arcs) *added_self_arcs = added;
    return g;
}

DiGraph graph_of_matrix(const Matrix& M) {
    if (M.rows() != M.cols()) throw invalid_input("graph_of_matrix: matrix must be square");
    if ((M.array() < 0.0).any()) throw invalid_input("graph_of_matrix: negative entries");
    const int m = static_cast<int>(M.rows());
    DiGraph g(m);
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            if (M(j - 1, i - 1) > 0.0) g.add_arc(i, j);
    return g;
}

Matrix flocking_matrix(const DiGraph& G) {
    if (!G.has_all_self_arcs())
        throw invalid_input("flocking_matrix: graph must have self-arcs at all vertices");
    const int m = G.vertex_count();
    Matrix F = Matrix::Zero(m, m);
    for (int i = 1; i <= m; ++i) {
        auto nbrs = G.in_neighbors(i);
        for (int j : nbrs) F(i - 1, j - 1) = 1.0 / static_cast<double>(nbrs.size());
    }
    return F;
}

DiGraph compose(const DiGraph& Gq, const DiGraph& Gp) {
    if (Gq.vertex_count() != Gp.vertex_count())
        throw invalid_input("compose: vertex count mismatch");
    const int m = Gp.vertex_count();
    DiGraph out(m);
    for (int i = 1; i <= m; ++i)
        for (int k : Gp.out_neighbors(i))
            for (int j : Gq.out_neighbors(k)) out.add_arc(i, j);
    return out;
}

DiGraph compose_sequence(const std::vector<DiGraph>& seq) {
    if (seq.empty()) throw invalid_input("compose_sequence: empty sequence");
    DiGraph acc = seq.front();
    for (size_t k = 1; k < seq.size(); ++k) acc = compose(seq[k], acc);
    return acc;
}

std::vector<int> neighbor_set(const DiGraph& G, const std::vector<int>& S) {
    std::vector<bool> hit(static_cast<size_t>(G.vertex_count()) + 1, false);
    for (int v : S) {
        for (int j : G.in_neighbors(v)) hit[j] = true;
    }
    std::vector<int> out;
    for (int v = 1; v <= G.vertex_count(); ++v)
        if (hit[v]) out.push_back(v);
    return out;
}

std::vector<int> sunk_vertex_set(const DiGraph& G, int v) {
    const int m = G.vertex_count();
    std::vector<bool> seen(static_cast<size_t>(m) + 1, false);
    std::vector<int> stack{v};
    seen[v] = true;
    while (!stack.empty()) {
        int cur = stack.back();
        stack.pop_back();
        for (int j : G.in_neighbors(cur))
            if (!seen[j]) {
                seen[j] = true;
                stack.push_back(j);
            }
    }
    std::vector<int> out;
    for (int u = 1; u <= m; ++u)
        if (seen[u]) out.push_back(u);
    return out;
}

namespace {

// Iterative Tarjan; component ids in reverse topological order of discovery.
std::vector<int> tarjan_component_ids(const DiGraph& G, int& component_count) {
    const int m = G.vertex_count();
    std::vector<std::vector<int>> succ(static_cast<size_t>(m) + 1);
    for (auto [f, t] : G.arcs()) succ[f].push_back(t);

    std::vector<int> index(static_cast<size_t>(m) + 1, -1);
    std::vector<int> low(static_cast<size_t>(m) + 1, 0);
    std::vector<bool> on_stack(static_cast<size_t>(m) + 1, false);
    std::vector<int> comp(static_cast<size_t>(m) + 1, -1);
    std::vector<int> stack;
    int next_index = 0;
    component_count = 0;

    struct Frame {
        int v;
        size_t child;
    };
    for (int root = 1; root <= m; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.child < succ[f.v].size()) {
                int w = succ[f.v][f.child++];
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp[w] = component_count;
                        if (w == f.v) break;
                    }
                    ++component_count;
                }
                int v = f.v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }
    return comp;
}

}  // namespace

std::vector<SccComponent> scc_decomposition(const DiGraph& G) {
    int count = 0;
    std::vector<int> comp = tarjan_component_ids(G, count);
    std::vector<SccComponent> parts(static_cast<size_t>(count));
    for (int v = 1; v <= G.vertex_count(); ++v) parts[comp[v]].vertices.push_back(v);
    for (auto [f, t] : G.arcs())
        if (comp[f] != comp[t]) parts[comp[t]].has_external_in_arc = true;
    std::sort(parts.begin(), parts.end(), [](const SccComponent& a, const SccComponent& b) {
        return a.vertices.front() < b.vertices.front();
    });
    return parts;
}

bool is_strongly_connected(const DiGraph& G) {
    if (G.vertex_count() == 0) return true;
    return scc_decomposition(G).size() == 1;
}

bool is_rooted(const DiGraph& G) {
    if (G.vertex_count() == 0) return true;
    // Exactly one component of the condensation may lack external in-arcs;
    // that component holds the roots.
    int sources = 0;
    for (const SccComponent& c : scc_decomposition(G))
        if (!c.has_external_in_arc) ++sources;
    return sources == 1;
}

bool is_strongly_sunk_at(const DiGraph& G, int v) {
    for (int u = 1; u <= G.vertex_count(); ++u)
        if (u != v && !G.has_arc(u, v)) return false;
    return true;
}

std::optional<std::vector<int>> find_route(const std::vector<DiGraph>& seq, int from, int to) {
    if (seq.empty()) throw invalid_input("find_route: empty sequence");
    const int m = seq.front().vertex_count();
    for (const DiGraph& g : seq)
        if (g.vertex_count() != m) throw invalid_input("find_route: vertex count mismatch");
    const size_t q = seq.size();

    // pred[k][v]: smallest predecessor of v at position k, 0 if unreached.
    std::vector<std::vector<int>> pred(q + 1, std::vector<int>(static_cast<size_t>(m) + 1, 0));
    pred[0][from] = from;
    for (size_t k = 1; k <= q; ++k) {
        for (int a = 1; a <= m; ++a) {
            if (pred[k - 1][a] == 0) continue;
            for (int b : seq[k - 1].out_neighbors(a))
                if (pred[k][b] == 0 || a < pred[k][b]) pred[k][b] = a;
        }
    }
    if (pred[q][to] == 0) return std::nullopt;
    std::vector<int> route(q + 1);
    route[q] = to;
    for (size_t k = q; k > 0; --k) route[k - 1] = pred[k][route[k]];
    return route;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

GraphSequence GraphSequence::explicit_list(std::vector<DiGraph> graphs) {
    if (graphs.empty()) throw invalid_input("GraphSequence: empty explicit list");
    GraphSequence s;
    s.kind_ = Kind::Explicit;
    s.m_ = graphs.front().vertex_count();
    s.length_ = static_cast<long>(graphs.size());
    for (const DiGraph& g : graphs) {
        if (g.vertex_count() != s.m_) throw invalid_input("GraphSequence: vertex count mismatch");
        if (!g.has_all_self_arcs()) throw invalid_input("GraphSequence: graph missing self-arcs");
    }
    s.graphs_ = std::move(graphs);
    return s;
}

GraphSequence GraphSequence::periodic(std::vector<DiGraph> period) {
    GraphSequence s = explicit_list(std::move(period));
    s.kind_ = Kind::Periodic;
    s.length_.reset();
    return s;
}

GraphSequence GraphSequence::random(int m, double arc_prob, std::uint64_t seed) {
    if (m < 1) throw invalid_input("GraphSequence: need at least one vertex");
    if (arc_prob < 0.0 || arc_prob > 1.0) throw invalid_input("GraphSequence: arc_prob outside [0,1]");
    GraphSequence s;
    s.kind_ = Kind::Random;
    s.m_ = m;
    s.arc_prob_ = arc_prob;
    s.seed_ = seed;
    return s;
}

DiGraph GraphSequence::at(long t) const {
    if (t < 1) throw invalid_input("GraphSequence::at: t must be >= 1");
    switch (kind_) {
        case Kind::Explicit:
            if (t > static_cast<long>(graphs_.size()))
                throw invalid_input("GraphSequence::at: explicit list exhausted at t=" +
                                    std::to_string(t));
            return graphs_[static_cast<size_t>(t - 1)];
        case Kind::Periodic:
            return graphs_[static_cast<size_t>((t - 1) % static_cast<long>(graphs_.size()))];
        case Kind::Random: {
            DiGraph g = DiGraph::self_arcs_only(m_);
            // One counter-based draw per ordered pair; random-order safe.
            for (int i = 1; i <= m_; ++i)
                for (int j = 1; j <= m_; ++j) {
                    if (i == j) continue;
                    std::uint64_t word = splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(t) * 1000003ULL +
                                                                       static_cast<std::uint64_t>(i) * 1009ULL +
                                                                       static_cast<std::uint64_t>(j)));
                    double u = static_cast<double>(word >> 11) * 0x1.0p-53;
                    if (u < arc_prob_) g.add_arc(i, j);
                }
            return g;
        }
    }
    throw invalid_input("GraphSequence::at: bad kind");
}

}  // namespace projcon
