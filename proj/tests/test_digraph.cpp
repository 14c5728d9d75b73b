#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "projcon/digraph.hpp"
#include "test_util.hpp"

using namespace projcon;
using testutil::random_graph;
using testutil::random_nonnegative;

TEST_CASE("graph_of_matrix") {
    CHECK(graph_of_matrix(Matrix::Identity(3, 3)) == DiGraph::self_arcs_only(3));
    CHECK(graph_of_matrix(Matrix::Ones(2, 2)) == DiGraph::complete(2));
    Matrix neg = Matrix::Identity(2, 2);
    neg(0, 1) = -1.0;
    CHECK_THROWS_AS(graph_of_matrix(neg), invalid_input);
    CHECK_THROWS_AS(graph_of_matrix(Matrix::Zero(2, 3)), invalid_input);
}

TEST_CASE("flocking matrix hand values") {
    CHECK(flocking_matrix(DiGraph::self_arcs_only(3)).isApprox(Matrix::Identity(3, 3)));
    CHECK(flocking_matrix(DiGraph::complete(2)).isApprox(Matrix::Constant(2, 2, 0.5)));

    DiGraph g(2, {{1, 1}, {2, 2}, {1, 2}});
    Matrix F = flocking_matrix(g);
    Matrix expect(2, 2);
    expect << 1.0, 0.0, 0.5, 0.5;
    CHECK(F.isApprox(expect));

    DiGraph no_self(2, {{1, 2}, {2, 1}});
    CHECK_THROWS_AS(flocking_matrix(no_self), invalid_input);
}

TEST_CASE("flocking matrix round trip and stochasticity") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        DiGraph g = random_graph(rng, 2 + trial % 5, 0.4);
        Matrix F = flocking_matrix(g);
        CHECK((F.rowwise().sum() - Vector::Ones(F.rows())).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(F.diagonal().minCoeff() > 0.0);
        CHECK(graph_of_matrix(F) == g);
    }
}

TEST_CASE("composition definition and properties") {
    DiGraph sa = DiGraph::self_arcs_only(3);
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        DiGraph g = random_graph(rng, 3, 0.4);
        CHECK(compose(g, sa) == g);  // identity on the right
        CHECK(compose(sa, g) == g);
    }

    // Graph of a product matches composition of graphs.
    for (int trial = 0; trial < 100; ++trial) {
        int m = 2 + trial % 4;
        Matrix M1 = random_nonnegative(rng, m, m), M2 = random_nonnegative(rng, m, m);
        CHECK(graph_of_matrix(M2 * M1) == compose(graph_of_matrix(M2), graph_of_matrix(M1)));
    }

    // With self-arcs, both arc sets survive into the composition.
    for (int trial = 0; trial < 50; ++trial) {
        int m = 2 + trial % 4;
        DiGraph gp = random_graph(rng, m, 0.3), gq = random_graph(rng, m, 0.3);
        DiGraph comp = compose(gq, gp);
        for (auto [f, t] : gp.arcs()) CHECK(comp.has_arc(f, t));
        for (auto [f, t] : gq.arcs()) CHECK(comp.has_arc(f, t));
    }

    // Associativity.
    for (int trial = 0; trial < 50; ++trial) {
        int m = 2 + trial % 4;
        DiGraph a = random_graph(rng, m, 0.3, false), b = random_graph(rng, m, 0.3, false),
                c = random_graph(rng, m, 0.3, false);
        CHECK(compose(compose(c, b), a) == compose(c, compose(b, a)));
    }

    CHECK_THROWS_AS(compose(DiGraph(2), DiGraph(3)), invalid_input);
}

TEST_CASE("neighbor_set") {
    DiGraph g(3, {{1, 1}, {2, 2}, {3, 3}, {1, 2}});
    CHECK(neighbor_set(g, {}) == std::vector<int>{});
    CHECK(neighbor_set(g, {2}) == std::vector<int>{1, 2});
    CHECK(neighbor_set(DiGraph::self_arcs_only(4), {2, 3}) == std::vector<int>{2, 3});
    CHECK_THROWS_AS(neighbor_set(g, {5}), invalid_input);

    // Neighbor functions compose through graph composition.
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        int m = 2 + trial % 4;
        DiGraph gp = random_graph(rng, m, 0.4, false), gq = random_graph(rng, m, 0.4, false);
        std::vector<int> S;
        for (int v = 1; v <= m; ++v)
            if (rng() % 2) S.push_back(v);
        CHECK(neighbor_set(gp, neighbor_set(gq, S)) == neighbor_set(compose(gq, gp), S));
    }
}

TEST_CASE("sunk vertex sets") {
    CHECK(sunk_vertex_set(DiGraph::self_arcs_only(3), 2) == std::vector<int>{2});
    DiGraph chain(3, {{1, 1}, {2, 2}, {3, 3}, {1, 2}, {2, 3}});
    CHECK(sunk_vertex_set(chain, 3) == std::vector<int>{1, 2, 3});
    CHECK(sunk_vertex_set(chain, 1) == std::vector<int>{1});

    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 30; ++trial) {
        DiGraph g = testutil::random_strongly_connected(rng, 2 + trial % 4);
        std::vector<int> all(g.vertex_count());
        for (int v = 1; v <= g.vertex_count(); ++v) all[v - 1] = v;
        for (int v = 1; v <= g.vertex_count(); ++v) CHECK(sunk_vertex_set(g, v) == all);
    }
}

TEST_CASE("sunk vertex set is the smallest invariant superset") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        int m = 2 + trial % 4;  // m <= 5
        DiGraph g = random_graph(rng, m, 0.35);
        for (int v = 1; v <= m; ++v) {
            std::vector<int> sunk = sunk_vertex_set(g, v);
            std::uint32_t sunk_mask = 0;
            for (int u : sunk) sunk_mask |= 1u << (u - 1);
            // Invariance under the neighbor function.
            std::uint32_t nbrs = 0;
            for (int u : neighbor_set(g, sunk)) nbrs |= 1u << (u - 1);
            CHECK((nbrs & ~sunk_mask) == 0);
            // Minimality over all invariant subsets containing v.
            for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
                if (!(mask & (1u << (v - 1)))) continue;
                std::vector<int> members;
                for (int u = 1; u <= m; ++u)
                    if (mask & (1u << (u - 1))) members.push_back(u);
                std::uint32_t mn = 0;
                for (int u : neighbor_set(g, members)) mn |= 1u << (u - 1);
                bool invariant = (mn & ~mask) == 0;
                if (invariant) CHECK((sunk_mask & ~mask) == 0);
            }
        }
    }
}

TEST_CASE("strong connectivity, rootedness, strong sinks, sccs") {
    DiGraph complete = DiGraph::complete(4);
    CHECK(is_strongly_connected(complete));
    CHECK(is_rooted(complete));
    for (int v = 1; v <= 4; ++v) CHECK(is_strongly_sunk_at(complete, v));

    DiGraph chain(3, {{1, 1}, {2, 2}, {3, 3}, {1, 2}, {2, 3}});
    CHECK(is_rooted(chain));
    CHECK_FALSE(is_strongly_connected(chain));
    auto sccs = scc_decomposition(chain);
    REQUIRE(sccs.size() == 3);
    CHECK(sccs[0].vertices == std::vector<int>{1});
    CHECK_FALSE(sccs[0].has_external_in_arc);
    CHECK(sccs[1].has_external_in_arc);
    CHECK(sccs[2].has_external_in_arc);

    DiGraph isolated = DiGraph::self_arcs_only(4);
    auto parts = scc_decomposition(isolated);
    CHECK(parts.size() == 4);
    for (const auto& p : parts) CHECK_FALSE(p.has_external_in_arc);
    CHECK_FALSE(is_rooted(isolated));
}

TEST_CASE("growth of neighbor sets over sunk graph sequences") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 30; ++trial) {
        int m = 3 + trial % 3;
        int v = 1 + static_cast<int>(rng() % m);
        // Graphs sunk at v: random plus a directed path hitting v from everyone.
        auto sunk_graph = [&] {
            for (;;) {
                DiGraph g = random_graph(rng, m, 0.25);
                std::vector<int> order;
                for (int u = 1; u <= m; ++u)
                    if (u != v) order.push_back(u);
                std::shuffle(order.begin(), order.end(), rng);
                int prev = v;
                for (int u : order) {
                    g.add_arc(u, prev);
                    prev = u;
                }
                std::vector<int> sunk = sunk_vertex_set(g, v);
                if (static_cast<int>(sunk.size()) == m) return g;
            }
        };
        std::vector<DiGraph> seq;
        for (int k = 0; k < m; ++k) seq.push_back(sunk_graph());

        DiGraph acc = seq[0];
        for (int k = 1; k <= m; ++k) {
            if (k >= 2) acc = compose(seq[static_cast<size_t>(k - 1)], acc);
            int nbr_count = static_cast<int>(neighbor_set(acc, {v}).size());
            if (k <= m - 1) CHECK(nbr_count >= k + 1);
            if (k >= m - 1) CHECK(is_strongly_sunk_at(acc, v));
        }
    }
}

TEST_CASE("routes") {
    DiGraph g1(3, {{1, 1}, {2, 2}, {3, 3}, {1, 2}});
    DiGraph g2(3, {{1, 1}, {2, 2}, {3, 3}, {2, 3}});
    auto route = find_route({g1, g2}, 1, 3);
    REQUIRE(route.has_value());
    CHECK(*route == std::vector<int>{1, 2, 3});

    auto self_route = find_route({DiGraph::self_arcs_only(3), DiGraph::self_arcs_only(3)}, 2, 2);
    REQUIRE(self_route.has_value());
    CHECK(*self_route == std::vector<int>{2, 2, 2});

    // A route exists exactly when the composed graph has the arc.
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 60; ++trial) {
        int m = 2 + trial % 4, q = 1 + trial % 4;
        std::vector<DiGraph> seq;
        for (int k = 0; k < q; ++k) seq.push_back(random_graph(rng, m, 0.3));
        DiGraph composed = compose_sequence(seq);
        for (int from = 1; from <= m; ++from)
            for (int to = 1; to <= m; ++to) {
                auto r = find_route(seq, from, to);
                CHECK(r.has_value() == composed.has_arc(from, to));
                if (r) {
                    CHECK(r->front() == from);
                    CHECK(r->back() == to);
                    for (int k = 1; k <= q; ++k)
                        CHECK(seq[static_cast<size_t>(k - 1)].has_arc((*r)[static_cast<size_t>(k - 1)],
                                                                      (*r)[static_cast<size_t>(k)]));
                }
            }
    }
}

TEST_CASE("graph text form") {
    bool added = false;
    DiGraph g = DiGraph::from_text(3, "1->2 2->3", &added);
    CHECK(added);
    CHECK(g.has_all_self_arcs());
    CHECK(g.has_arc(1, 2));
    CHECK(g.has_arc(2, 3));
    CHECK(DiGraph::from_text(3, g.to_text(), &added) == g);
    CHECK_FALSE(added);
    CHECK_THROWS_AS(DiGraph::from_text(3, "1-2"), invalid_input);
    CHECK_THROWS_AS(DiGraph::from_text(3, "1->9"), invalid_input);
}

TEST_CASE("graph sequences") {
    DiGraph a = DiGraph::self_arcs_only(2);
    DiGraph b = DiGraph::complete(2);
    GraphSequence per = GraphSequence::periodic({a, b});
    CHECK(per.at(1) == a);
    CHECK(per.at(2) == b);
    CHECK(per.at(3) == a);

    GraphSequence ex = GraphSequence::explicit_list({a, b});
    CHECK_THROWS_AS(ex.at(3), invalid_input);

    GraphSequence rnd = GraphSequence::random(4, 0.5, 99);
    CHECK(rnd.at(7) == rnd.at(7));
    CHECK(rnd.at(7).has_all_self_arcs());
    GraphSequence all = GraphSequence::random(4, 1.0, 99);
    CHECK(all.at(3) == DiGraph::complete(4));

    DiGraph no_self(2, {{1, 2}});
    CHECK_THROWS_AS(GraphSequence::explicit_list({no_self}), invalid_input);
}
