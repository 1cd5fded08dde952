#include <doctest.h>

#include "burgers_net/error.hpp"
#include "burgers_net/graph.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace bnet;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::InvalidArgument;
}

void check_degree_sums(const DirectedMetricTree& t) {
    int total = 0;
    for (int v = 0; v < t.vertex_count(); ++v) {
        auto c = t.classify(v);
        CHECK(c.deg_in == static_cast<int>(t.direction(v).in_edges.size()));
        CHECK(c.deg_out == static_cast<int>(t.direction(v).out_edges.size()));
        CHECK(c.deg_in == t.phi_plus().row(v).sum());
        CHECK(c.deg_out == t.phi_minus().row(v).sum());
        total += c.deg_in + c.deg_out;
    }
    CHECK(total == 2 * t.edge_count());
}

}  // namespace

TEST_CASE("build_tree accepts the two-edge path") {
    auto t = build_tree(3, {{0, 1, 1.0}, {1, 2, 1.0}});
    CHECK(t.vertex_count() == 3);
    CHECK(t.edge_count() == 2);
    CHECK(t.is_tree());
    CHECK(t.increasing_order());
    CHECK(t.classify(0).kind == VertexKind::Source);
    CHECK(t.classify(1).kind == VertexKind::PathVertex);
    CHECK(t.classify(2).kind == VertexKind::Sink);
    Eigen::MatrixXi phi(3, 2);
    phi << -1, 0, 1, -1, 0, 1;
    CHECK(t.incidence() == phi);
    check_degree_sums(t);
}

TEST_CASE("build_tree rejects the circle") {
    CHECK(code_of([] { build_tree(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}); }) == Errc::NotATree);
}

TEST_CASE("single edge tree") {
    auto t = build_tree(2, {{0, 1, 5.0}});
    CHECK(t.classify(0).kind == VertexKind::Source);
    CHECK(t.classify(1).kind == VertexKind::Sink);
    CHECK(t.length(0) == 5.0);
}

TEST_CASE("build_tree error paths") {
    CHECK(code_of([] { build_tree(3, {{0, 1, 1.0}, {0, 1, 1.0}}); }) == Errc::MultipleEdge);
    CHECK(code_of([] { build_tree(2, {{0, 1, 0.0}}); }) == Errc::NonPositiveLength);
    CHECK(code_of([] { build_tree(2, {{0, 1, -1.0}}); }) == Errc::NonPositiveLength);
    CHECK(code_of([] { build_tree(4, {{0, 1, 1.0}, {2, 3, 1.0}}); }) == Errc::NotATree);
    CHECK(code_of([] { build_tree(2, {{0, 1, 1.0}, {1, 0, 1.0}}); }) == Errc::NotATree);
    CHECK(code_of([] { build_tree(2, {{0, 2, 1.0}}); }) == Errc::InvalidIndex);
    CHECK(code_of([] { build_tree(1, {{0, 0, 1.0}}); }) == Errc::InvalidArgument);
    CHECK(code_of([] { build_tree(2, {}); }) == Errc::InvalidArgument);
}

TEST_CASE("increasing order is a warning unless strict") {
    std::vector<EdgeSpec> swapped{{1, 2, 1.0}, {0, 1, 1.0}};
    auto t = build_tree(3, swapped);
    CHECK_FALSE(t.increasing_order());
    BuildOptions strict;
    strict.strict_order = true;
    CHECK(code_of([&] { build_tree(3, swapped, strict); }) == Errc::NotIncreasingOrder);
}

TEST_CASE("classify honeycomb vertices") {
    auto h3 = build_tree(4, {{0, 1, 1.0}, {1, 2, 1.0}, {1, 3, 1.0}});
    CHECK(classify_vertex(h3, 1).kind == VertexKind::FirstKind);
    auto mirrored = build_tree(4, {{0, 2, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
    CHECK(classify_vertex(mirrored, 2).kind == VertexKind::SecondKind);
    auto star = build_tree(5, {{0, 2, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {2, 4, 1.0}});
    CHECK(classify_vertex(star, 2).kind == VertexKind::General);
    CHECK(code_of([&] { classify_vertex(star, 7); }) == Errc::InvalidIndex);
}

TEST_CASE("reindex_increasing") {
    SUBCASE("swapped path is restored") {
        auto t = build_tree(3, {{1, 2, 2.0}, {0, 1, 1.0}});
        auto r = reindex_increasing(t);
        CHECK(r.tree.increasing_order());
        CHECK(r.tree.edge(0) == EdgeSpec{0, 1, 1.0});
        CHECK(r.tree.edge(1) == EdgeSpec{1, 2, 2.0});
        CHECK(r.new_of_old == std::vector<int>{1, 0});
    }
    SUBCASE("already increasing gives the identity") {
        auto t = build_tree(4, {{0, 1, 1.0}, {1, 2, 1.0}, {1, 3, 1.0}});
        auto r = reindex_increasing(t);
        CHECK(r.new_of_old == std::vector<int>{0, 1, 2});
        CHECK(r.tree == t);
    }
    SUBCASE("H3 with shuffled labels puts the source edge first and is idempotent") {
        auto t = build_tree(4, {{1, 3, 1.0}, {1, 2, 1.0}, {0, 1, 1.0}});
        auto r = reindex_increasing(t);
        CHECK(r.tree.edge(0).tail == 0);
        CHECK(r.tree.increasing_order());
        auto again = reindex_increasing(r.tree);
        CHECK(again.tree == r.tree);
        for (int k = 0; k < 3; ++k) CHECK(again.new_of_old[k] == k);
    }
    SUBCASE("random trees") {
        std::mt19937 rng(7);
        for (int trial = 0; trial < 50; ++trial) {
            int n = 2 + static_cast<int>(rng() % 12);
            std::vector<EdgeSpec> edges;
            for (int v = 1; v < n; ++v) {
                int u = static_cast<int>(rng() % v);
                edges.push_back(rng() % 2 ? EdgeSpec{u, v, 1.0} : EdgeSpec{v, u, 1.0});
            }
            std::shuffle(edges.begin(), edges.end(), rng);
            auto t = build_tree(n, edges);
            check_degree_sums(t);
            auto r = reindex_increasing(t);
            CHECK(r.tree.increasing_order());
            for (int j = 0; j < t.edge_count(); ++j) CHECK(r.tree.edge(r.new_of_old[j]) == t.edge(j));
            CHECK(reindex_increasing(r.tree).tree == r.tree);
        }
    }
}

TEST_CASE("path_graph") {
    auto p2 = path_graph(2);
    CHECK(p2 == build_tree(3, {{0, 1, 1.0}, {1, 2, 1.0}}));
    auto p1 = path_graph(1);
    CHECK(p1.edge_count() == 1);
    auto p4 = path_graph(4, {9, 2, 2, 9});
    for (int v = 0; v < p4.vertex_count(); ++v) CHECK(p4.classify(v).kind != VertexKind::FirstKind);
    CHECK(code_of([] { path_graph(0); }) == Errc::InvalidArgument);
    CHECK(code_of([] { path_graph(2, {1.0}); }) == Errc::InvalidArgument);
}

TEST_CASE("honeycomb lattice structure") {
    LatticeVertex a{LatticeKind::A, 2, -1};
    CHECK(a.triple() == std::array<int, 3>{1, 1, 2});
    LatticeVertex b{LatticeKind::B, 2, -1};
    CHECK(b.triple() == std::array<int, 3>{2, 1, 2});
    // Edge endpoints differ in exactly one triple coordinate by +1.
    for (const auto& v : {a, b})
        for (const auto& e : lattice_out_edges(v)) {
            auto s = e.tail.triple(), h = e.head.triple();
            int diff = 0;
            for (int i = 0; i < 3; ++i) diff += h[i] - s[i];
            CHECK(diff == 1);
        }
}

TEST_CASE("honeycomb_tree") {
    SUBCASE("star at a first-kind point is H3") {
        auto h3 = honeycomb_from_edges(star_edges({LatticeKind::A, 0, 0}));
        CHECK(h3.vertex_count() == 4);
        CHECK(h3.edge_count() == 3);
        CHECK(h3.classify(1).kind == VertexKind::FirstKind);
        CHECK(h3.increasing_order());
        CHECK(h3.labels()[1] == "(0,0,0)");
        CHECK(h3.direction(1).in_edges == std::vector<int>{0});
    }
    SUBCASE("closed hexagon") {
        CHECK(code_of([] { honeycomb_tree({{0, 0}}); }) == Errc::ContainsCycle);
    }
    SUBCASE("disconnected selection") {
        auto edges = star_edges({LatticeKind::A, 0, 0});
        auto far = star_edges({LatticeKind::A, 5, 5});
        edges.insert(edges.end(), far.begin(), far.end());
        CHECK(code_of([&] { honeycomb_from_edges(edges); }) == Errc::NotConnected);
    }
    SUBCASE("three hexagons around a vertex with one edge pruned each") {
        std::vector<std::pair<int, int>> cells{{0, 0}, {-1, 0}, {-1, 1}};
        // Count edges of the union by brute force.
        std::set<LatticeEdge> all;
        for (auto [p, q] : cells)
            for (const auto& e : hexagon_edges(p, q)) all.insert(e);
        CHECK(all.size() == 15);
        std::vector<LatticeEdge> pruned;
        LatticeVertex hub{LatticeKind::A, 0, 0};
        for (auto [p, q] : cells) {
            for (const auto& e : hexagon_edges(p, q))
                if (e.tail != hub && e.head != hub) {
                    bool shared = false;
                    for (auto [p2, q2] : cells)
                        if (std::pair{p2, q2} != std::pair{p, q})
                            for (const auto& f : hexagon_edges(p2, q2)) shared = shared || f == e;
                    if (!shared) {
                        pruned.push_back(e);
                        break;
                    }
                }
        }
        REQUIRE(pruned.size() == 3);
        auto t = honeycomb_tree(cells, pruned);
        CHECK(t.edge_count() == 12);
        CHECK(t.edge_count() == t.vertex_count() - 1);
        CHECK(t.increasing_order());
        for (int v = 0; v < t.vertex_count(); ++v) {
            auto c = t.classify(v);
            CHECK_FALSE((c.deg_in >= 2 && c.deg_out >= 2));
            CHECK(c.kind != VertexKind::General);
        }
        check_degree_sums(t);
    }
}

TEST_CASE("relaxed topology admits the parallel-edge network") {
    BuildOptions relaxed;
    relaxed.topology = Topology::DirectedAcyclic;
    auto t = build_tree(4, {{0, 1, 9.0}, {1, 2, 2.0}, {1, 2, 2.0}, {2, 3, 9.0}}, relaxed);
    CHECK_FALSE(t.is_tree());
    CHECK(t.increasing_order());
    CHECK(t.classify(1).kind == VertexKind::FirstKind);
    CHECK(t.classify(2).kind == VertexKind::SecondKind);
    CHECK(code_of([&] { build_tree(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}, relaxed); }) == Errc::ContainsCycle);
}
