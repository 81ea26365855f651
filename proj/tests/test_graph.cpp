#include "doctest.h"
#include "test_util.hpp"

#include "steiner/dsu.hpp"
#include "steiner/errors.hpp"
#include "steiner/graph.hpp"

#include <algorithm>
#include <sstream>

using namespace steiner;
using steiner::testing::make_graph;

TEST_CASE("unit path metrics") {
    auto g = make_graph(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}});
    auto m = all_pairs_shortest_paths(g);
    CHECK(m.s == 3);
    CHECK(m.D == 3);
    CHECK(m.WD == 3);
    for (int v = 0; v < 4; ++v) CHECK(m.dist(v, v) == 0);
}

TEST_CASE("triangle metrics match exhaustive path enumeration") {
    // a=0, b=1, c=2 with ab=2, bc=1, ca=1
    auto g = make_graph(3, {{0, 1, 2}, {1, 2, 1}, {0, 2, 1}});
    auto m = all_pairs_shortest_paths(g);
    int s = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            Weight best = kInfWeight;
            int hops = 1 << 20;
            steiner::testing::for_each_simple_path(g, a, b, [&](const std::vector<int>& p, Weight w) {
                int h = static_cast<int>(p.size()) - 1;
                if (w < best || (w == best && h < hops)) {
                    best = w;
                    hops = h;
                }
            });
            CHECK(m.dist(a, b) == best);
            CHECK(m.hops[a][b] == hops);
            s = std::max(s, hops);
        }
    CHECK(m.dist(0, 1) == 2);
    CHECK(m.s == s);
    CHECK(m.s == 1);  // the direct a-b edge is a least-weight path
    // lexicographic tie-break between a-b and a-c-b picks the direct edge
    CHECK(canonical_path(g, m, 0, 1) == std::vector<int>{0, 1});
}

TEST_CASE("disconnected graph is rejected") {
    WeightedGraph g(3);
    g.add_edge(0, 1, 1);
    CHECK_THROWS_AS(all_pairs_shortest_paths(g), DisconnectedGraph);
}

TEST_CASE("invalid edges are rejected") {
    WeightedGraph g(3);
    CHECK_THROWS_AS(g.add_edge(0, 0, 1), InvalidGraph);
    CHECK_THROWS_AS(g.add_edge(0, 1, 0), InvalidGraph);
    g.add_edge(0, 1, 1);
    CHECK_THROWS_AS(g.add_edge(1, 0, 2), InvalidGraph);
}

TEST_CASE("ball fractions") {
    SUBCASE("single edge of weight 3, radius 2") {
        auto g = make_graph(2, {{0, 1, 3}});
        auto m = all_pairs_shortest_paths(g);
        auto b = ball(g, m, 0, Q(2));
        CHECK(b.interior == std::vector<int>{0});
        REQUIRE(b.boundary.size() == 1);
        CHECK(b.boundary[0].fraction == Q(2, 3));
    }
    SUBCASE("radius 0") {
        auto g = make_graph(2, {{0, 1, 3}});
        auto m = all_pairs_shortest_paths(g);
        auto b = ball(g, m, 0, Q(0));
        CHECK(b.interior == std::vector<int>{0});
        for (auto& f : b.boundary) CHECK(f.fraction == 0);
    }
    SUBCASE("unit path, radius 1.5") {
        auto g = make_graph(3, {{0, 1, 1}, {1, 2, 1}});
        auto m = all_pairs_shortest_paths(g);
        auto b = ball(g, m, 0, Q(3, 2));
        CHECK(b.interior == std::vector<int>{0, 1});
        REQUIRE(b.boundary.size() == 1);
        CHECK(b.boundary[0].edge == g.edge_id(1, 2));
        CHECK(b.boundary[0].fraction == Q(1, 2));
    }
}

TEST_CASE("ball properties on random graphs") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        auto g = gen_random_connected(10, 16, 1, 7, rng);
        auto m = all_pairs_shortest_paths(g);
        for (int v = 0; v < g.n(); ++v) {
            CHECK(static_cast<int>(ball(g, m, v, Q(m.WD)).interior.size()) == g.n());
            // Edge midpoints can sit up to W/2 beyond the farthest node.
            Weight maxw = 0;
            for (const auto& e : g.edges()) maxw = std::max(maxw, e.w);
            auto full = ball(g, m, v, Q(m.WD) + Q(maxw, 2));
            CHECK(static_cast<int>(full.interior.size()) == g.n());
            CHECK(full.boundary.empty());
            auto small = ball(g, m, v, Q(3, 2));
            auto big = ball(g, m, v, Q(7, 2));
            CHECK(std::includes(big.interior.begin(), big.interior.end(), small.interior.begin(),
                                small.interior.end()));
            for (const auto& f : small.boundary)
                for (const auto& h : big.boundary)
                    if (h.edge == f.edge && h.inner == f.inner) CHECK(f.fraction <= h.fraction);
        }
        for (int a = 0; a < g.n(); ++a)
            for (int b = 0; b < g.n(); ++b)
                for (int c = 0; c < g.n(); ++c) CHECK(m.dist(a, b) <= m.dist(a, c) + m.dist(c, b));
    }
}

TEST_CASE("s agrees with hop-layered Bellman-Ford on 50 random graphs") {
    for (std::uint64_t seed = 100; seed < 150; ++seed) {
        Rng rng(seed);
        int n = 5 + static_cast<int>(seed % 26);
        int m = std::min(n * (n - 1) / 2, n + static_cast<int>(seed % 7) * 3);
        auto g = gen_random_connected(n, m, 1, 12, rng);
        auto metrics = all_pairs_shortest_paths(g);
        int s = 0;
        for (int src = 0; src < n; ++src) {
            // d[h][v]: least weight over walks with at most h hops
            std::vector<Weight> cur(n, kInfWeight);
            cur[src] = 0;
            std::vector<int> first(n, -1);
            first[src] = 0;
            for (int h = 1; h < n; ++h) {
                auto next = cur;
                for (const auto& e : g.edges()) {
                    if (cur[e.u] < kInfWeight) next[e.v] = std::min(next[e.v], cur[e.u] + e.w);
                    if (cur[e.v] < kInfWeight) next[e.u] = std::min(next[e.u], cur[e.v] + e.w);
                }
                cur = next;
                for (int v = 0; v < n; ++v)
                    if (first[v] < 0 && cur[v] == metrics.dist(src, v)) first[v] = h;
            }
            for (int v = 0; v < n; ++v) {
                CHECK(cur[v] == metrics.dist(src, v));
                s = std::max(s, first[v]);
            }
        }
        CHECK(metrics.s == s);
        CHECK(metrics.D <= metrics.s);
    }
}

TEST_CASE("canonical path is the lexicographically smallest least-weight path") {
    for (std::uint64_t seed = 7; seed < 17; ++seed) {
        Rng rng(seed);
        auto g = gen_random_connected(7, 12, 1, 3, rng);
        auto m = all_pairs_shortest_paths(g);
        for (int a = 0; a < 7; ++a)
            for (int b = 0; b < 7; ++b) {
                std::vector<int> best;
                steiner::testing::for_each_simple_path(g, a, b, [&](const std::vector<int>& p, Weight w) {
                    if (w == m.dist(a, b) && (best.empty() || p < best)) best = p;
                });
                CHECK(canonical_path(g, m, a, b) == best);
            }
    }
}

TEST_CASE("mst weight") {
    CHECK(mst_weight(make_graph(3, {{0, 1, 2}, {1, 2, 1}, {0, 2, 1}})) == 2);
    CHECK(mst_weight(make_graph(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}})) == 3);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        auto g = gen_random_connected(8, 13, 1, 20, rng);
        // brute force over all 7-edge subsets
        Weight best = kInfWeight;
        const int m = g.m();
        for (int mask = 0; mask < (1 << m); ++mask) {
            if (__builtin_popcount(mask) != 7) continue;
            Dsu dsu(8);
            Weight w = 0;
            bool ok = true;
            for (int e = 0; e < m && ok; ++e)
                if (mask >> e & 1) {
                    ok = dsu.unite(g.edge(e).u, g.edge(e).v);
                    w += g.edge(e).w;
                }
            if (ok) best = std::min(best, w);
        }
        CHECK(mst_weight(g) == best);
    }
}

TEST_CASE("graph text round trip is canonical") {
    auto g = make_graph(4, {{2, 3, 5}, {0, 1, 2}, {1, 2, 7}});
    std::stringstream ss;
    write_graph(ss, g);
    CHECK(ss.str() == "4 3\n0 1 2\n1 2 7\n2 3 5\n");
    auto h = read_graph(ss);
    CHECK(h.m() == 3);
    CHECK(h.edge(h.edge_id(3, 2)).w == 5);
}
