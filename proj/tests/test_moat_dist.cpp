#include "doctest.h"

#include "steiner/errors.hpp"
#include "steiner/moat_central.hpp"
#include "steiner/moat_dist.hpp"
#include "steiner/oracle.hpp"
#include "test_util.hpp"

using namespace steiner;
using steiner::testing::make_graph;
using steiner::testing::small_instance;

namespace {

SteinerInstance random_instance(std::uint64_t seed, int nmin, int nmax) {
    Rng rng(seed * 7919 + 3);
    int n = static_cast<int>(uniform_int(rng, nmin, nmax));
    int m = std::min(n * (n - 1) / 2, n - 1 + static_cast<int>(uniform_int(rng, 0, n)));
    int k = static_cast<int>(uniform_int(rng, 1, std::max(1, n / 6)));
    int per = 2 + static_cast<int>(uniform_int(rng, 0, 1));
    if (k * per > n) per = 2;
    return small_instance(seed, n, m, k, per, 12);
}

}  // namespace

TEST_CASE("CR to IC transform") {
    auto g = make_graph(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}});
    {
        auto inst = SteinerInstance::cr(g, {{1}, {0}, {}, {}});
        Simulator sim(g);
        auto tree = build_bfs_tree(sim);
        auto ic = transform_cr_to_ic(sim, tree, inst);
        CHECK(ic.label == std::vector<int>{0, 0, kNoLabel, kNoLabel});
    }
    {
        auto inst = SteinerInstance::cr(g, {{1}, {2}, {}, {}});
        Simulator sim(g);
        auto tree = build_bfs_tree(sim);
        auto ic = transform_cr_to_ic(sim, tree, inst);
        CHECK(ic.label == std::vector<int>{0, 0, 0, kNoLabel});
    }
}

TEST_CASE("CR transform preserves feasibility on random instances") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng rng(seed);
        int n = 6 + static_cast<int>(seed % 7);
        auto g = gen_random_connected(n, n + 2, 1, 5, rng);
        std::vector<std::vector<int>> req(n);
        int pairs = static_cast<int>(uniform_int(rng, 1, n));
        for (int i = 0; i < pairs; ++i) {
            int a = static_cast<int>(uniform_int(rng, 0, n - 1));
            int b = static_cast<int>(uniform_int(rng, 0, n - 1));
            req[a].push_back(b);
        }
        auto inst = SteinerInstance::cr(g, req);
        Simulator sim(g);
        auto tree = build_bfs_tree(sim);
        auto ic = transform_cr_to_ic(sim, tree, inst);
        CHECK(ic.label == cr_to_ic_reference(inst).label);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<int> edges;
            for (int e = 0; e < g.m(); ++e)
                if (uniform_int(rng, 0, 1)) edges.push_back(e);
            CHECK(check_feasible(edges, inst) == check_feasible(edges, ic));
        }
    }
}

TEST_CASE("minimal transform") {
    auto g = make_graph(5, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
    Simulator sim(g);
    auto tree = build_bfs_tree(sim);
    auto inst = SteinerInstance::ic(g, {0, 0, 7, kNoLabel, 3});
    auto mn = transform_to_minimal(sim, tree, inst);
    CHECK(mn.label == std::vector<int>{0, 0, kNoLabel, kNoLabel, kNoLabel});
    auto again = transform_to_minimal(sim, tree, mn);
    CHECK(again.label == mn.label);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        auto rg = gen_random_connected(15, 25, 1, 5, rng);
        std::vector<int> lab(15, kNoLabel);
        for (int v = 0; v < 15; ++v)
            if (uniform_int(rng, 0, 2) == 0) lab[v] = static_cast<int>(uniform_int(rng, 0, 5));
        auto ri = SteinerInstance::ic(rg, lab);
        Simulator s(rg);
        auto t = build_bfs_tree(s);
        CHECK(transform_to_minimal(s, t, ri).label == minimalize_reference(ri).label);
    }
}

TEST_CASE("minimal transform rounds grow affinely with k on stars") {
    // star with center 0 and 2k leaves, labels paired up; D = 2 throughout
    std::vector<long long> rounds;
    for (int k = 1; k <= 8; ++k) {
        WeightedGraph g(2 * k + 1);
        for (int i = 1; i <= 2 * k; ++i) g.add_edge(0, i, 1);
        std::vector<int> lab(2 * k + 1, kNoLabel);
        for (int i = 1; i <= 2 * k; ++i) lab[i] = (i - 1) / 2;
        Simulator sim(g);
        auto tree = build_bfs_tree(sim);
        long long before = sim.round();
        transform_to_minimal(sim, tree, SteinerInstance::ic(g, lab));
        rounds.push_back(sim.round() - before);
    }
    for (size_t i = 2; i < rounds.size(); ++i) CHECK(rounds[i] - rounds[i - 1] == rounds[1] - rounds[0]);
}

TEST_CASE("distributed exact moat growing on a single edge") {
    auto g = make_graph(2, {{0, 1, 4}});
    auto inst = SteinerInstance::ic(g, {0, 0});
    auto res = moat_grow_distributed(inst);
    auto central = moat_grow_exact(inst);
    CHECK(res.solution.edges == central.solution.edges);
    CHECK(res.solution.weight == 4);
    CHECK(res.merge_phases == 1);
    auto m = all_pairs_shortest_paths(g);
    CHECK(res.stats.rounds <= 30 * (m.D + m.s));
}

TEST_CASE("rejects inputs the distributed emulation does not handle") {
    auto g = make_graph(3, {{0, 1, 1}, {1, 2, 1}});
    CHECK_THROWS_AS(moat_grow_distributed(SteinerInstance::ic(g, {0, kNoLabel, 1})), NotMinimalInstance);
    DistOptions lex;
    lex.tie = TieBreak::Lexicographic;
    CHECK_THROWS_AS(moat_grow_distributed(SteinerInstance::ic(g, {0, kNoLabel, 0}), lex), InvalidSpec);
}

TEST_CASE("distributed exact moat growing equals the central pipeline") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto inst = random_instance(seed, 6, 40);
        CAPTURE(seed);
        auto central = moat_grow_exact(inst);
        auto res = moat_grow_distributed(inst);
        CHECK(res.solution.edges == minimal_subforest(central.trace.forest, inst).edges);
        CHECK(res.solution.feasible);
        CHECK(res.merge_phases == static_cast<int>(central.trace.phases.size()));
        CHECK(res.merge_phases <= 2 * inst.k());
        REQUIRE(res.phases.size() == central.trace.phases.size());
        for (size_t j = 0; j < res.phases.size(); ++j) {
            const auto& a = res.phases[j].accepted;
            const auto& b = central.trace.phases[j].accepted;
            REQUIRE(a.size() == b.size());
            for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
            CHECK(res.phases[j].growth == central.trace.phases[j].growth);
        }
        CHECK(res.stats.max_edge_words <= kDefaultBudgetWords);
    }
}

TEST_CASE("distributed decomposition matches the central one phase by phase") {
    for (std::uint64_t seed = 100; seed < 115; ++seed) {
        auto inst = random_instance(seed, 6, 30);
        CAPTURE(seed);
        auto res = moat_grow_distributed(inst);
        auto central = moat_grow_exact(inst);
        auto metrics = all_pairs_shortest_paths(inst.graph);
        auto term = inst.terminals();
        CentralDecomposition cd(inst.graph, metrics, term);
        for (size_t j = 0; j < res.phases.size(); ++j) {
            const auto& ph = central.trace.phases[j];
            std::vector<char> act(inst.n(), 0);
            std::vector<Q> rad(inst.n(), Q(0));
            for (size_t ti = 0; ti < term.size(); ++ti) {
                act[term[ti]] = ph.active[ti];
                rad[term[ti]] = ph.radius[ti];
            }
            cd.begin_phase(static_cast<int>(j) + 1, act, rad);
            const auto& lg = res.phases[j];
            for (int u = 0; u < inst.n(); ++u) {
                CHECK(lg.status[u] == cd.status(u));
                if (cd.status(u) == NodeStatus::Cell) {
                    CHECK(lg.dist[u] == cd.reduced(u));
                    CHECK(lg.cell_owner[u] == cd.cell_owner(u));
                }
            }
            // everything that reached the root up to the stopping point is a true candidate
            const auto& all = cd.candidates();
            for (const auto& c : lg.collected) CHECK(std::binary_search(all.begin(), all.end(), c));
            cd.end_phase(ph.growth);
        }
    }
}

TEST_CASE("all-terminal single-label instances give the MST") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        Rng rng(seed);
        auto g = gen_random_connected(12, 24, 1, 20, rng);
        auto inst = SteinerInstance::ic(g, std::vector<int>(12, 0));
        auto res = moat_grow_distributed(inst);
        CHECK(res.solution.weight == mst_weight(g));
    }
}
