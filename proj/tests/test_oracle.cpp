#include "doctest.h"
#include "test_util.hpp"

#include "steiner/dsu.hpp"
#include "steiner/errors.hpp"
#include "steiner/oracle.hpp"

#include <algorithm>

using namespace steiner;
using steiner::testing::make_graph;

namespace {

// Weight of the best feasible subset by plain exhaustive enumeration.
Weight brute_force_weight(const SteinerInstance& inst) {
    Weight best = kInfWeight;
    const int m = inst.graph.m();
    for (long long mask = 0; mask < (1LL << m); ++mask) {
        std::vector<int> es;
        for (int e = 0; e < m; ++e) if (mask >> e & 1) es.push_back(e);
        if (check_feasible(es, inst)) best = std::min(best, inst.graph.weight_of(es));
    }
    return best;
}

// Delete removable edges one at a time until nothing can go.
std::vector<int> greedy_prune(std::vector<int> f, const SteinerInstance& inst) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < f.size(); ++i) {
            auto g = f;
            g.erase(g.begin() + static_cast<long>(i));
            if (check_feasible(g, inst)) {
                f = g;
                changed = true;
                break;
            }
        }
    }
    std::sort(f.begin(), f.end());
    return f;
}

}  // namespace

TEST_CASE("exact optimum on hand instances") {
    auto tri = make_graph(3, {{0, 1, 2}, {1, 2, 1}, {0, 2, 1}});
    auto inst = SteinerInstance::ic(tri, {0, 0, kNoLabel});
    CHECK(brute_force_weight(inst) == 2);
    CHECK(exact_optimum(inst).weight == 2);
    // equal-weight optima {ab} and {ac, cb}: edge IDs 0 vs {1, 2}
    CHECK(exact_optimum(inst).edges == std::vector<int>{0});

    auto single = SteinerInstance::ic(make_graph(2, {{0, 1, 4}}), {3, 3});
    auto sol = exact_optimum(single);
    CHECK(sol.edges == std::vector<int>{0});
    CHECK(sol.weight == 4);
}

TEST_CASE("all-terminal single label optimum equals MST") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Rng rng(seed);
        auto g = gen_random_connected(8, 12, 1, 9, rng);
        auto inst = SteinerInstance::ic(g, std::vector<int>(8, 0));
        CHECK(exact_optimum(inst, OracleBackend::TerminalDp).weight == mst_weight(g));
        CHECK(exact_optimum(inst, OracleBackend::Enumerate).weight == mst_weight(g));
    }
}

TEST_CASE("oracle backends agree and match plain enumeration") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        int n = 6 + static_cast<int>(seed % 4);
        int m = std::min(n * (n - 1) / 2, n + 4);
        int k = 1 + static_cast<int>(seed % 3);
        auto inst = steiner::testing::small_instance(seed, n, m, k, 2, 6);
        auto a = exact_optimum(inst, OracleBackend::Enumerate);
        auto b = exact_optimum(inst, OracleBackend::TerminalDp);
        CHECK(a.weight == brute_force_weight(inst));
        CHECK(a.edges == b.edges);
        CHECK(a.acyclic);
        CHECK(a.feasible);
        CHECK(exact_optimum_weight(inst) == a.weight);
    }
}

TEST_CASE("oracle guards") {
    Rng rng(3);
    auto g = gen_random_connected(30, 60, 1, 5, rng);
    auto inst = SteinerInstance::ic(g, gen_labels(30, 6, 2, rng));
    CHECK_THROWS_AS(exact_optimum(inst), TooLarge);
    CHECK_FALSE(oracle_admits(inst));
}

TEST_CASE("minimal subforest") {
    // path a-b-c with pendant c-d
    auto g = make_graph(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}});
    auto inst = SteinerInstance::ic(g, {0, kNoLabel, 0, kNoLabel});
    auto sol = minimal_subforest({0, 1, 2}, inst);
    CHECK(sol.edges == std::vector<int>{0, 1});
    CHECK(minimal_subforest(sol.edges, inst).edges == sol.edges);
    CHECK_THROWS_AS(minimal_subforest({0}, inst), Infeasible);

    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto in = steiner::testing::small_instance(seed * 17, 12, 20, 3, 2);
        Rng rng(seed);
        // random spanning tree plus nothing else is a feasible forest
        std::vector<int> order(in.graph.m());
        for (int i = 0; i < in.graph.m(); ++i) order[i] = i;
        shuffle_in_place(order, rng);
        Dsu dsu(in.n());
        std::vector<int> f;
        for (int e : order)
            if (dsu.unite(in.graph.edge(e).u, in.graph.edge(e).v)) f.push_back(e);
        auto pruned = minimal_subforest(f, in);
        CHECK(pruned.edges == greedy_prune(f, in));
        CHECK(pruned.weight <= in.graph.weight_of(f));
        CHECK(minimal_subforest(pruned.edges, in).edges == pruned.edges);
    }
}

TEST_CASE("feasibility and ratio") {
    auto g = make_graph(3, {{0, 1, 2}, {1, 2, 1}, {0, 2, 1}});
    auto inst = SteinerInstance::ic(g, {0, 0, kNoLabel});
    CHECK_FALSE(check_feasible({}, inst));
    CHECK(approx_ratio(exact_optimum(inst).edges, inst) == 1);
    CHECK(approx_ratio({1, 2}, inst) == 1);
}

TEST_CASE("CR and IC views have identical feasible sets") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        auto g = gen_random_connected(9, 14, 1, 5, rng);
        std::vector<std::vector<int>> req(9);
        for (int i = 0; i < 4; ++i) {
            int a = static_cast<int>(uniform_u64(rng, 9)), b = static_cast<int>(uniform_u64(rng, 9));
            if (a != b) req[a].push_back(b);
        }
        auto cr = SteinerInstance::cr(g, req);
        auto ic = cr_to_ic_reference(cr);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<int> es;
            for (int e = 0; e < g.m(); ++e) if (rng() & 1) es.push_back(e);
            CHECK(check_feasible(es, cr) == check_feasible(es, ic));
        }
    }
}
