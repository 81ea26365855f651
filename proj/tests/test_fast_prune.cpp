#include "doctest.h"

#include "steiner/dsu.hpp"
#include "steiner/errors.hpp"
#include "steiner/moat_central.hpp"
#include "steiner/moat_dist.hpp"
#include "steiner/oracle.hpp"
#include "test_util.hpp"

#include <algorithm>

using namespace steiner;
using steiner::testing::make_graph;
using steiner::testing::small_instance;

namespace {

// Spanning forest in random edge order, then restricted to a random subset of
// its components that still solves the instance (i.e. all of it).
std::vector<int> random_spanning_tree(const WeightedGraph& g, Rng& rng) {
    std::vector<int> order(g.m());
    for (int e = 0; e < g.m(); ++e) order[e] = e;
    for (int i = g.m() - 1; i > 0; --i) std::swap(order[i], order[uniform_int(rng, 0, i)]);
    Dsu d(g.n());
    std::vector<int> out;
    for (int e : order)
        if (d.unite(g.edge(e).u, g.edge(e).v)) out.push_back(e);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("pruning drops a pendant edge") {
    auto g = make_graph(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}});
    auto inst = SteinerInstance::ic(g, {0, kNoLabel, 0, kNoLabel});
    auto res = fast_prune(inst, {0, 1, 2});
    CHECK(res.solution.edges == std::vector<int>{0, 1});
}

TEST_CASE("pruning rejects a forest that does not solve the instance") {
    auto g = make_graph(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}});
    auto inst = SteinerInstance::ic(g, {0, kNoLabel, 0});
    CHECK_THROWS_AS(fast_prune(inst, {0}), Infeasible);
    CHECK_THROWS_AS(fast_prune(inst, {0, 1, 2}), Infeasible);
}

TEST_CASE("pruning matches the minimal subforest oracle") {
    int clustered = 0;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        Rng rng(seed * 31 + 7);
        int n = 12 + static_cast<int>(seed % 30);
        int k = 1 + static_cast<int>(seed % 4);
        auto inst = small_instance(seed, n, n + static_cast<int>(seed % 9), k, 2 + static_cast<int>(seed % 2));
        std::vector<std::vector<int>> inputs{random_spanning_tree(inst.graph, rng),
                                             moat_grow_exact(inst).trace.forest,
                                             moat_grow_sublinear(inst, Q(1, 2)).forest};
        for (const auto& f : inputs) {
            auto want = minimal_subforest(f, inst).edges;
            for (std::optional<int> sigma : {std::optional<int>{}, std::optional<int>{2}, std::optional<int>{3}}) {
                CAPTURE(seed);
                CAPTURE(sigma.value_or(0));
                DistOptions opt;
                opt.sigma = sigma;
                auto res = fast_prune(inst, f, opt);
                CHECK(res.solution.edges == want);
                CHECK(res.stats.max_edge_words <= kDefaultBudgetWords);
                clustered += res.clusters > 0;
            }
        }
    }
    CHECK(clustered > 50);
}

TEST_CASE("pruning is idempotent") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        Rng rng(seed);
        auto inst = small_instance(seed, 20, 30, 3, 2);
        auto f = random_spanning_tree(inst.graph, rng);
        DistOptions opt;
        opt.sigma = 2;
        auto once = fast_prune(inst, f, opt).solution.edges;
        CHECK(fast_prune(inst, once, opt).solution.edges == once);
    }
}
