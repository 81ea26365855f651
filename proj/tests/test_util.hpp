#pragma once

#include "steiner/generators.hpp"
#include "steiner/graph.hpp"
#include "steiner/instance.hpp"

#include <array>
#include <functional>
#include <vector>

namespace steiner::testing {

inline WeightedGraph make_graph(int n, std::initializer_list<std::array<long long, 3>> edges) {
    WeightedGraph g(n);
    for (auto& e : edges) g.add_edge(static_cast<int>(e[0]), static_cast<int>(e[1]), e[2]);
    return g;
}

// Random small IC instance; labels form k components of 2..3 terminals.
inline SteinerInstance small_instance(std::uint64_t seed, int n, int m, int k, int per = 2, Weight wmax = 9) {
    Rng rng(seed);
    auto g = gen_random_connected(n, m, 1, wmax, rng);
    auto labels = gen_labels(n, k, per, rng);
    return SteinerInstance::ic(std::move(g), std::move(labels));
}

// All simple paths between a and b (exhaustive; tiny graphs only).
inline void for_each_simple_path(const WeightedGraph& g, int a, int b,
                                 const std::function<void(const std::vector<int>&, Weight)>& fn) {
    std::vector<int> path{a};
    std::vector<char> on(g.n(), 0);
    on[a] = 1;
    std::function<void(int, Weight)> rec = [&](int v, Weight w) {
        if (v == b) {
            fn(path, w);
            return;
        }
        for (const auto& arc : g.adj(v)) {
            if (on[arc.to]) continue;
            on[arc.to] = 1;
            path.push_back(arc.to);
            rec(arc.to, w + arc.w);
            path.pop_back();
            on[arc.to] = 0;
        }
    };
    rec(a, 0);
}

}  // namespace steiner::testing
