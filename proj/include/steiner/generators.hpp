#pragma once

#include "steiner/instance.hpp"
#include "steiner/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace steiner {

WeightedGraph gen_random_connected(int n, int m, Weight wmin, Weight wmax, Rng& rng);
WeightedGraph gen_random_geometric(int n, double radius, Weight scale, Rng& rng);
WeightedGraph gen_grid(int rows, int cols, Weight wmin, Weight wmax, Rng& rng);
// Path 0-1-...-(n-1); with heavy_middle the middle edge weighs n and chords
// heavier than the whole path are added, so s stays n-1.
WeightedGraph gen_weighted_path(int n, bool heavy_middle, Rng& rng);
// `cliques` cliques of `size` nodes, each attached by one edge to a hub node 0.
WeightedGraph gen_star_of_cliques(int cliques, int size, Weight wmin, Weight wmax, Rng& rng);

// k disjoint input components of `per_component` random terminals each.
std::vector<int> gen_labels(int n, int k, int per_component, Rng& rng);

// Set-disjointness gadgets. Nodes: a_{-1..n} are 0..n+1, b_{-1..n} follow.
SteinerInstance gen_sd_gadget_cr(int n, const std::vector<int>& A, const std::vector<int>& B, Weight rho);
SteinerInstance gen_sd_gadget_ic(int n, const std::vector<int>& A, const std::vector<int>& B);
std::vector<int> sd_gadget_heavy_edges(const SteinerInstance& gadget, int n);
Weight sd_gadget_heavy_weight(int n, Weight rho);

struct GenSpec {
    std::string family = "gnm";  // gnm | geometric | grid | path | cliques | mst
    int n = 12;
    int m = 0;           // gnm: edge count (0: ~1.6n)
    int rows = 0, cols = 0;
    double radius = 0.45;
    Weight wmin = 1, wmax = 10;
    int k = 2;
    int per_component = 2;
    bool heavy_middle = true;
    int count = 1;
    std::uint64_t seed = 1;
};

// Instances i = 0..count-1 use seed mix_seed(spec.seed, i).
std::vector<SteinerInstance> gen_family(const GenSpec& spec);
SteinerInstance gen_instance(const GenSpec& spec, std::uint64_t seed);

}  // namespace steiner
