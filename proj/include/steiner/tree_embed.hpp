#pragma once

#include "steiner/congest.hpp"
#include "steiner/instance.hpp"
#include "steiner/primitives.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace steiner {

enum class TreeMode { Full, Truncate };

// Random hierarchical embedding read off LE lists. Node v's leaf hangs below
// v_0; the virtual edge into level i (v_{i-1} -> v_i, with v_{-1} = v) weighs
// beta * 2^i. In truncate mode the chain stops below the first level whose
// ball meets S, and v routes to its closest S node instead.
struct VirtualTree {
    Q beta;
    int L = 0;
    Weight wd = 0;
    TreeMode mode = TreeMode::Full;
    std::vector<int> rank;                            // permutation of 0..n-1
    std::vector<std::vector<std::pair<int, Weight>>> le;  // LE list, by distance
    std::vector<std::vector<int>> anc;                // v_0 .. v_{iv-1}
    std::vector<std::vector<Weight>> anc_dist;
    std::vector<int> iv;                              // L+1 in full mode
    std::vector<int> S;                               // sorted by ID
    std::vector<char> in_S;
    std::vector<int> closest_s;                       // -1 in full mode
    std::vector<Weight> dist_s;
    std::vector<std::map<int, int>> next_hop;         // destination -> neighbour

    int n() const { return static_cast<int>(rank.size()); }
    Q edge_weight(int level) const;  // beta * 2^level
    // Destination of v's labels in phase i.
    int destination(int v, int i) const { return i < iv[v] ? anc[v][i] : closest_s[v]; }
    // Node sequence v .. destination following the next hops.
    std::vector<int> route(int v, int dest) const;
};

nlohmann::json to_json(const VirtualTree& vt);

struct TreeOptions {
    TreeMode mode = TreeMode::Full;
    std::optional<Q> beta;  // drawn from the seed when unset
    std::optional<std::vector<int>> rank;
};

Q draw_beta(Rng& rng);
int virtual_tree_levels(Weight wd);  // ceil(log2 wd), 0 for wd <= 1

// Distributed construction: S by a top-ranks upcast (truncate mode), Voronoi
// cells of S by Bellman-Ford, LE lists by pipelined Bellman-Ford.
VirtualTree build_virtual_tree(Simulator& sim, const BfsTree& tree, Weight wd, std::uint64_t seed,
                               const TreeOptions& opt = {});

// Centralized evaluator over all-pairs distances; next hops are left empty.
VirtualTree reference_virtual_tree(const WeightedGraph& g, const Q& beta, const std::vector<int>& rank,
                                   TreeMode mode);

// Full (untruncated) ancestor chains of the centralized evaluator, used for
// the virtual-tree solution weights.
struct VirtualTreeCost {
    Q sum_of_subtrees;  // sum over labels of the weight of T_lambda
    Q union_weight;     // weight of the union of the T_lambda
};

VirtualTreeCost virtual_tree_cost(const WeightedGraph& g, const Q& beta, const std::vector<int>& rank,
                                  const SteinerInstance& inst);

// Largest number of distinct destinations whose routes pass through one node.
int max_relay_multiplicity(const VirtualTree& vt);

struct Stage1Phase {
    int i = 0;
    int purged = 0;       // labels dropped as singletons
    int holders = 0;      // nodes with a non-empty label set after the purge
    int destinations = 0;
    std::vector<int> added;  // edges that joined F in this phase
    Weight max_route = 0;    // largest holder-to-destination distance
    long long rounds = 0;
};

struct Stage1Result {
    std::vector<int> forest;  // sorted edge IDs
    Weight weight = 0;
    std::vector<Stage1Phase> phases;
    std::vector<std::set<int>> final_labels;  // l(v) after the last phase
};

Stage1Result stage1_select(Simulator& sim, const BfsTree& tree, const VirtualTree& vt, const SteinerInstance& inst);

struct ReducedInstance {
    std::vector<int> S;
    std::vector<int> group;            // per node: its S node if in some T_v, else -1
    std::vector<std::vector<int>> T;   // per S index: terminals of T_v
    std::vector<int> residual;         // V_r
    std::vector<std::pair<int, int>> helper_edges;  // E_Lambda, (smaller, larger)
    std::map<int, int> lambda_hat;     // original label -> component (smallest label)
    // Reduced graph: the non-empty T_v in S order, then V_r.
    std::vector<int> node_of;          // per original node
    SteinerInstance reduced;
    std::vector<int> induced_by;       // reduced edge -> inducing original edge
    int hop_cap = 0;
    int uncovered = 0;  // terminals outside every T_v whose label is not done in F
};

int stage2_hop_cap(int n);  // ceil(3 sqrt(n) ln n)

ReducedInstance build_reduced_instance(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst,
                                       const std::vector<int>& forest, const std::vector<int>& S);

// Co-residence components computed centrally (test oracle).
std::map<int, int> reference_lambda_hat(const ReducedInstance& red, const SteinerInstance& inst);

// Gathers the reduced instance at the root, solves it with the exact moat
// growing there and broadcasts the inducing edges.
std::vector<int> stage2_solve(Simulator& sim, const BfsTree& tree, const ReducedInstance& red);

struct RandomizedOptions {
    SimConfig sim;
    int repetition_factor = 1;      // repetitions = factor * ceil(log2 n), at least 1
    std::optional<TreeMode> mode;   // default: truncate iff s > sqrt(n)
};

struct RandomizedRep {
    std::uint64_t seed = 0;
    Q beta;
    std::vector<int> rank;
    Weight weight = 0;
    bool feasible = false;
    VirtualTreeCost tree_cost;
    int relay = 0;
    std::vector<int> forest;
};

struct RandomizedResult {
    ForestSolution solution;
    RunStats stats;
    TreeMode mode = TreeMode::Full;
    std::vector<RandomizedRep> reps;
    int best = -1;
    std::vector<int> stage1_forest;
    std::vector<int> stage2_edges;
    int uncovered = 0;
    int max_relay = 0;
    long long stage2_rounds = 0;
};

RandomizedResult full_randomized(const SteinerInstance& inst, std::uint64_t seed, const RandomizedOptions& opt = {});

}  // namespace steiner
