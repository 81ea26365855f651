#pragma once

#include "steiner/congest.hpp"
#include "steiner/decomposition.hpp"
#include "steiner/instance.hpp"
#include "steiner/moat_central.hpp"
#include "steiner/primitives.hpp"

#include "json.hpp"

#include <optional>
#include <vector>

namespace steiner {

struct DistOptions {
    SimConfig sim;
    TieBreak tie = TieBreak::Regional;
    std::optional<int> sigma;  // overrides sqrt(min(st, n)) for the sublinear stages
};

// What one merge phase looked like; also the payload of `--stage`.
struct DistPhaseLog {
    int j = 0;
    int growth_phase = 0;  // sublinear runs only
    Q growth;
    std::vector<Candidate> collected;  // reached the root, in order
    std::vector<Candidate> accepted;   // became part of F_c
    long long rounds = 0;
    std::vector<NodeStatus> status;
    std::vector<int> cell_owner;
    std::vector<Q> dist;
};

nlohmann::json to_json(const DistPhaseLog& p);

struct SublinearStats {
    int sigma = 0;
    int growth_phases = 0;
    int max_large_moats = 0;     // over all observation points
    int max_small_diameter = 0;  // hop diameter within F of small moats
    int matching_iterations = 0;
};

struct DistResult {
    ForestSolution solution;
    std::vector<int> forest;  // before pruning; sorted edge IDs
    RunStats stats;
    std::vector<DistPhaseLog> phases;
    int merge_phases = 0;
    SublinearStats sublinear;
};

// Input transforms, run over an existing BFS tree.
SteinerInstance transform_cr_to_ic(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst);
SteinerInstance transform_to_minimal(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst);

// Exact moat growing (2-approximation), pruned output.
DistResult moat_grow_distributed(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst, TieBreak tie);
DistResult moat_grow_distributed(const SteinerInstance& inst, const DistOptions& opt = {});

int sublinear_sigma(int s, int t, int n);

// Rounded moat growing with sigma-bounded moats; returns the unpruned forest in
// both `forest` and `solution`.
DistResult moat_grow_sublinear(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst, const Q& eps,
                               const DistOptions& opt);
DistResult moat_grow_sublinear(const SteinerInstance& inst, const Q& eps, const DistOptions& opt = {});

struct PruneResult {
    ForestSolution solution;
    RunStats stats;
    int sigma = 0;
    int clusters = 0;
    int local_components = 0;  // solved without clustering
};

// Minimal solving subforest of `forest`. Throws Infeasible if it does not
// solve the instance.
PruneResult fast_prune(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst,
                       const std::vector<int>& forest, std::optional<int> sigma);
PruneResult fast_prune(const SteinerInstance& inst, const std::vector<int>& forest, const DistOptions& opt = {});

// Transforms, sublinear growth, pruning.
DistResult full_deterministic(const SteinerInstance& inst, const Q& eps, const DistOptions& opt = {});

}  // namespace steiner
