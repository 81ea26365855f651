#pragma once

#include "steiner/decomposition.hpp"
#include "steiner/graph.hpp"
#include "steiner/instance.hpp"
#include "steiner/rational.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace steiner {

// How the merging pair and its path are chosen when several pairs reach the
// minimal growth at once.
//  Regional: the smallest candidate merge (phase, W^, ids) whose growth equals
//    the current in-phase growth; the path is the one induced by its edge.
//    This is the order the distributed algorithms reproduce.
//  Lexicographic: smallest (min id, max id) pair, canonical shortest path.
enum class TieBreak { Regional, Lexicographic };

std::string to_string(TieBreak t);
TieBreak parse_tie_break(const std::string& s);

// One iteration of the main loop. Vectors are indexed like MoatTrace::terminals
// and describe the state after the step (index i+1 quantities), except
// `active_before`, which is act_i.
struct MoatStep {
    int i = 0;
    bool checkpoint = false;
    Q mu;
    Q cumulative;
    int phase = 0;
    int v = -1;
    int w = -1;
    std::vector<int> path;         // node sequence v .. w (empty at checkpoints)
    std::vector<int> added_edges;  // edges of the path not closing a cycle
    int active_moats = 0;          // act_i: number of active moats during the step
    std::vector<char> active_before;
    std::vector<int> moat;         // moat representative (smallest terminal index)
    std::vector<char> active;
    std::vector<int> label;
    std::vector<Q> radius;
    std::optional<Candidate> candidate;  // Regional only
};

struct MoatPhase {
    int j = 0;
    int first_step = 0;  // 1-based step indices, inclusive
    int last_step = 0;
    Q growth;
    std::vector<char> active;          // act^(j) per terminal index
    std::vector<Q> radius;             // radii at phase start
    std::vector<Candidate> accepted;   // candidates realized by the phase's merges, in order
};

struct MoatTrace {
    std::vector<int> terminals;  // sorted node IDs
    TieBreak tie_break = TieBreak::Regional;
    std::optional<Q> eps;
    std::vector<MoatStep> steps;
    std::vector<MoatPhase> phases;
    std::vector<int> forest;  // F_{i_max}, sorted edge IDs
    int i_max() const { return static_cast<int>(steps.size()); }
    int merges() const;
};

struct GrowthSchedule {
    Q eps;
    std::vector<Q> thresholds;        // mu^ at each checkpoint
    std::vector<int> checkpoint_steps;
    std::vector<int> merge_phases;    // k_g: merge phases ending inside growth phase g
    int growth_phases() const { return static_cast<int>(thresholds.size()); }
};

struct MoatResult {
    ForestSolution solution;  // minimal subforest of F_{i_max}
    MoatTrace trace;
};

struct RoundedMoatResult {
    ForestSolution solution;
    MoatTrace trace;
    GrowthSchedule schedule;
};

MoatResult moat_grow_exact(const SteinerInstance& inst, TieBreak tie = TieBreak::Regional);
RoundedMoatResult moat_grow_rounded(const SteinerInstance& inst, const Q& eps, TieBreak tie = TieBreak::Regional);

// sum_i act_i * mu_i
Q dual_lower_bound(const MoatTrace& trace);

// 1 + ceil(log_{1+eps/2}(WD/2)), computed exactly (0 growth allowed when WD < 2).
int growth_phase_bound(const Q& eps, Weight wd);

// Structural checks over a finished trace; returns an empty string or a description of the first violation.
std::string check_trace_invariants(const MoatTrace& trace, const SteinerInstance& inst);

nlohmann::json to_json(const Candidate& c);
nlohmann::json to_json(const MoatTrace& t);
nlohmann::json to_json(const GrowthSchedule& s);

}  // namespace steiner
