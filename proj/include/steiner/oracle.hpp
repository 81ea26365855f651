#pragma once

#include "steiner/instance.hpp"
#include "steiner/rational.hpp"

#include <vector>

namespace steiner {

inline constexpr int kEnumerateMaxEdges = 24;
inline constexpr int kDpMaxTerminals = 10;

enum class OracleBackend { Auto, Enumerate, TerminalDp };

// Minimum-weight feasible edge set; ties go to the lexicographically smallest
// sorted edge-ID vector. Throws TooLarge outside the backend's guard.
ForestSolution exact_optimum(const SteinerInstance& inst, OracleBackend backend = OracleBackend::Auto);
Weight exact_optimum_weight(const SteinerInstance& inst);
bool oracle_admits(const SteinerInstance& inst);

// Union over labels of the F-paths between same-label terminals.
ForestSolution minimal_subforest(const std::vector<int>& forest, const SteinerInstance& inst);

bool check_feasible(const std::vector<int>& edges, const SteinerInstance& inst);
Q approx_ratio(const std::vector<int>& edges, const SteinerInstance& inst);
Q approx_ratio(Weight w, Weight opt);

}  // namespace steiner
