#pragma once

#include "steiner/graph.hpp"

#include <iosfwd>
#include <vector>

namespace steiner {

inline constexpr int kNoLabel = -1;

enum class InstanceKind { IC, CR };

struct SteinerInstance {
    WeightedGraph graph;
    InstanceKind kind = InstanceKind::IC;
    std::vector<int> label;                  // IC: per node, kNoLabel for non-terminals
    std::vector<std::vector<int>> requests;  // CR: R_v per node

    static SteinerInstance ic(WeightedGraph g, std::vector<int> labels);
    static SteinerInstance cr(WeightedGraph g, std::vector<std::vector<int>> requests);

    int n() const { return graph.n(); }
    std::vector<int> terminals() const;
    int t() const { return static_cast<int>(terminals().size()); }
    std::vector<int> label_set() const;  // IC only, sorted distinct labels
    int k() const;
    // Terminals grouped per label (IC) or per request component (CR).
    std::vector<std::vector<int>> components() const;
    bool is_minimal() const;  // IC: no label with exactly one terminal
};

// Centralized CR -> IC relabelling: label = smallest node ID of the request
// component. Used as an oracle for the distributed transform.
SteinerInstance cr_to_ic_reference(const SteinerInstance& inst);

// Drops singleton labels.
SteinerInstance minimalize_reference(const SteinerInstance& inst);

struct ForestSolution {
    std::vector<int> edges;  // sorted edge IDs
    Weight weight = 0;
    bool feasible = false;
    bool acyclic = true;
    // Per node: representative of its component in (V, F).
    std::vector<int> component;
};

ForestSolution make_solution(const SteinerInstance& inst, std::vector<int> edges);

SteinerInstance read_instance(std::istream& in);
void write_instance(std::ostream& out, const SteinerInstance& inst);

}  // namespace steiner
