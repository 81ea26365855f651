#pragma once

#include "steiner/graph.hpp"
#include "steiner/rational.hpp"

#include <array>
#include <optional>
#include <tuple>
#include <vector>

namespace steiner {

// ({v,w}, j, W^, e). v < w; x is the endpoint of e on v's side.
struct Candidate {
    int v = -1;
    int w = -1;
    int phase = 0;
    Q what;
    int x = -1;
    int y = -1;
    int tag_v = -1;  // optional component / leader tags
    int tag_w = -1;

    int edge_lo() const { return x < y ? x : y; }
    int edge_hi() const { return x < y ? y : x; }
    auto key() const { return std::make_tuple(phase, what, v, w, edge_lo(), edge_hi()); }
    friend bool operator<(const Candidate& a, const Candidate& b) { return a.key() < b.key(); }
    friend bool operator==(const Candidate& a, const Candidate& b) { return a.key() == b.key(); }
};

Candidate make_candidate(int owner_x, int owner_y, int phase, Q what, int x, int y);

// Local geometry of one edge {x, y} at the start of a phase. dx/dy are the
// reduced distances of the endpoints (0 for active region nodes); an empty
// dy means y belongs to an inactive region. gap = W - claims of both sides.
Q candidate_weight(const Q& dx, const std::optional<Q>& dy, const Q& gap);
// Part of the gap that x's owner can claim before meeting y's owner.
Q split_share(const Q& dx, const std::optional<Q>& dy, const Q& gap);
// Claim extension of x's side after the phase grew active moats by `growth`.
Q claim_extension(const Q& dx, const std::optional<Q>& dy, const Q& gap, const Q& growth);

enum class NodeStatus : char { Unassigned, ActiveRegion, Cell, InactiveRegion };

// Centralized reference for the per-phase terminal decomposition: regions
// (claimed territory with shortest-path trees), Voronoi cells under reduced
// weights, and the candidate merges they induce.
class CentralDecomposition {
public:
    CentralDecomposition(const WeightedGraph& g, const GraphMetrics& m, const std::vector<int>& terminals);

    // `active` and `radius` are indexed by node ID (entries for terminals).
    void begin_phase(int j, const std::vector<char>& active, const std::vector<Q>& radius);
    void end_phase(const Q& growth);

    int phase() const { return phase_; }
    const std::vector<Candidate>& candidates() const { return candidates_; }
    // Node sequence v .. x, y .. w of the candidate's path.
    std::vector<int> path(const Candidate& c) const;

    int owner(int u) const { return owner_[u]; }
    NodeStatus status(int u) const { return status_[u]; }
    const Q& reduced(int u) const { return dist_[u]; }
    int cell_owner(int u) const { return cell_owner_[u]; }
    int region_parent(int u) const { return rparent_[u]; }
    int cell_parent(int u) const { return cparent_[u]; }
    const Q& claim(int edge, int endpoint) const;
    // Covered length of an edge (sum of both sides' claims).
    Q covered(int edge) const;

private:
    Q reduced_weight(int edge) const;
    std::vector<int> chain(int u) const;  // u .. owner

    const WeightedGraph& g_;
    const GraphMetrics& m_;
    int phase_ = 0;
    std::vector<int> owner_;
    std::vector<Weight> wd_;
    std::vector<int> rparent_;
    std::vector<std::array<Q, 2>> claim_;  // [edge][0: side of edge.u, 1: side of edge.v]
    std::vector<char> active_;
    std::vector<Q> radius_;
    // phase-local
    std::vector<NodeStatus> status_;
    std::vector<Q> dist_;
    std::vector<int> cell_owner_;
    std::vector<int> cparent_;
    std::vector<Candidate> candidates_;
};

}  // namespace steiner
