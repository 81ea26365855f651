#pragma once

// Pieces shared by the distributed moat-growing variants.

#include "steiner/decomposition.hpp"
#include "steiner/dsu.hpp"
#include "steiner/instance.hpp"
#include "steiner/moat_dist.hpp"
#include "steiner/primitives.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace steiner::detail {

enum Tag : int {
    kTagTerminal = 10,
    kTagPair,
    kTagLabel,
    kTagCandidate,
    kTagExchange,
    kTagToken,
    kTagAccepted,
    kTagMin,
    kTagLeader,
    kTagColor,
    kTagPropose,
    kTagAccept,
    kTagState,
    kTagEdge,
    kTagMark,
};

// IC, minimal, regional tie-break; throws otherwise.
void check_dist_input(const SteinerInstance& inst, TieBreak tie);

Message encode_candidate(const Candidate& c, int tag = kTagCandidate);
Candidate decode_candidate(const Message& m);
bool item_less(const UpItem& a, const UpItem& b);

// Everything a node knows about the moats once F_c^(j) has been broadcast.
// The knowledge is identical at all nodes, so one copy stands in for n.
class MoatBook {
public:
    explicit MoatBook(const std::vector<std::pair<int, int>>& terminal_labels);

    int t() const { return static_cast<int>(term_.size()); }
    const std::vector<int>& terminals() const { return term_; }
    int index(int node) const { return index_.at(node); }
    bool is_terminal(int node) const { return index_.count(node) > 0; }
    int original_label(int ti) const { return orig_label_[ti]; }

    int rep(int ti) const { return moat_[ti]; }
    int rep_node(int node) const { return moat_[index(node)]; }
    bool active(int ti) const { return active_.at(moat_[ti]); }
    bool active_node(int node) const { return active(index(node)); }
    int label_of(int ti) const { return label_.at(moat_[ti]); }
    bool any_active() const;
    std::vector<char> activity() const;         // per terminal index
    std::vector<char> activity_by_node(int n) const;
    std::vector<int> members(int r) const;

    // Merged moat keeps the smaller representative and v's label; it starts active.
    int merge(int node_v, int node_w);
    void refresh(int r);  // active iff its label is shared with another moat
    void refresh_all();
    int count_label(int lab) const;

private:
    std::vector<int> term_;
    std::map<int, int> index_;
    std::vector<int> orig_label_;
    std::vector<int> moat_;
    std::map<int, char> active_;
    std::map<int, int> label_;
};

// Claimed territory: region owners, region tree pointers and the claimed
// part of every edge from each side. Both endpoints of an edge can evaluate
// both claims from what they exchange, so the edge array is shared.
struct Territory {
    std::vector<int> owner;
    std::vector<int> rparent;
    std::vector<std::array<Q, 2>> claim;

    Territory(const WeightedGraph& g, const std::vector<int>& terminals);
    Q reduced(const WeightedGraph& g, int e) const { return Q(g.edge(e).w) - claim[e][0] - claim[e][1]; }
};

struct NbrInfo {
    NodeStatus status = NodeStatus::Unassigned;
    int owner = -1;
    Q d;
};

struct PhaseDecomp {
    std::vector<NodeStatus> status;
    std::vector<Q> dist;
    std::vector<int> cell_owner;
    std::vector<int> cparent;
    std::vector<std::vector<NbrInfo>> nbr;       // per node, per port
    std::vector<std::vector<Candidate>> cands;   // E_c(u), per node
};

// Bellman-Ford from active regions, then one exchange with every neighbour.
PhaseDecomp decompose_phase(Simulator& sim, const BfsTree& tree, const Territory& terr,
                            const std::vector<char>& active_node, int j, const std::string& stage);

// Claim extensions and region growth after a phase that grew active moats by `growth`.
void end_phase_local(const WeightedGraph& g, Territory& terr, const PhaseDecomp& pd, const Q& growth);

// Candidates of F_c that lie on a path between two same-label terminals.
std::vector<Candidate> minimal_candidates(const std::vector<Candidate>& fc, const MoatBook& book);

// Token walk from both ends of every candidate edge up the region trees;
// returns the marked edges.
std::vector<int> materialize_paths(Simulator& sim, const Territory& terr, const std::vector<Candidate>& keep,
                                   const std::string& stage);

// Gathers one item list per node at the root (sorted, duplicates merged) and
// broadcasts the result; returns the list every node ends up with.
std::vector<Message> gather_everywhere(Simulator& sim, const BfsTree& tree, std::vector<std::vector<Message>> items,
                                       const std::function<bool(const Message&, const Message&)>& less,
                                       const std::string& stage);

std::vector<Message> broadcast_from_root(Simulator& sim, const BfsTree& tree, const std::vector<Message>& items,
                                         const std::string& stage);

}  // namespace steiner::detail
