#pragma once

// Clusters of nodes with rooted spanning trees, and the machinery to let
// clusters act as virtual nodes (used for merging moats and pruning clusters).

#include "steiner/primitives.hpp"

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace steiner::detail {

struct ClusterView {
    RootedForest tree;        // rooted at the leaders
    std::vector<int> leader;  // per node, -1 outside every cluster
    std::vector<int> size;    // per member, size of its cluster
    std::vector<int> hops;    // depth in the cluster tree
};

// Leader = largest member ID of each component of (member, edge_in); tree by
// first arrival of the leader's flood. `detect` pays for quiescence detection.
ClusterView form_clusters(Simulator& sim, const RootedForest& detect, const std::vector<char>& member,
                          const std::vector<char>& edge_in, const std::string& stage);

// Links between clusters: `up[x]` is the port of the edge x's cluster chose
// (set only at the chosing endpoint); `down[y]` lists ports on which other
// clusters' choices arrive.
struct Links {
    std::vector<int> up;
    std::vector<std::vector<int>> down;
};

// One round on the cluster graph: leader states go down the cluster trees,
// across every link in both directions, and back up. Returns, per leader, the
// state seen across the cluster's own link and the combination of states that
// arrived over links chosen by other clusters.
struct VirtualOut {
    std::vector<std::optional<Message>> across_up;
    std::vector<std::optional<Message>> across_down;
};

using Combine = std::function<void(int, std::optional<Message>&, const Message&)>;

VirtualOut virtual_round(Simulator& sim, const ClusterView& view, const Links& links,
                         const std::vector<Message>& leader_state, const Combine& combine_down,
                         const std::string& stage);

// Tells the far endpoint of every chosen link that it was chosen (one round)
// and returns the filled `down` lists.
Links make_links(Simulator& sim, const std::vector<int>& up_port, const std::string& stage);

// Maximal matching on the pseudoforest of links between small clusters
// (Cole-Vishkin 3-colouring, then one proposal sweep per colour). A mutual
// pair is broken at the smaller leader. Per leader: 1 if the cluster's own
// link is a matching edge, and the matched partner's leader in `partner`.
struct MatchingOut {
    std::vector<char> own_link_matched;
    std::vector<int> partner;
    int virtual_rounds = 0;
};

MatchingOut cluster_matching(Simulator& sim, const ClusterView& view, const Links& links,
                             const std::vector<char>& small_at_leader, const std::string& stage);

// Tree routine: for every label, selects the edges of the minimal subtree
// spanning the nodes whose set contains it (tentative marks on the way up,
// unmarks on the way down). Returns per node whether its parent edge is kept.
std::vector<char> tree_select(Simulator& sim, const RootedForest& f, const std::vector<std::set<int>>& labels,
                              const std::string& stage);

// One round: every node sends `msg[v]` over each listed port.
std::vector<std::vector<std::optional<Message>>> port_exchange(Simulator& sim,
                                                               const std::vector<std::vector<int>>& ports,
                                                               const std::vector<Message>& msg,
                                                               const std::string& stage);

// One round with a separate message per port: out[v] lists (port, message).
std::vector<std::vector<std::optional<Message>>> port_send(Simulator& sim,
                                                           const std::vector<std::vector<std::pair<int, Message>>>& out,
                                                           const std::string& stage);

}  // namespace steiner::detail
