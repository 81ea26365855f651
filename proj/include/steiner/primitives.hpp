#pragma once

#include "steiner/congest.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace steiner {

inline constexpr int kTagDone = 99;  // reserved by the primitives below

// Parent pointers over a subset of nodes; children are learned by one
// notification round (make_forest).
struct RootedForest {
    std::vector<int> parent;  // -1 at roots and non-members
    std::vector<char> member;
    std::vector<std::vector<int>> children;

    bool is_root(int v) const { return member[v] && parent[v] < 0; }
    int height() const;  // analysis helper, not used by protocols
};

// One round: each member with a parent tells it.
RootedForest make_forest(Simulator& sim, std::vector<int> parent, std::vector<char> member, const std::string& stage);

struct BfsTree : RootedForest {
    int root = -1;
    std::vector<int> depth;
    int max_depth = 0;
};

// Max-ID flooding with hop counts, quiescence detection over the resulting
// tree, then child notification.
BfsTree build_bfs_tree(Simulator& sim);

// 1-word convergecast then broadcast over the tree: how nodes learn that a
// quiescent protocol has finished.
void detect_termination(Simulator& sim, const RootedForest& t, const std::string& stage);

// Result of flooding the largest key over a subset of edges.
struct FloodResult {
    std::vector<std::int64_t> best;  // -1 for non-participants
    std::vector<int> parent;         // first-arrival parent (smallest ID on ties)
    std::vector<int> hops;
};

// Participants have key >= 0. Runs until quiescent, with `detect` (if given)
// charged for noticing it, or for exactly hop_cap rounds when hop_cap > 0.
FloodResult flood_max(Simulator& sim, const std::vector<std::int64_t>& key, const std::vector<char>& edge_allowed,
                      const RootedForest* detect, const std::string& stage, int hop_cap = 0);

// Pipelined broadcast of each root's item list to its whole tree.
std::vector<std::vector<Message>> forest_broadcast(Simulator& sim, const RootedForest& f,
                                                   const std::vector<std::vector<Message>>& at_root,
                                                   const std::string& stage);

// Single-message convergecast: every member contributes an optional value,
// `combine(v, acc, incoming)` folds; the result is available at the roots.
std::vector<std::optional<Message>> forest_convergecast(
    Simulator& sim, const RootedForest& f, const std::vector<std::optional<Message>>& value,
    const std::function<void(int, std::optional<Message>&, const Message&)>& combine, const std::string& stage);

// Ordered (pipelined) convergecast in the style of the GKP MST filter: a node
// forwards its smallest pending item once no child can still deliver a smaller
// one. Items with equal keys are combined on the way.
struct UpItem {
    std::vector<Message> parts;
};

struct UpcastHooks {
    int parts = 1;
    std::function<bool(const UpItem&, const UpItem&)> less;
    std::function<void(int, UpItem&, const UpItem&)> combine;  // optional
    std::function<bool(int, const UpItem&)> forward;            // optional filter at non-roots
    std::function<bool(int, const UpItem&)> at_root;            // return true to end the run
};

std::vector<std::vector<UpItem>> ordered_upcast(Simulator& sim, const RootedForest& f,
                                                std::vector<std::vector<UpItem>> items, const UpcastHooks& hooks,
                                                const std::string& stage);

struct BfSource {
    Q dist;
    int owner;
    bool pinned = false;  // keeps its initial value whatever it hears
};

struct BfResult {
    std::vector<char> reached;
    std::vector<Q> dist;
    std::vector<int> owner;
    std::vector<int> parent;  // smallest-ID neighbor realizing (dist, owner); -1 at sources
    long long rounds = 0;
};

// Synchronous Bellman-Ford with lexicographic (distance, owner) keys.
// weight(e) = nullopt excludes an edge; participate[v] = 0 excludes a node.
// hop_cap > 0 stops after that many rounds; otherwise the run ends at
// quiescence and `detect` is charged for noticing it.
BfResult distributed_bellman_ford(Simulator& sim, const std::vector<std::optional<BfSource>>& sources,
                                  const std::function<std::optional<Q>(int)>& weight,
                                  const std::vector<char>& participate, int hop_cap, const RootedForest* detect,
                                  const std::string& stage);

}  // namespace steiner
