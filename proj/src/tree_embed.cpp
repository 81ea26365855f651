#include "steiner/tree_embed.hpp"

#include "moat_common.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace steiner {

using detail::broadcast_from_root;

namespace {

constexpr int kTagRank = 40;
constexpr int kTagLe = 41;
constexpr int kTagBeta = 42;

constexpr std::int64_t kBetaDenominator = std::int64_t{1} << 20;

struct LeEntry {
    Weight d;
    int pred;  // neighbour the entry was learned from, -1 for v itself
    int rank;
};

// Pipelined LE-list Bellman-Ford. Each round a node announces its closest
// unannounced entry to all neighbours.
class LeProgram : public NodeProgram {
public:
    LeProgram(const WeightedGraph& g, const std::vector<int>& rank, const std::vector<char>& blocked,
              const std::vector<Weight>& bound)
        : list_(g.n()), g_(g), rank_(rank), blocked_(blocked), bound_(bound), pending_(g.n()) {}

    void init(int v) override {
        if (blocked_[v]) return;
        list_[v][v] = LeEntry{0, -1, rank_[v]};
        pending_[v].insert({0, v});
    }
    void send(int v, Outbox& out) override {
        if (pending_[v].empty()) return;
        auto [d, u] = *pending_[v].begin();
        pending_[v].erase(pending_[v].begin());
        out.send_all(Message(kTagLe, {u, list_[v].at(u).rank, d}));
    }
    void receive(int v, const Inbox& in) override {
        if (blocked_[v]) return;
        for (const auto& m : in)
            if (m.msg.tag == kTagLe)
                admit(v, m.msg.id(0), m.msg.id(1), m.msg.at(2) + g_.adj(v)[m.port].w, m.from);
    }
    bool terminated(int v) const override { return pending_[v].empty(); }

    std::vector<std::map<int, LeEntry>> list_;

private:
    void admit(int v, int u, int r, Weight d, int from) {
        if (d >= bound_[v]) return;
        auto& L = list_[v];
        if (auto it = L.find(u); it != L.end()) {
            if (d > it->second.d) return;
            if (d == it->second.d) {
                if (it->second.pred >= 0 && from < it->second.pred) it->second.pred = from;
                return;
            }
            pending_[v].erase({it->second.d, u});
            L.erase(it);
        }
        for (const auto& [y, e] : L)
            if (e.d < d && e.rank > r) return;
        for (auto it = L.begin(); it != L.end();) {
            if (it->second.d > d && it->second.rank < r) {
                pending_[v].erase({it->second.d, it->first});
                it = L.erase(it);
            } else {
                ++it;
            }
        }
        L[u] = LeEntry{d, from, r};
        pending_[v].insert({d, u});
    }

    const WeightedGraph& g_;
    const std::vector<int>& rank_;
    const std::vector<char>& blocked_;
    const std::vector<Weight>& bound_;
    std::vector<std::set<std::pair<Weight, int>>> pending_;
};

int sqrt_ceil(int n) {
    int k = 0;
    while (k * k < n) ++k;
    return k;
}

std::vector<int> top_ranked(const std::vector<int>& rank, int k) {
    std::vector<int> by_rank(rank.size());
    for (size_t v = 0; v < rank.size(); ++v) by_rank[rank[v]] = static_cast<int>(v);
    std::vector<int> S(by_rank.end() - k, by_rank.end());
    std::sort(S.begin(), S.end());
    return S;
}

// Reads ancestors off sorted LE lists and closest-S data.
void fill_ancestors(VirtualTree& vt) {
    const int n = vt.n();
    vt.anc.assign(n, {});
    vt.anc_dist.assign(n, {});
    vt.iv.assign(n, vt.L + 1);
    for (int v = 0; v < n; ++v) {
        if (vt.mode == TreeMode::Truncate) {
            int i = 0;
            while (Q(vt.dist_s[v]) > vt.edge_weight(i)) ++i;
            vt.iv[v] = i;
        }
        for (int i = 0; i < vt.iv[v]; ++i) {
            const Q r = vt.edge_weight(i);
            int best = -1;
            Weight bd = 0;
            for (const auto& [u, d] : vt.le[v])
                if (Q(d) <= r && (best < 0 || vt.rank[u] > vt.rank[best])) best = u, bd = d;
            if (best < 0) throw std::logic_error("virtual tree: empty ball");
            vt.anc[v].push_back(best);
            vt.anc_dist[v].push_back(bd);
        }
    }
}

}  // namespace

Q VirtualTree::edge_weight(int level) const {
    Q w = beta;
    for (int i = 0; i < level; ++i) w *= 2;
    return w;
}

std::vector<int> VirtualTree::route(int v, int dest) const {
    std::vector<int> path{v};
    while (path.back() != dest) {
        auto it = next_hop[path.back()].find(dest);
        if (it == next_hop[path.back()].end()) throw std::logic_error("virtual tree: missing next hop");
        path.push_back(it->second);
        if (static_cast<int>(path.size()) > n()) throw std::logic_error("virtual tree: routing loop");
    }
    return path;
}

nlohmann::json to_json(const VirtualTree& vt) {
    nlohmann::json j;
    j["beta"] = to_string(vt.beta);
    j["L"] = vt.L;
    j["wd"] = vt.wd;
    j["mode"] = vt.mode == TreeMode::Full ? "full" : "truncate";
    j["S"] = vt.S;
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (int v = 0; v < vt.n(); ++v) {
        nlohmann::json x;
        x["id"] = v;
        x["rank"] = vt.rank[v];
        auto& a = x["ancestors"] = nlohmann::json::array();
        for (size_t i = 0; i < vt.anc[v].size(); ++i) {
            int u = vt.anc[v][i];
            auto it = vt.next_hop[v].find(u);
            a.push_back({{"level", i}, {"node", u}, {"dist", vt.anc_dist[v][i]},
                         {"next_hop", it == vt.next_hop[v].end() ? -1 : it->second}});
        }
        if (vt.mode == TreeMode::Truncate) {
            x["iv"] = vt.iv[v];
            x["closest_s"] = vt.closest_s[v];
            x["dist_s"] = vt.dist_s[v];
        }
        nodes.push_back(std::move(x));
    }
    return j;
}

Q draw_beta(Rng& rng) {
    return Q(1) + Q(uniform_int(rng, 0, kBetaDenominator)) / Q(kBetaDenominator);
}

int virtual_tree_levels(Weight wd) {
    int L = 0;
    while ((Weight{1} << L) < wd) ++L;
    return L;
}

VirtualTree build_virtual_tree(Simulator& sim, const BfsTree& tree, Weight wd, std::uint64_t seed,
                               const TreeOptions& opt) {
    const auto& g = sim.graph();
    const int n = g.n();
    VirtualTree vt;
    vt.mode = opt.mode;
    vt.wd = wd;
    vt.L = virtual_tree_levels(wd);
    if (opt.rank) {
        vt.rank = *opt.rank;
    } else {
        vt.rank.resize(n);
        for (int v = 0; v < n; ++v) vt.rank[v] = v;
        Rng rng(mix_seed(seed, 1));
        shuffle_in_place(vt.rank, rng);
    }
    Rng beta_rng(mix_seed(seed, 2));
    const Q beta = opt.beta ? *opt.beta : draw_beta(beta_rng);
    // the root draws beta and tells everyone
    auto told = broadcast_from_root(sim, tree, {Message(kTagBeta, {}, {beta})}, "vtree/beta");
    vt.beta = told.at(0).rats.at(0);

    vt.in_S.assign(n, 0);
    vt.closest_s.assign(n, -1);
    vt.dist_s.assign(n, kInfWeight);
    std::vector<Weight> bound(n, kInfWeight);
    if (vt.mode == TreeMode::Truncate) {
        const int k = sqrt_ceil(n);
        std::vector<std::vector<UpItem>> items(n);
        for (int v = 0; v < n; ++v) items[v].push_back(UpItem{{Message(kTagRank, {vt.rank[v], v})}});
        std::vector<int> forwarded(n, 0);
        std::vector<int> top;
        UpcastHooks h;
        h.less = [](const UpItem& a, const UpItem& b) { return a.parts[0].at(0) > b.parts[0].at(0); };
        h.forward = [&](int v, const UpItem&) { return ++forwarded[v] <= k; };
        h.at_root = [&](int, const UpItem& x) {
            top.push_back(x.parts[0].id(1));
            return static_cast<int>(top.size()) == k;
        };
        ordered_upcast(sim, tree, std::move(items), h, "vtree/top-ranks");
        std::vector<Message> list;
        for (int v : top) list.push_back(Message(kTagRank, {v}));
        for (const auto& m : broadcast_from_root(sim, tree, list, "vtree/S")) vt.S.push_back(m.id(0));
        std::sort(vt.S.begin(), vt.S.end());
        if (vt.S != top_ranked(vt.rank, k)) throw std::logic_error("virtual tree: top-rank gather disagrees");
        for (int s : vt.S) vt.in_S[s] = 1;

        std::vector<std::optional<BfSource>> src(n);
        for (int s : vt.S) src[s] = BfSource{Q(0), s, true};
        auto bf = distributed_bellman_ford(
            sim, src, [&](int e) -> std::optional<Q> { return Q(g.edge(e).w); }, std::vector<char>(n, 1), 0,
            &tree, "vtree/voronoi");
        vt.next_hop.assign(n, {});
        for (int v = 0; v < n; ++v) {
            vt.closest_s[v] = bf.owner[v];
            vt.dist_s[v] = floor_q(bf.dist[v]).convert_to<Weight>();
            bound[v] = vt.dist_s[v];
            if (bf.parent[v] >= 0) vt.next_hop[v][vt.closest_s[v]] = bf.parent[v];
        }
    } else {
        vt.next_hop.assign(n, {});
    }

    LeProgram le(g, vt.rank, vt.in_S, bound);
    sim.run("vtree/le-lists", le);
    detect_termination(sim, tree, "vtree/le-lists");

    vt.le.assign(n, {});
    for (int v = 0; v < n; ++v) {
        for (const auto& [u, e] : le.list_[v]) {
            vt.le[v].push_back({u, e.d});
            if (e.pred >= 0) vt.next_hop[v][u] = e.pred;
        }
        std::sort(vt.le[v].begin(), vt.le[v].end(),
                  [](const auto& a, const auto& b) { return std::make_pair(a.second, a.first) < std::make_pair(b.second, b.first); });
    }
    fill_ancestors(vt);
    return vt;
}

VirtualTree reference_virtual_tree(const WeightedGraph& g, const Q& beta, const std::vector<int>& rank,
                                   TreeMode mode) {
    const int n = g.n();
    auto m = all_pairs_shortest_paths(g);
    VirtualTree vt;
    vt.beta = beta;
    vt.mode = mode;
    vt.wd = m.WD;
    vt.L = virtual_tree_levels(m.WD);
    vt.rank = rank;
    vt.in_S.assign(n, 0);
    vt.closest_s.assign(n, -1);
    vt.dist_s.assign(n, kInfWeight);
    vt.next_hop.assign(n, {});
    if (mode == TreeMode::Truncate) {
        vt.S = top_ranked(rank, sqrt_ceil(n));
        for (int s : vt.S) vt.in_S[s] = 1;
        for (int v = 0; v < n; ++v)
            for (int s : vt.S)
                if (m.dist(v, s) < vt.dist_s[v]) vt.dist_s[v] = m.dist(v, s), vt.closest_s[v] = s;
    }
    vt.le.assign(n, {});
    for (int v = 0; v < n; ++v) {
        if (vt.in_S[v]) continue;
        for (int u = 0; u < n; ++u) {
            if (vt.in_S[u] || m.dist(v, u) >= vt.dist_s[v]) continue;
            bool keep = true;
            for (int w = 0; w < n && keep; ++w)
                if (m.dist(v, w) < m.dist(v, u) && rank[w] > rank[u]) keep = false;
            if (keep) vt.le[v].push_back({u, m.dist(v, u)});
        }
        std::sort(vt.le[v].begin(), vt.le[v].end(),
                  [](const auto& a, const auto& b) { return std::make_pair(a.second, a.first) < std::make_pair(b.second, b.first); });
    }
    fill_ancestors(vt);
    return vt;
}

VirtualTreeCost virtual_tree_cost(const WeightedGraph& g, const Q& beta, const std::vector<int>& rank,
                                  const SteinerInstance& inst) {
    auto vt = reference_virtual_tree(g, beta, rank, TreeMode::Full);
    const int n = g.n();
    // tree nodes are ancestor suffixes (v_i, ..., v_L); leaves are the nodes themselves
    std::map<std::vector<int>, int> intern;
    std::vector<int> level;  // of the node's parent edge
    std::vector<std::vector<int>> chain(n);
    for (int v = 0; v < n; ++v) {
        chain[v].push_back(static_cast<int>(level.size()));
        level.push_back(0);
        for (int i = 0; i < vt.L; ++i) {
            std::vector<int> suffix(vt.anc[v].begin() + i, vt.anc[v].end());
            auto [it, fresh] = intern.try_emplace(suffix, static_cast<int>(level.size()));
            if (fresh) level.push_back(i + 1);
            chain[v].push_back(it->second);
        }
    }
    VirtualTreeCost cost;
    std::set<int> in_union;
    for (const auto& comp : inst.components()) {
        if (comp.size() < 2) continue;
        std::map<int, int> below;
        for (int v : comp)
            for (int c : chain[v]) ++below[c];
        for (auto [c, cnt] : below) {
            if (cnt == static_cast<int>(comp.size())) continue;
            cost.sum_of_subtrees += vt.edge_weight(level[c]);
            if (in_union.insert(c).second) cost.union_weight += vt.edge_weight(level[c]);
        }
    }
    return cost;
}

int max_relay_multiplicity(const VirtualTree& vt) {
    std::vector<std::set<int>> through(vt.n());
    for (int v = 0; v < vt.n(); ++v) {
        std::set<int> dests(vt.anc[v].begin(), vt.anc[v].end());
        if (vt.mode == TreeMode::Truncate) dests.insert(vt.closest_s[v]);
        for (int d : dests) {
            auto p = vt.route(v, d);
            for (size_t i = 0; i + 1 < p.size(); ++i) through[p[i]].insert(d);
        }
    }
    size_t best = 0;
    for (const auto& s : through) best = std::max(best, s.size());
    return static_cast<int>(best);
}

}  // namespace steiner
