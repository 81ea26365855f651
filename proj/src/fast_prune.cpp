#include "steiner/moat_dist.hpp"

#include "cluster.hpp"
#include "moat_common.hpp"
#include "steiner/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace steiner {

using namespace detail;

int sublinear_sigma(int s, int t, int n) {
    long long x = std::min<long long>(static_cast<long long>(s) * t, n);
    if (x <= 1) return 1;
    long long r = static_cast<long long>(std::sqrt(static_cast<double>(x)));
    while (r * r < x) ++r;
    while ((r - 1) * (r - 1) >= x) --r;
    return static_cast<int>(r);
}

namespace {

// The forest on clusters, known to every node once contracted.
struct Contracted {
    struct E {
        int x, y, cx, cy;
    };
    std::vector<E> edges;
    std::map<int, std::vector<std::pair<int, int>>> adj;  // cluster -> (cluster, edge index)

    void add(const E& e) {
        adj[e.cx].push_back({e.cy, static_cast<int>(edges.size())});
        adj[e.cy].push_back({e.cx, static_cast<int>(edges.size())});
        edges.push_back(e);
    }
    // Edge indices and clusters on the path a .. b; false if none exists.
    bool path(int a, int b, std::vector<int>& es, std::vector<int>& cs) const {
        std::map<int, std::pair<int, int>> prev;  // cluster -> (previous cluster, edge)
        std::vector<int> stack{a};
        prev[a] = {-1, -1};
        while (!stack.empty()) {
            int c = stack.back();
            stack.pop_back();
            if (c == b) break;
            auto it = adj.find(c);
            if (it == adj.end()) continue;
            for (auto [d, e] : it->second)
                if (!prev.count(d)) {
                    prev[d] = {c, e};
                    stack.push_back(d);
                }
        }
        if (!prev.count(b)) return false;
        for (int c = b; c != -1; c = prev[c].first) {
            cs.push_back(c);
            if (prev[c].second >= 0) es.push_back(prev[c].second);
        }
        return true;
    }
};

class LabelState {
public:
    explicit LabelState(const Contracted* c) : le(c->edges.size()), c_(c) {}

    bool has(int cl, int lab) const {
        auto it = lc.find(cl);
        return it != lc.end() && it->second.count(lab);
    }

    void apply(int cl, int lab) {
        if (has(cl, lab)) return;
        lc[cl].insert(lab);
        settle();
    }

    bool operator==(const LabelState& o) const { return lc == o.lc && le == o.le; }

    std::map<int, std::set<int>> lc;
    std::vector<std::set<int>> le;

private:
    void settle() {
        bool changed = true;
        while (changed) {
            changed = false;
            std::map<int, std::vector<int>> where;
            for (const auto& [cl, labs] : lc)
                for (int l : labs) where[l].push_back(cl);
            for (const auto& [l, cls] : where) {
                for (size_t i = 1; i < cls.size(); ++i) {
                    std::vector<int> es, cs;
                    STEINER_CHECK(c_->path(cls[0], cls[i], es, cs), "one label in two components of F");
                    for (int e : es) changed |= le[e].insert(l).second;
                    for (int c : cs) changed |= lc[c].insert(l).second;
                }
            }
            for (size_t e = 0; e < le.size(); ++e) {
                if (le[e].size() < 2) continue;
                const std::set<int> group = le[e];
                auto meets = [&](const std::set<int>& s) {
                    for (int l : group)
                        if (s.count(l)) return true;
                    return false;
                };
                for (auto& s : le)
                    if (meets(s))
                        for (int l : group) changed |= s.insert(l).second;
                for (auto& [cl, s] : lc)
                    if (meets(s))
                        for (int l : group) changed |= s.insert(l).second;
            }
        }
    }

    const Contracted* c_;
};

// Steps 5 and 6: label propagation towards the BFS root.
class LabelProgram : public NodeProgram {
public:
    LabelProgram(const BfsTree& t, const Contracted& c) : t_(t), own_(t.parent.size(), LabelState(&c)), told_(own_) {}

    void send(int v, Outbox& out) override {
        auto next = pending(v);
        if (!next) return;
        told_[v].apply(next->first, next->second);
        out.send_to(t_.parent[v], Message(kTagLabel, {next->first, next->second}));
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in)
            if (d.msg.tag == kTagLabel) own_[v].apply(d.msg.id(0), d.msg.id(1));
    }
    bool terminated(int v) const override { return v == t_.root || !pending(v); }

    std::optional<std::pair<int, int>> pending(int v) const {
        for (const auto& [cl, labs] : own_[v].lc)
            for (int l : labs)
                if (!told_[v].has(cl, l)) return std::make_pair(cl, l);
        return std::nullopt;
    }

    const BfsTree& t_;
    std::vector<LabelState> own_;
    std::vector<LabelState> told_;  // what the parent can infer from messages sent so far
};

}  // namespace

PruneResult fast_prune(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst,
                       const std::vector<int>& forest, std::optional<int> sigma_override) {
    const auto& g = inst.graph;
    const int n = g.n();
    auto given = make_solution(inst, forest);
    if (!given.acyclic) throw Infeasible("pruning input is not a forest");
    if (!given.feasible) throw Infeasible("pruning input does not solve the instance");
    auto ic = inst.kind == InstanceKind::IC ? inst : cr_to_ic_reference(inst);

    PruneResult res;
    res.sigma = sigma_override ? *sigma_override : sublinear_sigma(all_pairs_shortest_paths(g).s, inst.t(), n);
    const int sigma = std::max(1, res.sigma);

    std::vector<char> in_f(g.m(), 0);
    for (int e : forest) in_f[e] = 1;
    std::vector<std::vector<int>> fports(n);
    std::vector<char> member(n, 0);
    for (int v = 0; v < n; ++v) {
        const auto& adj = g.adj(v);
        for (int p = 0; p < static_cast<int>(adj.size()); ++p)
            if (in_f[adj[p].edge]) fports[v].push_back(p);
        member[v] = !fports[v].empty();
    }
    std::set<int> out_edges;

    // labels become known everywhere
    {
        std::vector<std::vector<Message>> items(n);
        for (int v = 0; v < n; ++v)
            if (ic.label[v] != kNoLabel) items[v].push_back(Message(kTagLabel, {ic.label[v]}));
        gather_everywhere(
            sim, tree, std::move(items), [](const Message& a, const Message& b) { return a.at(0) < b.at(0); },
            "prune/labels");
    }

    // components within sigma hops of their largest node are solved directly
    std::vector<char> small(n, 0);
    {
        std::vector<std::int64_t> key(n, -1);
        for (int v = 0; v < n; ++v)
            if (member[v]) key[v] = v;
        auto fl = flood_max(sim, key, in_f, nullptr, "prune/probe", sigma + 1);
        std::vector<Message> msg(n);
        for (int v = 0; v < n; ++v) msg[v] = Message(kTagState, {fl.best[v]});
        auto nb = port_exchange(sim, fports, msg, "prune/probe-exchange");
        std::vector<std::optional<Message>> ok(n);
        for (int v = 0; v < n; ++v) {
            if (!member[v]) continue;
            bool good = fl.hops[v] <= sigma;
            for (int p : fports[v]) good = good && nb[v][p]->at(0) == fl.best[v];
            ok[v] = Message(kTagState, {good ? 1 : 0});
        }
        auto pf = make_forest(sim, fl.parent, member, "prune/probe-tree");
        auto all = forest_convergecast(
            sim, pf, ok, [](int, std::optional<Message>& acc, const Message& m) { acc->ints[0] &= m.at(0); },
            "prune/probe-and");
        std::vector<std::vector<Message>> at_root(n);
        for (int v = 0; v < n; ++v)
            if (pf.is_root(v)) at_root[v] = {*all[v]};
        auto got = forest_broadcast(sim, pf, at_root, "prune/probe-result");
        for (int v = 0; v < n; ++v)
            if (member[v]) small[v] = (pf.is_root(v) ? all[v]->at(0) : got[v].at(0).at(0)) != 0;

        RootedForest sf = pf;
        std::vector<std::set<int>> labs(n);
        for (int v = 0; v < n; ++v) {
            sf.member[v] = member[v] && small[v];
            if (sf.member[v] && ic.label[v] != kNoLabel) labs[v] = {ic.label[v]};
        }
        auto keep = tree_select(sim, sf, labs, "prune/local");
        std::set<int> roots;
        for (int v = 0; v < n; ++v) {
            if (sf.is_root(v)) roots.insert(v);
            if (keep[v]) out_edges.insert(g.edge_id(v, sf.parent[v]));
        }
        res.local_components = static_cast<int>(roots.size());
    }

    // clusters of at least sigma nodes inside the remaining components
    std::vector<char> big(n, 0);
    bool any_big = false;
    for (int v = 0; v < n; ++v) {
        big[v] = member[v] && !small[v];
        any_big = any_big || big[v];
    }
    if (!any_big) {
        res.solution = make_solution(inst, {out_edges.begin(), out_edges.end()});
        return res;
    }
    std::vector<char> edge_in(g.m(), 0);
    auto view = form_clusters(sim, tree, big, edge_in, "prune/clusters0");
    int iterations = 0;
    while ((1 << iterations) < sigma) ++iterations;
    for (int it = 1; it <= iterations; ++it) {
        const std::string st = "prune/clusters" + std::to_string(it);
        std::vector<Message> lm(n);
        for (int v = 0; v < n; ++v) lm[v] = Message(kTagLeader, {view.leader[v]});
        auto nl = port_exchange(sim, fports, lm, st + "/leaders");
        // smallest outgoing F edge of every small cluster
        std::vector<std::optional<Message>> best(n);
        for (int v = 0; v < n; ++v) {
            if (!big[v] || view.size[v] >= sigma) continue;
            for (int p : fports[v]) {
                int w = g.adj(v)[p].to;
                int lw = nl[v][p]->id(0);
                if (lw == view.leader[v]) continue;
                Message m(kTagEdge, {std::min(v, w), std::max(v, w), v, lw});
                if (!best[v] || std::make_pair(m.at(0), m.at(1)) < std::make_pair(best[v]->at(0), best[v]->at(1)))
                    best[v] = m;
            }
        }
        auto chosen = forest_convergecast(
            sim, view.tree, best,
            [](int, std::optional<Message>& acc, const Message& m) {
                if (std::make_pair(m.at(0), m.at(1)) < std::make_pair(acc->at(0), acc->at(1))) acc = m;
            },
            st + "/choose");
        std::vector<std::vector<Message>> at_root(n);
        std::vector<char> small_at_leader(n, 0);
        for (int v = 0; v < n; ++v) {
            if (!view.tree.is_root(v) || !big[v]) continue;
            small_at_leader[v] = view.size[v] < sigma;
            if (small_at_leader[v]) {
                STEINER_CHECK(chosen[v].has_value(), "small cluster without an outgoing edge");
                at_root[v] = {*chosen[v]};
            }
        }
        auto heard = forest_broadcast(sim, view.tree, at_root, st + "/announce");
        std::vector<int> up(n, -1);
        for (int v = 0; v < n; ++v) {
            if (!big[v]) continue;
            const auto& lst = view.tree.is_root(v) ? at_root[v] : heard[v];
            if (lst.empty()) continue;
            const Message& m = lst[0];
            if (m.id(2) == v) up[v] = g.port_of(v, m.id(0) == v ? m.id(1) : m.id(0));
        }
        auto links = make_links(sim, up, st + "/links");
        auto mt = cluster_matching(sim, view, links, small_at_leader, st + "/match");
        // F_+: matched links plus the choices of unmatched small clusters
        std::vector<std::vector<Message>> use_root(n);
        for (int v = 0; v < n; ++v) {
            if (!view.tree.is_root(v) || !big[v] || !small_at_leader[v]) continue;
            bool use = mt.own_link_matched[v] || mt.partner[v] < 0;
            use_root[v] = {Message(kTagAccept, {use ? 1 : 0})};
        }
        auto use_heard = forest_broadcast(sim, view.tree, use_root, st + "/use");
        std::vector<std::vector<int>> tell(n);
        for (int v = 0; v < n; ++v) {
            if (up[v] < 0) continue;
            const auto& lst = view.tree.is_root(v) ? use_root[v] : use_heard[v];
            if (!lst.empty() && lst[0].at(0)) {
                tell[v] = {up[v]};
                edge_in[g.adj(v)[up[v]].edge] = 1;
            }
        }
        auto told = port_exchange(sim, tell, std::vector<Message>(n, Message(kTagAccept)), st + "/join");
        for (int v = 0; v < n; ++v)
            for (int p = 0; p < g.degree(v); ++p)
                if (told[v][p]) edge_in[g.adj(v)[p].edge] = 1;
        view = form_clusters(sim, tree, big, edge_in, st + "/form");
    }
    std::set<int> leaders;
    for (int v = 0; v < n; ++v)
        if (big[v]) {
            leaders.insert(view.leader[v]);
            STEINER_CHECK(view.size[v] >= sigma, "a small cluster survived the merging loop");
        }
    res.clusters = static_cast<int>(leaders.size());

    // the contracted forest becomes known everywhere
    Contracted con;
    {
        std::vector<Message> lm(n);
        for (int v = 0; v < n; ++v) lm[v] = Message(kTagLeader, {view.leader[v]});
        auto nl = port_exchange(sim, fports, lm, "prune/contract-leaders");
        std::vector<std::vector<Message>> items(n);
        for (int v = 0; v < n; ++v) {
            if (!big[v]) continue;
            for (int p : fports[v]) {
                int w = g.adj(v)[p].to;
                int lw = nl[v][p]->id(0);
                if (v < w && lw != view.leader[v]) items[v].push_back(Message(kTagEdge, {v, w, view.leader[v], lw}));
            }
        }
        auto all = gather_everywhere(
            sim, tree, std::move(items),
            [](const Message& a, const Message& b) {
                return std::make_pair(a.at(0), a.at(1)) < std::make_pair(b.at(0), b.at(1));
            },
            "prune/contract");
        for (const auto& m : all) con.add({m.id(0), m.id(1), m.id(2), m.id(3)});
    }

    // label propagation on the BFS tree
    LabelProgram lp(tree, con);
    for (int v = 0; v < n; ++v)
        if (big[v] && ic.label[v] != kNoLabel) lp.own_[v].apply(view.leader[v], ic.label[v]);
    sim.run("prune/propagate", lp);
    detect_termination(sim, tree, "prune/propagate-detect");

    // the root's state, sent as a non-redundant replay
    const LabelState& rs = lp.own_[tree.root];
    LabelState replay(&con);
    std::vector<Message> script;
    for (const auto& [cl, labs] : rs.lc)
        for (int l : labs)
            if (!replay.has(cl, l)) {
                replay.apply(cl, l);
                script.push_back(Message(kTagLabel, {cl, l}));
            }
    STEINER_CHECK(replay == rs, "replayed label state differs from the root's");
    broadcast_from_root(sim, tree, script, "prune/result");

    // labelled inter-cluster edges, then demands inside clusters
    std::vector<std::set<int>> want(n);
    for (int v = 0; v < n; ++v)
        if (big[v] && ic.label[v] != kNoLabel) want[v].insert(ic.label[v]);
    for (size_t e = 0; e < con.edges.size(); ++e) {
        if (replay.le[e].empty()) continue;
        const auto& ce = con.edges[e];
        out_edges.insert(g.edge_id(ce.x, ce.y));
        want[ce.x].insert(replay.le[e].begin(), replay.le[e].end());
        want[ce.y].insert(replay.le[e].begin(), replay.le[e].end());
    }
    auto keep = tree_select(sim, view.tree, want, "prune/clusters");
    for (int v = 0; v < n; ++v)
        if (keep[v]) out_edges.insert(g.edge_id(v, view.tree.parent[v]));

    res.solution = make_solution(inst, {out_edges.begin(), out_edges.end()});
    return res;
}

PruneResult fast_prune(const SteinerInstance& inst, const std::vector<int>& forest, const DistOptions& opt) {
    Simulator sim(inst.graph, opt.sim);
    auto tree = build_bfs_tree(sim);
    auto res = fast_prune(sim, tree, inst, forest, opt.sigma);
    res.stats = sim.stats();
    return res;
}

}  // namespace steiner
