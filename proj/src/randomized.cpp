#include "steiner/dsu.hpp"
#include "steiner/errors.hpp"
#include "steiner/moat_central.hpp"
#include "steiner/oracle.hpp"
#include "steiner/tree_embed.hpp"

#include "cluster.hpp"
#include "moat_common.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

namespace steiner {

using detail::broadcast_from_root;
using detail::port_exchange;

namespace {

constexpr int kTagHold = 50;
constexpr int kTagRoute = 51;
constexpr int kTagHandoff = 52;
constexpr int kTagLamU = 53;
constexpr int kTagHelper = 54;
constexpr int kTagGroup = 55;
constexpr int kTagRedEdge = 56;
constexpr int kTagPick = 57;
constexpr int kTagWeight = 58;

using Key = std::pair<int, int>;  // (label, destination)

// Forwarding of (label, destination) pairs along the next hops. Each port
// serves the destinations routed over it in turn, one pair per round.
class RouteProgram : public NodeProgram {
public:
    RouteProgram(const WeightedGraph& g, const VirtualTree& vt, const std::vector<std::set<int>>& labels,
                 const std::vector<int>& dest)
        : keys_(g.n()), pred_(g.n()), g_(g), vt_(vt), queue_(g.n()), last_(g.n()), lhat_(g.n()) {
        for (int v = 0; v < g.n(); ++v) {
            queue_[v].resize(g.degree(v));
            last_[v].assign(g.degree(v), -1);
            for (int lab : labels[v]) add(v, Key{lab, dest[v]}, -1);
        }
    }

    void send(int v, Outbox& out) override {
        for (int p = 0; p < g_.degree(v); ++p) {
            auto& q = queue_[v][p];
            if (q.empty()) continue;
            auto it = q.upper_bound(last_[v][p]);
            if (it == q.end()) it = q.begin();
            int w = it->first;
            int lab = *it->second.begin();
            it->second.erase(it->second.begin());
            if (it->second.empty()) q.erase(it);
            last_[v][p] = w;
            out.send(p, Message(kTagRoute, {lab, w}));
            used_.insert(g_.adj(v)[p].edge);
        }
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in)
            if (d.msg.tag == kTagRoute) add(v, Key{d.msg.id(0), d.msg.id(1)}, d.from);
    }
    bool terminated(int v) const override {
        for (const auto& q : queue_[v])
            if (!q.empty()) return false;
        return true;
    }

    std::vector<std::set<Key>> keys_;
    std::vector<std::map<Key, int>> pred_;  // -1: loaded locally
    std::set<int> used_;

private:
    void add(int v, Key k, int from) {
        if (!keys_[v].insert(k).second) return;
        pred_[v][k] = from;
        if (k.second == v) {
            lhat_[v].insert(k.first);
            return;
        }
        auto it = vt_.next_hop[v].find(k.second);
        if (it == vt_.next_hop[v].end()) throw std::logic_error("stage 1: no next hop");
        queue_[v][g_.port_of(v, it->second)][k.second].insert(k.first);
    }

    const WeightedGraph& g_;
    const VirtualTree& vt_;
    std::vector<std::vector<std::map<int, std::set<int>>>> queue_;  // per port: destination -> labels
    std::vector<std::vector<int>> last_;

public:
    std::vector<std::set<int>> lhat_;
};

// Carries every collector's labels back along the arrival path of one of its
// pairs to a node that loaded that pair itself.
class HandoffProgram : public NodeProgram {
public:
    HandoffProgram(const WeightedGraph& g, const RouteProgram& r) : got_(g.n()), g_(g), r_(r), queue_(g.n()) {
        for (int w = 0; w < g.n(); ++w) {
            queue_[w].resize(g.degree(w));
            if (r.lhat_[w].empty()) continue;
            Key k{*r.lhat_[w].begin(), w};
            for (int lab : r.lhat_[w]) deliver(w, Message(kTagHandoff, {k.first, k.second, lab}));
        }
    }
    void send(int v, Outbox& out) override {
        for (int p = 0; p < g_.degree(v); ++p) {
            if (queue_[v][p].empty()) continue;
            out.send(p, queue_[v][p].front());
            queue_[v][p].pop_front();
        }
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in)
            if (d.msg.tag == kTagHandoff) deliver(v, d.msg);
    }
    bool terminated(int v) const override {
        for (const auto& q : queue_[v])
            if (!q.empty()) return false;
        return true;
    }

    std::vector<std::set<int>> got_;

private:
    void deliver(int v, const Message& m) {
        int from = r_.pred_[v].at(Key{m.id(0), m.id(1)});
        if (from < 0)
            got_[v].insert(m.id(2));
        else
            queue_[v][g_.port_of(v, from)].push_back(m);
    }

    const WeightedGraph& g_;
    const RouteProgram& r_;
    std::vector<std::vector<std::deque<Message>>> queue_;
};

// Removes labels held by a single node (two carriers per label suffice to
// rule that out). Returns the number of labels dropped.
int purge_singletons(Simulator& sim, const BfsTree& tree, std::vector<std::set<int>>& labels, const std::string& stage) {
    const int n = sim.graph().n();
    std::vector<std::vector<UpItem>> items(n);
    for (int v = 0; v < n; ++v)
        for (int lab : labels[v]) items[v].push_back(UpItem{{Message(kTagHold, {lab, v})}});
    std::vector<std::map<std::int64_t, int>> sent(n);
    UpcastHooks h;
    h.less = [](const UpItem& a, const UpItem& b) {
        return std::make_pair(a.parts[0].at(0), a.parts[0].at(1)) < std::make_pair(b.parts[0].at(0), b.parts[0].at(1));
    };
    h.forward = [&](int v, const UpItem& x) { return ++sent[v][x.parts[0].at(0)] <= 2; };
    auto at = ordered_upcast(sim, tree, std::move(items), h, stage + "/gather");
    std::map<std::int64_t, int> count;
    for (const auto& it : at[tree.root]) ++count[it.parts[0].at(0)];
    std::vector<Message> singles;
    for (auto [lab, c] : count)
        if (c == 1) singles.push_back(Message(kTagHold, {lab}));
    auto known = broadcast_from_root(sim, tree, singles, stage + "/broadcast");
    for (const auto& m : known)
        for (auto& l : labels) l.erase(m.id(0));
    return static_cast<int>(known.size());
}

Weight total_weight(Simulator& sim, const BfsTree& tree, const std::vector<int>& forest, const std::string& stage) {
    const auto& g = sim.graph();
    std::vector<std::optional<Message>> part(g.n());
    for (int v = 0; v < g.n(); ++v) part[v] = Message(kTagWeight, {0});
    for (int e : forest) part[std::min(g.edge(e).u, g.edge(e).v)]->ints[0] += g.edge(e).w;
    auto at = forest_convergecast(
        sim, tree, part, [](int, std::optional<Message>& acc, const Message& m) { acc->ints[0] += m.at(0); }, stage);
    return at[tree.root]->at(0);
}

std::vector<int> spanning_forest(const WeightedGraph& g, std::vector<int> edges) {
    std::sort(edges.begin(), edges.end(), [&](int a, int b) {
        return std::make_pair(g.edge(a).w, a) < std::make_pair(g.edge(b).w, b);
    });
    Dsu d(g.n());
    std::vector<int> out;
    for (int e : edges)
        if (d.unite(g.edge(e).u, g.edge(e).v)) out.push_back(e);
    std::sort(out.begin(), out.end());
    return out;
}

Weight route_distance(const VirtualTree& vt, int v, int i) {
    return i < vt.iv[v] ? vt.anc_dist[v][i] : vt.dist_s[v];
}

}  // namespace

Stage1Result stage1_select(Simulator& sim, const BfsTree& tree, const VirtualTree& vt, const SteinerInstance& inst) {
    if (inst.kind != InstanceKind::IC) throw InvalidSpec("stage 1 expects an input-component instance");
    const auto& g = inst.graph;
    const int n = g.n();
    std::vector<std::set<int>> labels(n);
    for (int v = 0; v < n; ++v)
        if (inst.label[v] != kNoLabel) labels[v].insert(inst.label[v]);
    Stage1Result res;
    std::set<int> F;
    for (int i = 0; i <= vt.L; ++i) {
        const std::string stage = "stage1/phase" + std::to_string(i);
        const long long start = sim.round();
        Stage1Phase ph;
        ph.i = i;
        ph.purged = purge_singletons(sim, tree, labels, stage + "/purge");
        std::vector<int> dest(n, -1);
        std::set<int> dests;
        for (int v = 0; v < n; ++v) {
            if (labels[v].empty()) continue;
            ++ph.holders;
            dest[v] = vt.destination(v, i);
            dests.insert(dest[v]);
            ph.max_route = std::max(ph.max_route, route_distance(vt, v, i));
        }
        ph.destinations = static_cast<int>(dests.size());

        RouteProgram route(g, vt, labels, dest);
        sim.run(stage + "/route", route);
        detect_termination(sim, tree, stage + "/route");
        for (int e : route.used_)
            if (F.insert(e).second) ph.added.push_back(e);
        std::sort(ph.added.begin(), ph.added.end());

        HandoffProgram hand(g, route);
        sim.run(stage + "/handoff", hand);
        detect_termination(sim, tree, stage + "/handoff");
        labels = std::move(hand.got_);
        ph.rounds = sim.round() - start;
        res.phases.push_back(std::move(ph));
    }
    res.forest.assign(F.begin(), F.end());
    res.weight = g.weight_of(res.forest);
    res.final_labels = std::move(labels);
    return res;
}

int stage2_hop_cap(int n) {
    if (n <= 1) return 1;
    return std::max(1, static_cast<int>(std::ceil(3.0 * std::sqrt(static_cast<double>(n)) * std::log(static_cast<double>(n)))));
}

namespace {

struct LabelDsu {
    std::map<int, int> parent;
    int find(int x) {
        auto it = parent.find(x);
        if (it == parent.end()) return parent[x] = x;
        if (it->second == x) return x;
        return it->second = find(it->second);
    }
    bool unite(int a, int b) {
        a = find(a), b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b);
        parent[b] = a;
        return true;
    }
};

// Convergecast of the per-S label variables and the label forests.
class HelperProgram : public NodeProgram {
public:
    HelperProgram(const BfsTree& t, const std::vector<int>& group, const SteinerInstance& inst)
        : forest_(group.size()), t_(t), n_(static_cast<int>(group.size())), lam_(n_), out_lam_(n_), out_edge_(n_), dsu_(n_) {
        for (int v = 0; v < n_; ++v)
            if (group[v] >= 0 && inst.label[v] != kNoLabel) {
                lam_[v][group[v]] = inst.label[v];
                out_lam_[v].insert(group[v]);
            }
    }
    void send(int v, Outbox& out) override {
        if (t_.parent[v] < 0) return;
        if (!out_edge_[v].empty()) {
            auto e = out_edge_[v].front();
            out_edge_[v].pop_front();
            out.send_to(t_.parent[v], Message(kTagHelper, {e.first, e.second}));
        } else if (!out_lam_[v].empty()) {
            int u = *out_lam_[v].begin();
            out_lam_[v].erase(out_lam_[v].begin());
            out.send_to(t_.parent[v], Message(kTagLamU, {u, lam_[v].at(u)}));
        }
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in) {
            if (d.msg.tag == kTagLamU) {
                int u = d.msg.id(0), lab = d.msg.id(1);
                auto it = lam_[v].find(u);
                if (it == lam_[v].end()) {
                    lam_[v][u] = lab;
                    out_lam_[v].insert(u);
                } else {
                    add_edge(v, lab, it->second);
                }
            } else if (d.msg.tag == kTagHelper) {
                add_edge(v, d.msg.id(0), d.msg.id(1));
            }
        }
    }
    bool terminated(int v) const override {
        return t_.parent[v] < 0 || (out_edge_[v].empty() && out_lam_[v].empty());
    }

    std::vector<std::vector<std::pair<int, int>>> forest_;

private:
    void add_edge(int v, int a, int b) {
        if (!dsu_[v].unite(a, b)) return;
        auto e = std::minmax(a, b);
        forest_[v].push_back(e);
        out_edge_[v].push_back(e);
    }

    const BfsTree& t_;
    int n_;
    std::vector<std::map<int, int>> lam_;
    std::vector<std::set<int>> out_lam_;
    std::vector<std::deque<std::pair<int, int>>> out_edge_;
    std::vector<LabelDsu> dsu_;
};

}  // namespace

ReducedInstance build_reduced_instance(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst,
                                       const std::vector<int>& forest, const std::vector<int>& S) {
    const auto& g = inst.graph;
    const int n = g.n();
    ReducedInstance red;
    red.S = S;
    red.hop_cap = stage2_hop_cap(n);
    std::vector<char> in_f(g.m(), 0);
    for (int e : forest) in_f[e] = 1;

    std::vector<std::optional<BfSource>> src(n);
    for (int s : S) src[s] = BfSource{Q(0), s, true};
    auto bf = distributed_bellman_ford(
        sim, src, [&](int e) -> std::optional<Q> { return in_f[e] ? std::optional<Q>(Q(1)) : std::nullopt; },
        std::vector<char>(n, 1), red.hop_cap, nullptr, "stage2/groups");

    std::map<int, int> s_index;
    for (size_t i = 0; i < S.size(); ++i) s_index[S[i]] = static_cast<int>(i);
    red.group.assign(n, -1);
    red.T.assign(S.size(), {});
    for (int v = 0; v < n; ++v)
        if (inst.label[v] != kNoLabel && bf.reached[v]) {
            red.group[v] = bf.owner[v];
            red.T[s_index.at(bf.owner[v])].push_back(v);
        }
    for (int v = 0; v < n; ++v)
        if (red.group[v] < 0) red.residual.push_back(v);

    // S is known everywhere already (it was broadcast while building the tree)
    HelperProgram hp(tree, red.group, inst);
    sim.run("stage2/helper", hp);
    detect_termination(sim, tree, "stage2/helper");
    std::vector<Message> edges;
    for (auto [a, b] : hp.forest_[tree.root]) edges.push_back(Message(kTagHelper, {a, b}));
    auto known = broadcast_from_root(sim, tree, edges, "stage2/helper-broadcast");
    LabelDsu comp;
    for (int lab : inst.label_set()) comp.find(lab);
    for (const auto& m : known) {
        red.helper_edges.push_back({m.id(0), m.id(1)});
        comp.unite(m.id(0), m.id(1));
    }
    for (int lab : inst.label_set()) red.lambda_hat[lab] = comp.find(lab);

    // uncovered: terminals outside every T_v whose label class F leaves split
    auto sol = make_solution(inst, forest);
    std::map<int, std::set<int>> reps;
    for (int v = 0; v < n; ++v)
        if (inst.label[v] != kNoLabel) reps[inst.label[v]].insert(sol.component[v]);
    for (int v = 0; v < n; ++v)
        if (inst.label[v] != kNoLabel && red.group[v] < 0 && reps[inst.label[v]].size() > 1) ++red.uncovered;

    // the reduced graph
    std::vector<int> hat_of_s(S.size(), -1);
    std::vector<int> hat_label;
    for (size_t i = 0; i < S.size(); ++i)
        if (!red.T[i].empty()) {
            hat_of_s[i] = static_cast<int>(hat_label.size());
            hat_label.push_back(red.lambda_hat.at(inst.label[red.T[i].front()]));
        }
    red.node_of.assign(n, -1);
    for (int v = 0; v < n; ++v)
        if (red.group[v] >= 0) red.node_of[v] = hat_of_s[s_index.at(red.group[v])];
    for (int v : red.residual) {
        red.node_of[v] = static_cast<int>(hat_label.size());
        hat_label.push_back(kNoLabel);
    }
    const int nr = static_cast<int>(hat_label.size());
    std::map<std::pair<int, int>, std::pair<Weight, int>> best;
    for (int e = 0; e < g.m(); ++e) {
        auto [a, b] = std::minmax(red.node_of[g.edge(e).u], red.node_of[g.edge(e).v]);
        if (a == b) continue;
        auto key = std::make_pair(a, b);
        auto cand = std::make_pair(g.edge(e).w, e);
        auto it = best.find(key);
        if (it == best.end() || cand < it->second) best[key] = cand;
    }
    WeightedGraph rg(nr);
    for (const auto& [key, we] : best) {
        rg.add_edge(key.first, key.second, we.first);
        red.induced_by.push_back(we.second);
    }
    red.reduced = SteinerInstance::ic(std::move(rg), std::move(hat_label));
    return red;
}

std::map<int, int> reference_lambda_hat(const ReducedInstance& red, const SteinerInstance& inst) {
    LabelDsu d;
    for (int lab : inst.label_set()) d.find(lab);
    for (const auto& tv : red.T)
        for (size_t i = 1; i < tv.size(); ++i) d.unite(inst.label[tv[0]], inst.label[tv[i]]);
    std::map<int, int> out;
    for (int lab : inst.label_set()) out[lab] = d.find(lab);
    return out;
}

std::vector<int> stage2_solve(Simulator& sim, const BfsTree& tree, const ReducedInstance& red) {
    const auto& g = sim.graph();
    const int n = g.n();
    const auto& node_of = red.node_of;

    // neighbours swap reduced-node IDs, then every cross edge is reported by its smaller endpoint
    std::vector<std::vector<int>> ports(n);
    std::vector<Message> mine(n);
    for (int v = 0; v < n; ++v) {
        for (int p = 0; p < g.degree(v); ++p) ports[v].push_back(p);
        mine[v] = Message(kTagGroup, {node_of[v]});
    }
    auto heard = port_exchange(sim, ports, mine, "stage2/exchange");
    std::vector<std::vector<UpItem>> items(n);
    for (int v = 0; v < n; ++v)
        for (int p = 0; p < g.degree(v); ++p) {
            const auto& arc = g.adj(v)[p];
            int other = heard[v][p]->id(0);
            if (v > arc.to || other == node_of[v]) continue;
            auto [a, b] = std::minmax(node_of[v], other);
            items[v].push_back(UpItem{{Message(kTagRedEdge, {a, b, arc.w, arc.edge})}});
        }
    std::vector<std::set<std::pair<int, int>>> sent(n);
    std::vector<Message> at_root;
    UpcastHooks h;
    h.less = [](const UpItem& x, const UpItem& y) { return x.parts[0].ints < y.parts[0].ints; };
    h.forward = [&](int v, const UpItem& x) { return sent[v].insert({x.parts[0].id(0), x.parts[0].id(1)}).second; };
    h.at_root = [&](int v, const UpItem& x) {
        if (sent[v].insert({x.parts[0].id(0), x.parts[0].id(1)}).second) at_root.push_back(x.parts[0]);
        return false;
    };
    ordered_upcast(sim, tree, std::move(items), h, "stage2/gather");

    WeightedGraph rg(red.reduced.n());
    std::vector<int> induced;
    for (const auto& m : at_root) {
        rg.add_edge(m.id(0), m.id(1), m.at(2));
        induced.push_back(m.id(3));
    }
    if (induced != red.induced_by) throw std::logic_error("stage 2: gathered reduced graph differs");

    std::vector<Message> picks;
    auto minimal = minimalize_reference(SteinerInstance::ic(rg, red.reduced.label));
    if (minimal.t() > 0) {
        auto sol = moat_grow_exact(minimal).solution;
        for (int e : sol.edges) picks.push_back(Message(kTagPick, {induced[e]}));
    }
    std::vector<int> out;
    for (const auto& m : broadcast_from_root(sim, tree, picks, "stage2/broadcast")) out.push_back(m.id(0));
    std::sort(out.begin(), out.end());
    return out;
}

RandomizedResult full_randomized(const SteinerInstance& input, std::uint64_t seed, const RandomizedOptions& opt) {
    const auto& g = input.graph;
    const int n = g.n();
    if (!g.connected()) throw InvalidSpec("graph must be connected");
    auto metrics = all_pairs_shortest_paths(g);
    RandomizedResult res;
    res.mode = opt.mode ? *opt.mode
                        : (static_cast<double>(metrics.s) > std::sqrt(static_cast<double>(n)) ? TreeMode::Truncate
                                                                                               : TreeMode::Full);
    Simulator sim(g, opt.sim);
    auto tree = build_bfs_tree(sim);
    SteinerInstance inst = input;
    if (inst.kind == InstanceKind::CR) inst = transform_cr_to_ic(sim, tree, inst);
    inst = transform_to_minimal(sim, tree, inst);

    int log_n = 0;
    while ((1 << log_n) < n) ++log_n;
    const int reps = std::max(1, opt.repetition_factor * log_n);
    std::vector<VirtualTree> trees;
    for (int r = 0; r < reps; ++r) {
        RandomizedRep rep;
        rep.seed = mix_seed(seed, static_cast<std::uint64_t>(r));
        TreeOptions to;
        to.mode = res.mode;
        auto vt = build_virtual_tree(sim, tree, metrics.WD, rep.seed, to);
        auto s1 = stage1_select(sim, tree, vt, inst);
        rep.beta = vt.beta;
        rep.rank = vt.rank;
        rep.forest = s1.forest;
        rep.weight = total_weight(sim, tree, s1.forest, "stage1/weight");
        if (rep.weight != s1.weight) throw std::logic_error("stage 1: weight convergecast disagrees");
        rep.feasible = make_solution(inst, s1.forest).feasible;
        rep.tree_cost = virtual_tree_cost(g, vt.beta, vt.rank, inst);
        rep.relay = max_relay_multiplicity(vt);
        res.max_relay = std::max(res.max_relay, rep.relay);
        if (res.best < 0 || rep.weight < res.reps[res.best].weight) res.best = r;  // known at the root
        res.reps.push_back(std::move(rep));
        trees.push_back(std::move(vt));
    }
    broadcast_from_root(sim, tree, {Message(kTagPick, {res.best})}, "stage1/choice");
    res.stage1_forest = res.reps[res.best].forest;
    std::vector<int> all = res.stage1_forest;
    if (res.mode == TreeMode::Truncate) {
        const long long start = sim.round();
        auto red = build_reduced_instance(sim, tree, inst, res.stage1_forest, trees[res.best].S);
        res.uncovered = red.uncovered;
        res.stage2_edges = stage2_solve(sim, tree, red);
        res.stage2_rounds = sim.round() - start;
        all.insert(all.end(), res.stage2_edges.begin(), res.stage2_edges.end());
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
    }
    // routes of different destinations may close cycles; a minimum spanning
    // forest of the selection keeps its connectivity
    auto msf = spanning_forest(g, all);
    if (make_solution(inst, msf).feasible)
        res.solution = make_solution(input, minimal_subforest(msf, inst).edges);
    else
        res.solution = make_solution(input, msf);
    res.stats = sim.stats();
    return res;
}

}  // namespace steiner
