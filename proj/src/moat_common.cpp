#include "moat_common.hpp"

#include "steiner/errors.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace steiner::detail {

void check_dist_input(const SteinerInstance& inst, TieBreak tie) {
    if (inst.kind != InstanceKind::IC) throw InvalidSpec("moat growing expects an input-component instance");
    if (!inst.is_minimal()) throw NotMinimalInstance("instance has a label with a single terminal");
    if (tie != TieBreak::Regional)
        throw InvalidSpec("the distributed algorithms order merges by candidate key; use the regional tie-break");
}

Message encode_candidate(const Candidate& c, int tag) {
    return Message(tag, {c.phase, c.v, c.w, c.x, c.y}, {c.what});
}

Candidate decode_candidate(const Message& m) {
    Candidate c;
    c.phase = m.id(0);
    c.v = m.id(1);
    c.w = m.id(2);
    c.x = m.id(3);
    c.y = m.id(4);
    c.what = m.rats.at(0);
    return c;
}

bool item_less(const UpItem& a, const UpItem& b) {
    return decode_candidate(a.parts[0]) < decode_candidate(b.parts[0]);
}

MoatBook::MoatBook(const std::vector<std::pair<int, int>>& terminal_labels) {
    for (const auto& [v, lab] : terminal_labels) {
        int ti = static_cast<int>(term_.size());
        term_.push_back(v);
        index_[v] = ti;
        orig_label_.push_back(lab);
        moat_.push_back(ti);
        active_[ti] = 1;
        label_[ti] = lab;
    }
    STEINER_CHECK(std::is_sorted(term_.begin(), term_.end()), "terminal list must be sorted");
}

bool MoatBook::any_active() const {
    for (const auto& [r, a] : active_)
        if (a) return true;
    return false;
}

std::vector<char> MoatBook::activity() const {
    std::vector<char> a(term_.size());
    for (int ti = 0; ti < t(); ++ti) a[ti] = active(ti);
    return a;
}

std::vector<char> MoatBook::activity_by_node(int n) const {
    std::vector<char> a(n, 0);
    for (int ti = 0; ti < t(); ++ti) a[term_[ti]] = active(ti);
    return a;
}

std::vector<int> MoatBook::members(int r) const {
    std::vector<int> out;
    for (int ti = 0; ti < t(); ++ti)
        if (moat_[ti] == r) out.push_back(ti);
    return out;
}

int MoatBook::count_label(int lab) const {
    int c = 0;
    for (const auto& [r, l] : label_) c += l == lab ? 1 : 0;
    return c;
}

int MoatBook::merge(int node_v, int node_w) {
    int rv = rep(index(node_v)), rw = rep(index(node_w));
    STEINER_CHECK(rv != rw, "merging a moat with itself");
    int lv = label_.at(rv), lw = label_.at(rw);
    int nr = std::min(rv, rw);
    for (auto& r : moat_)
        if (r == rv || r == rw) r = nr;
    active_.erase(rv);
    active_.erase(rw);
    label_.erase(rv);
    label_.erase(rw);
    for (auto& [r, l] : label_)
        if (l == lw) l = lv;
    label_[nr] = lv;
    active_[nr] = 1;
    return nr;
}

void MoatBook::refresh(int r) { active_[r] = count_label(label_.at(r)) > 1 ? 1 : 0; }

void MoatBook::refresh_all() {
    for (auto& [r, a] : active_) a = count_label(label_.at(r)) > 1 ? 1 : 0;
}

Territory::Territory(const WeightedGraph& g, const std::vector<int>& terminals)
    : owner(g.n(), -1), rparent(g.n(), -1), claim(g.m(), {Q(0), Q(0)}) {
    for (int v : terminals) owner[v] = v;
}

namespace {

class ExchangeProgram : public NodeProgram {
public:
    ExchangeProgram(const WeightedGraph& g, const std::vector<Message>& out) : g_(g), out_(out), got_(g.n()), done_(g.n(), 0) {
        for (int v = 0; v < g.n(); ++v) got_[v].resize(g.degree(v));
    }
    void send(int v, Outbox& out) override {
        out.send_all(out_[v]);
        done_[v] = 1;
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in) got_[v][d.port] = d.msg;
    }
    bool terminated(int v) const override { return done_[v] || g_.degree(v) == 0; }

    const WeightedGraph& g_;
    const std::vector<Message>& out_;
    std::vector<std::vector<Message>> got_;
    std::vector<char> done_;
};

class TokenProgram : public NodeProgram {
public:
    TokenProgram(const std::vector<int>& rparent, std::vector<char> start)
        : rparent_(rparent), has_(std::move(start)), fwd_(rparent.size(), 0) {}
    void send(int v, Outbox& out) override {
        if (rparent_[v] >= 0) out.send_to(rparent_[v], Message(kTagToken));
        fwd_[v] = 1;
    }
    void receive(int v, const Inbox& in) override {
        if (!in.empty()) has_[v] = 1;
    }
    bool terminated(int v) const override { return !has_[v] || fwd_[v]; }

    const std::vector<int>& rparent_;
    std::vector<char> has_, fwd_;
};

}  // namespace

PhaseDecomp decompose_phase(Simulator& sim, const BfsTree& tree, const Territory& terr,
                            const std::vector<char>& active_node, int j, const std::string& stage) {
    const auto& g = sim.graph();
    const int n = g.n();
    std::vector<std::optional<BfSource>> src(n);
    std::vector<char> part(n, 0);
    for (int u = 0; u < n; ++u) {
        int o = terr.owner[u];
        if (o < 0) {
            part[u] = 1;
        } else if (active_node[o]) {
            part[u] = 1;
            src[u] = BfSource{Q(0), o, true};
        }
    }
    auto weight = [&](int e) -> std::optional<Q> { return terr.reduced(g, e); };
    auto bf = distributed_bellman_ford(sim, src, weight, part, 0, &tree, stage + "/bf");

    PhaseDecomp pd;
    pd.status.assign(n, NodeStatus::Unassigned);
    pd.dist.assign(n, Q(0));
    pd.cell_owner.assign(n, -1);
    pd.cparent.assign(n, -1);
    pd.nbr.resize(n);
    pd.cands.resize(n);
    std::vector<Message> out(n);
    for (int u = 0; u < n; ++u) {
        int o = terr.owner[u];
        if (o >= 0) {
            pd.status[u] = active_node[o] ? NodeStatus::ActiveRegion : NodeStatus::InactiveRegion;
            if (active_node[o]) pd.cell_owner[u] = o;
        } else if (bf.reached[u]) {
            pd.status[u] = NodeStatus::Cell;
            pd.dist[u] = bf.dist[u];
            pd.cell_owner[u] = bf.owner[u];
        }
        int shown = pd.status[u] == NodeStatus::InactiveRegion ? o : pd.cell_owner[u];
        out[u] = Message(kTagExchange, {static_cast<int>(pd.status[u]), shown}, {pd.dist[u]});
    }
    ExchangeProgram ex(g, out);
    sim.run(stage + "/exchange", ex);

    for (int u = 0; u < n; ++u) {
        const auto& adj = g.adj(u);
        pd.nbr[u].resize(adj.size());
        for (size_t p = 0; p < adj.size(); ++p) {
            const Message& m = ex.got_[u][p];
            pd.nbr[u][p] = NbrInfo{static_cast<NodeStatus>(m.id(0)), m.id(1), m.rats.at(0)};
        }
        auto su = pd.status[u];
        if (su == NodeStatus::Cell) {
            for (size_t p = 0; p < adj.size(); ++p) {
                const auto& nb = pd.nbr[u][p];
                if (nb.status != NodeStatus::ActiveRegion && nb.status != NodeStatus::Cell) continue;
                if (nb.owner == pd.cell_owner[u] && nb.d + terr.reduced(g, adj[p].edge) == pd.dist[u]) {
                    pd.cparent[u] = adj[p].to;
                    break;
                }
            }
            STEINER_CHECK(pd.cparent[u] >= 0, "cell node without parent");
        }
        if (su != NodeStatus::ActiveRegion && su != NodeStatus::Cell) continue;
        for (size_t p = 0; p < adj.size(); ++p) {
            const auto& nb = pd.nbr[u][p];
            if (nb.status == NodeStatus::Unassigned || nb.owner == pd.cell_owner[u]) continue;
            Q dx = su == NodeStatus::Cell ? pd.dist[u] : Q(0);
            std::optional<Q> dy;
            if (nb.status != NodeStatus::InactiveRegion) dy = nb.d;
            pd.cands[u].push_back(make_candidate(pd.cell_owner[u], nb.owner, j,
                                                 candidate_weight(dx, dy, terr.reduced(g, adj[p].edge)), u,
                                                 adj[p].to));
        }
        std::sort(pd.cands[u].begin(), pd.cands[u].end());
        pd.cands[u].erase(std::unique(pd.cands[u].begin(), pd.cands[u].end()), pd.cands[u].end());
    }
    return pd;
}

void end_phase_local(const WeightedGraph& g, Territory& terr, const PhaseDecomp& pd, const Q& growth) {
    std::vector<std::array<Q, 2>> ext(g.m(), {Q(0), Q(0)});
    for (int e = 0; e < g.m(); ++e) {
        const auto& ed = g.edge(e);
        for (int side = 0; side < 2; ++side) {
            int x = side == 0 ? ed.u : ed.v;
            int y = ed.other(x);
            auto sx = pd.status[x], sy = pd.status[y];
            if (sx != NodeStatus::ActiveRegion && sx != NodeStatus::Cell) continue;
            STEINER_CHECK(sy != NodeStatus::Unassigned, "assigned node next to an unreached one");
            Q dx = sx == NodeStatus::Cell ? pd.dist[x] : Q(0);
            std::optional<Q> dy;
            if (sy != NodeStatus::InactiveRegion) dy = pd.dist[y];
            ext[e][side] = claim_extension(dx, dy, terr.reduced(g, e), growth);
        }
    }
    for (int e = 0; e < g.m(); ++e) {
        terr.claim[e][0] += ext[e][0];
        terr.claim[e][1] += ext[e][1];
        STEINER_CHECK(terr.claim[e][0] + terr.claim[e][1] <= Q(g.edge(e).w), "claims exceed edge weight");
    }
    for (int u = 0; u < g.n(); ++u) {
        if (pd.status[u] != NodeStatus::Cell || pd.dist[u] > growth) continue;
        terr.owner[u] = pd.cell_owner[u];
        terr.rparent[u] = pd.cparent[u];
    }
}

std::vector<Candidate> minimal_candidates(const std::vector<Candidate>& fc, const MoatBook& book) {
    const int t = book.t();
    std::vector<std::vector<std::pair<int, int>>> adj(t);  // (neighbor, candidate index)
    for (int i = 0; i < static_cast<int>(fc.size()); ++i) {
        int a = book.index(fc[i].v), b = book.index(fc[i].w);
        adj[a].push_back({b, i});
        adj[b].push_back({a, i});
    }
    std::map<int, int> lab_index;
    for (int ti = 0; ti < t; ++ti) lab_index.emplace(book.original_label(ti), static_cast<int>(lab_index.size()));
    const int k = static_cast<int>(lab_index.size());
    std::vector<std::vector<int>> sub(t, std::vector<int>(k, 0));
    std::vector<int> parent(t, -2), via(t, -1), order;
    std::vector<char> keep(fc.size(), 0);
    for (int root = 0; root < t; ++root) {
        if (parent[root] != -2) continue;
        order.clear();
        parent[root] = -1;
        std::vector<int> stack{root};
        while (!stack.empty()) {
            int a = stack.back();
            stack.pop_back();
            order.push_back(a);
            for (auto [b, i] : adj[a]) {
                if (b == parent[a] && via[a] == i) continue;
                STEINER_CHECK(parent[b] == -2, "F_c contains a cycle");
                parent[b] = a;
                via[b] = i;
                stack.push_back(b);
            }
        }
        std::vector<int> total(k, 0);
        for (int a : order) total[lab_index[book.original_label(a)]]++;
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int a = *it;
            sub[a][lab_index[book.original_label(a)]]++;
            if (parent[a] < 0) continue;
            for (int l = 0; l < k; ++l) {
                if (sub[a][l] > 0 && sub[a][l] < total[l]) keep[via[a]] = 1;
                sub[parent[a]][l] += sub[a][l];
            }
        }
    }
    std::vector<Candidate> out;
    for (size_t i = 0; i < fc.size(); ++i)
        if (keep[i]) out.push_back(fc[i]);
    return out;
}

std::vector<int> materialize_paths(Simulator& sim, const Territory& terr, const std::vector<Candidate>& keep,
                                   const std::string& stage) {
    const auto& g = sim.graph();
    std::vector<char> start(g.n(), 0);
    std::set<int> edges;
    for (const auto& c : keep) {
        start[c.x] = start[c.y] = 1;
        edges.insert(g.edge_id(c.x, c.y));
    }
    TokenProgram p(terr.rparent, start);
    sim.run(stage, p);
    for (int u = 0; u < g.n(); ++u)
        if (p.fwd_[u] && terr.rparent[u] >= 0) edges.insert(g.edge_id(u, terr.rparent[u]));
    return {edges.begin(), edges.end()};
}

std::vector<Message> broadcast_from_root(Simulator& sim, const BfsTree& tree, const std::vector<Message>& items,
                                         const std::string& stage) {
    std::vector<std::vector<Message>> at_root(sim.graph().n());
    at_root[tree.root] = items;
    auto got = forest_broadcast(sim, tree, at_root, stage);
    for (const auto& l : got) STEINER_CHECK(l.size() == items.size(), "broadcast did not reach every node");
    return got[tree.root];
}

std::vector<Message> gather_everywhere(Simulator& sim, const BfsTree& tree, std::vector<std::vector<Message>> items,
                                       const std::function<bool(const Message&, const Message&)>& less,
                                       const std::string& stage) {
    std::vector<std::vector<UpItem>> up(items.size());
    for (size_t v = 0; v < items.size(); ++v)
        for (auto& m : items[v]) up[v].push_back(UpItem{{std::move(m)}});
    UpcastHooks h;
    h.less = [&](const UpItem& a, const UpItem& b) { return less(a.parts[0], b.parts[0]); };
    auto at = ordered_upcast(sim, tree, std::move(up), h, stage + "/gather");
    std::vector<Message> all;
    for (auto& it : at[tree.root]) all.push_back(std::move(it.parts[0]));
    return broadcast_from_root(sim, tree, all, stage + "/broadcast");
}

}  // namespace steiner::detail
