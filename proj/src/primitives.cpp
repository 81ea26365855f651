#include "steiner/primitives.hpp"

#include "steiner/errors.hpp"

#include <algorithm>
#include <deque>

namespace steiner {

int RootedForest::height() const {
    const int n = static_cast<int>(parent.size());
    int h = 0;
    for (int v = 0; v < n; ++v) {
        if (!member[v]) continue;
        int d = 0;
        for (int x = v; parent[x] >= 0; x = parent[x]) ++d;
        h = std::max(h, d);
    }
    return h;
}

namespace {

constexpr int kTagFlood = 1;
constexpr int kTagUp = 2;
constexpr int kTagDown = 3;
constexpr int kTagChild = 4;
constexpr int kTagBf = 5;

class NotifyProgram : public NodeProgram {
public:
    NotifyProgram(const std::vector<int>& parent, const std::vector<char>& member)
        : parent_(parent), member_(member), children_(parent.size()), done_(parent.size(), 0) {}
    void init(int v) override { done_[v] = !member_[v] || parent_[v] < 0; }
    void send(int v, Outbox& out) override {
        out.send_to(parent_[v], Message(kTagChild));
        done_[v] = 1;
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in)
            if (d.msg.tag == kTagChild) children_[v].push_back(d.from);
    }
    bool terminated(int v) const override { return done_[v]; }
private:
    const std::vector<int>& parent_;
    const std::vector<char>& member_;

public:
    std::vector<std::vector<int>> children_;

private:
    std::vector<char> done_;
};

class FloodProgram : public NodeProgram {
public:
    FloodProgram(Simulator& sim, const std::vector<std::int64_t>& key, const std::vector<char>& allowed, int hop_cap = 0)
        : sim_(sim), g_(sim.graph()), key_(key), allowed_(allowed), hop_cap_(hop_cap), start_(sim.round()), best_(key),
          parent_(sim.graph().n(), -1), hops_(sim.graph().n(), 0), dirty_(sim.graph().n(), 0) {}
    void init(int v) override { dirty_[v] = key_[v] >= 0; }
    void send(int v, Outbox& out) override {
        if (!dirty_[v]) return;
        Message m(kTagFlood, {best_[v], hops_[v]});
        const auto& adj = g_.adj(v);
        for (int p = 0; p < static_cast<int>(adj.size()); ++p)
            if (allowed_[adj[p].edge]) out.send(p, m);
        dirty_[v] = 0;
    }
    void receive(int v, const Inbox& in) override {
        if (key_[v] < 0) return;
        for (const auto& d : in) {
            if (d.msg.tag != kTagFlood) continue;
            std::int64_t k = d.msg.at(0);
            int h = d.msg.id(1) + 1;
            if (k > best_[v] || (k == best_[v] && h < hops_[v])) {
                best_[v] = k;
                hops_[v] = h;
                parent_[v] = d.from;
                dirty_[v] = 1;
            }
        }
    }
    bool terminated(int v) const override {
        if (hop_cap_ > 0) return sim_.round() - start_ >= hop_cap_;
        return !dirty_[v];
    }

    Simulator& sim_;
    const WeightedGraph& g_;
    const std::vector<std::int64_t>& key_;
    const std::vector<char>& allowed_;
    int hop_cap_;
    long long start_;
    std::vector<std::int64_t> best_;
    std::vector<int> parent_, hops_;
    std::vector<char> dirty_;
};

class DetectProgram : public NodeProgram {
public:
    explicit DetectProgram(const RootedForest& f)
        : f_(f), pending_(f.parent.size()), up_sent_(f.parent.size()), got_down_(f.parent.size()), down_sent_(f.parent.size()) {}
    void init(int v) override {
        pending_[v] = static_cast<int>(f_.children[v].size());
        if (f_.is_root(v) && pending_[v] == 0) got_down_[v] = 1;
    }
    void send(int v, Outbox& out) override {
        if (!f_.is_root(v) && pending_[v] == 0 && !up_sent_[v]) {
            out.send_to(f_.parent[v], Message(kTagUp));
            up_sent_[v] = 1;
        }
        if (got_down_[v] && !down_sent_[v]) {
            for (int c : f_.children[v]) out.send_to(c, Message(kTagDown));
            down_sent_[v] = 1;
        }
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in) {
            if (d.msg.tag == kTagUp) --pending_[v];
            if (d.msg.tag == kTagDown) got_down_[v] = 1;
        }
        if (f_.is_root(v) && pending_[v] == 0) got_down_[v] = 1;
    }
    bool terminated(int v) const override {
        if (!f_.member[v]) return true;
        return got_down_[v] && (down_sent_[v] || f_.children[v].empty());
    }

private:
    const RootedForest& f_;
    std::vector<int> pending_;
    std::vector<char> up_sent_, got_down_, down_sent_;
};

class BroadcastProgram : public NodeProgram {
public:
    BroadcastProgram(const RootedForest& f, const std::vector<std::vector<Message>>& at_root)
        : f_(f), at_root_(at_root), queue_(f.parent.size()), got_(f.parent.size()), finished_(f.parent.size()) {}
    void init(int v) override {
        if (!f_.is_root(v)) return;
        got_[v] = at_root_[v];
        for (const auto& m : at_root_[v]) queue_[v].push_back(m);
        queue_[v].push_back(Message(kTagDone));
        if (f_.children[v].empty()) finished_[v] = 1;
    }
    void send(int v, Outbox& out) override {
        if (queue_[v].empty()) return;
        Message m = std::move(queue_[v].front());
        queue_[v].pop_front();
        for (int c : f_.children[v]) out.send_to(c, m);
        if (m.tag == kTagDone) finished_[v] = 1;
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in) {
            if (d.from != f_.parent[v]) continue;
            if (d.msg.tag == kTagDone) {
                if (f_.children[v].empty()) finished_[v] = 1;
            } else {
                got_[v].push_back(d.msg);
            }
            if (!f_.children[v].empty()) queue_[v].push_back(d.msg);
        }
    }
    bool terminated(int v) const override { return !f_.member[v] || finished_[v]; }

    const RootedForest& f_;
    const std::vector<std::vector<Message>>& at_root_;
    std::vector<std::deque<Message>> queue_;
    std::vector<std::vector<Message>> got_;
    std::vector<char> finished_;
};

class ConvergeProgram : public NodeProgram {
public:
    using Combine = std::function<void(int, std::optional<Message>&, const Message&)>;
    ConvergeProgram(const RootedForest& f, const std::vector<std::optional<Message>>& value, const Combine& c)
        : f_(f), acc_(value), combine_(c), pending_(f.parent.size()), sent_(f.parent.size()) {}
    void init(int v) override { pending_[v] = static_cast<int>(f_.children[v].size()); }
    void send(int v, Outbox& out) override {
        if (f_.is_root(v) || pending_[v] > 0 || sent_[v]) return;
        out.send_to(f_.parent[v], acc_[v] ? *acc_[v] : Message(kTagDone));
        sent_[v] = 1;
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in) {
            if (std::find(f_.children[v].begin(), f_.children[v].end(), d.from) == f_.children[v].end()) continue;
            --pending_[v];
            if (d.msg.tag == kTagDone) continue;
            if (!acc_[v])
                acc_[v] = d.msg;
            else
                combine_(v, acc_[v], d.msg);
        }
    }
    bool terminated(int v) const override {
        if (!f_.member[v]) return true;
        return f_.is_root(v) ? pending_[v] == 0 : static_cast<bool>(sent_[v]);
    }

    const RootedForest& f_;
    std::vector<std::optional<Message>> acc_;
    const Combine& combine_;
    std::vector<int> pending_;
    std::vector<char> sent_;
};

class UpcastProgram : public NodeProgram {
public:
    UpcastProgram(const RootedForest& f, std::vector<std::vector<UpItem>> items, const UpcastHooks& h)
        : f_(f), h_(h), pending_(f.parent.size()), last_(f.parent.size()), child_done_(f.parent.size()),
          partial_(f.parent.size()), sending_(f.parent.size()), part_(f.parent.size(), 0), done_sent_(f.parent.size()),
          consumed_(f.parent.size()) {
        for (size_t v = 0; v < items.size(); ++v)
            for (auto& it : items[v]) insert(static_cast<int>(v), std::move(it));
    }

    void init(int v) override {
        const size_t k = f_.children[v].size();
        last_[v].assign(k, std::nullopt);
        child_done_[v].assign(k, 0);
        partial_[v].assign(k, {});
        if (f_.is_root(v)) consume(v);
    }

    void send(int v, Outbox& out) override {
        if (f_.is_root(v) || !f_.member[v]) return;
        if (!sending_[v]) {
            while (!pending_[v].empty() && eligible(v, pending_[v].front())) {
                UpItem x = std::move(pending_[v].front());
                pending_[v].erase(pending_[v].begin());
                if (h_.forward && !h_.forward(v, x)) continue;
                sending_[v] = std::move(x);
                part_[v] = 0;
                break;
            }
        }
        if (sending_[v]) {
            out.send_to(f_.parent[v], sending_[v]->parts.at(part_[v]));
            if (++part_[v] == h_.parts) sending_[v].reset();
            return;
        }
        if (pending_[v].empty() && all_children_done(v) && !done_sent_[v]) {
            out.send_to(f_.parent[v], Message(kTagDone));
            done_sent_[v] = 1;
        }
    }

    void receive(int v, const Inbox& in) override {
        for (const auto& d : in) {
            const auto& ch = f_.children[v];
            auto it = std::find(ch.begin(), ch.end(), d.from);
            if (it == ch.end()) continue;
            size_t c = static_cast<size_t>(it - ch.begin());
            if (d.msg.tag == kTagDone && partial_[v][c].empty()) {
                child_done_[v][c] = 1;
                continue;
            }
            partial_[v][c].push_back(d.msg);
            if (static_cast<int>(partial_[v][c].size()) < h_.parts) continue;
            UpItem item{std::move(partial_[v][c])};
            partial_[v][c].clear();
            STEINER_CHECK(!last_[v][c] || h_.less(*last_[v][c], item), "child items out of order");
            last_[v][c] = item;
            insert(v, std::move(item));
        }
        if (f_.is_root(v)) consume(v);
    }

    bool terminated(int v) const override {
        if (!f_.member[v]) return true;
        if (f_.is_root(v)) return pending_[v].empty() && all_children_done(v);
        return done_sent_[v];
    }
    bool halted() const override { return halted_; }

    std::vector<std::vector<UpItem>> consumed() { return std::move(consumed_); }

private:
    bool all_children_done(int v) const {
        return std::all_of(child_done_[v].begin(), child_done_[v].end(), [](char c) { return c != 0; });
    }
    bool eligible(int v, const UpItem& x) const {
        for (size_t c = 0; c < f_.children[v].size(); ++c) {
            if (child_done_[v][c]) continue;
            if (!last_[v][c] || h_.less(*last_[v][c], x)) return false;
        }
        return true;
    }
    void insert(int v, UpItem x) {
        auto& p = pending_[v];
        auto it = std::lower_bound(p.begin(), p.end(), x, h_.less);
        if (it != p.end() && !h_.less(x, *it)) {
            if (h_.combine) h_.combine(v, *it, x);
            return;
        }
        p.insert(it, std::move(x));
    }
    void consume(int v) {
        while (!halted_ && !pending_[v].empty() && eligible(v, pending_[v].front())) {
            UpItem x = std::move(pending_[v].front());
            pending_[v].erase(pending_[v].begin());
            consumed_[v].push_back(x);
            if (h_.at_root && h_.at_root(v, x)) halted_ = true;
        }
    }

    const RootedForest& f_;
    const UpcastHooks& h_;
    std::vector<std::vector<UpItem>> pending_;
    std::vector<std::vector<std::optional<UpItem>>> last_;
    std::vector<std::vector<char>> child_done_;
    std::vector<std::vector<std::vector<Message>>> partial_;
    std::vector<std::optional<UpItem>> sending_;
    std::vector<int> part_;
    std::vector<char> done_sent_;
    std::vector<std::vector<UpItem>> consumed_;
    bool halted_ = false;
};

struct BfKey {
    Q d;
    int owner;
    bool operator<(const BfKey& o) const { return d != o.d ? d < o.d : owner < o.owner; }
    bool operator==(const BfKey& o) const { return d == o.d && owner == o.owner; }
};

class BfProgram : public NodeProgram {
public:
    BfProgram(Simulator& sim, const std::vector<std::optional<BfSource>>& src,
              const std::function<std::optional<Q>(int)>& weight, const std::vector<char>& part, int hop_cap)
        : sim_(sim), g_(sim.graph()), src_(src), weight_(weight), part_(part), hop_cap_(hop_cap),
          start_(sim.round()), key_(g_.n()), dirty_(g_.n(), 0), heard_(g_.n()) {
        for (int v = 0; v < g_.n(); ++v) heard_[v].assign(g_.degree(v), std::nullopt);
    }
    void init(int v) override {
        if (part_[v] && src_[v]) {
            key_[v] = BfKey{src_[v]->dist, src_[v]->owner};
            dirty_[v] = 1;
        }
    }
    void send(int v, Outbox& out) override {
        if (!dirty_[v]) return;
        dirty_[v] = 0;
        Message m(kTagBf, {key_[v]->owner}, {key_[v]->d});
        const auto& adj = g_.adj(v);
        for (int p = 0; p < static_cast<int>(adj.size()); ++p)
            if (weight_(adj[p].edge)) out.send(p, m);
    }
    void receive(int v, const Inbox& in) override {
        if (!part_[v]) return;
        for (const auto& d : in) {
            if (d.msg.tag != kTagBf) continue;
            auto w = weight_(g_.adj(v)[d.port].edge);
            if (!w) continue;
            BfKey k{d.msg.rats.at(0), d.msg.id(0)};
            heard_[v][d.port] = k;
            if (src_[v] && src_[v]->pinned) continue;
            BfKey cand{k.d + *w, k.owner};
            if (!key_[v] || cand < *key_[v]) {
                key_[v] = cand;
                dirty_[v] = 1;
            }
        }
    }
    bool terminated(int v) const override {
        if (hop_cap_ > 0) return sim_.round() - start_ >= hop_cap_;
        return !dirty_[v];
    }

    Simulator& sim_;
    const WeightedGraph& g_;
    const std::vector<std::optional<BfSource>>& src_;
    const std::function<std::optional<Q>(int)>& weight_;
    const std::vector<char>& part_;
    int hop_cap_;
    long long start_;
    std::vector<std::optional<BfKey>> key_;
    std::vector<char> dirty_;
    std::vector<std::vector<std::optional<BfKey>>> heard_;
};

}  // namespace

RootedForest make_forest(Simulator& sim, std::vector<int> parent, std::vector<char> member, const std::string& stage) {
    NotifyProgram p(parent, member);
    sim.run(stage, p);
    RootedForest f;
    f.children = std::move(p.children_);
    f.parent = std::move(parent);
    f.member = std::move(member);
    return f;
}

void detect_termination(Simulator& sim, const RootedForest& t, const std::string& stage) {
    DetectProgram p(t);
    sim.run(stage, p);
}

FloodResult flood_max(Simulator& sim, const std::vector<std::int64_t>& key, const std::vector<char>& edge_allowed,
                      const RootedForest* detect, const std::string& stage, int hop_cap) {
    FloodProgram p(sim, key, edge_allowed, hop_cap);
    sim.run(stage, p);
    if (detect && hop_cap <= 0) detect_termination(sim, *detect, stage + "/detect");
    return FloodResult{std::move(p.best_), std::move(p.parent_), std::move(p.hops_)};
}

BfsTree build_bfs_tree(Simulator& sim) {
    const auto& g = sim.graph();
    const int n = g.n();
    if (n == 0) return {};
    std::vector<std::int64_t> key(n);
    for (int v = 0; v < n; ++v) key[v] = v;
    std::vector<char> all(g.m(), 1);
    FloodProgram p(sim, key, all);
    sim.run("bfs/flood", p);
    for (int v = 0; v < n; ++v)
        if (p.best_[v] != n - 1) throw DisconnectedGraph("graph is not connected");
    BfsTree t;
    static_cast<RootedForest&>(t) = make_forest(sim, p.parent_, std::vector<char>(n, 1), "bfs/children");
    t.root = n - 1;
    t.depth = p.hops_;
    t.max_depth = *std::max_element(t.depth.begin(), t.depth.end());
    detect_termination(sim, t, "bfs/detect");
    return t;
}

std::vector<std::vector<Message>> forest_broadcast(Simulator& sim, const RootedForest& f,
                                                   const std::vector<std::vector<Message>>& at_root,
                                                   const std::string& stage) {
    BroadcastProgram p(f, at_root);
    sim.run(stage, p);
    return std::move(p.got_);
}

std::vector<std::optional<Message>> forest_convergecast(
    Simulator& sim, const RootedForest& f, const std::vector<std::optional<Message>>& value,
    const std::function<void(int, std::optional<Message>&, const Message&)>& combine, const std::string& stage) {
    ConvergeProgram p(f, value, combine);
    sim.run(stage, p);
    const int n = static_cast<int>(f.parent.size());
    std::vector<std::optional<Message>> out(n);
    for (int v = 0; v < n; ++v)
        if (f.is_root(v)) out[v] = std::move(p.acc_[v]);
    return out;
}

std::vector<std::vector<UpItem>> ordered_upcast(Simulator& sim, const RootedForest& f,
                                                std::vector<std::vector<UpItem>> items, const UpcastHooks& hooks,
                                                const std::string& stage) {
    items.resize(f.parent.size());
    UpcastProgram p(f, std::move(items), hooks);
    sim.run(stage, p);
    return p.consumed();
}

BfResult distributed_bellman_ford(Simulator& sim, const std::vector<std::optional<BfSource>>& sources,
                                  const std::function<std::optional<Q>(int)>& weight,
                                  const std::vector<char>& participate, int hop_cap, const RootedForest* detect,
                                  const std::string& stage) {
    const auto& g = sim.graph();
    const int n = g.n();
    long long before = sim.round();
    BfProgram p(sim, sources, weight, participate, hop_cap);
    sim.run(stage, p);
    if (hop_cap <= 0 && detect) detect_termination(sim, *detect, stage + "/detect");
    BfResult r;
    r.reached.assign(n, 0);
    r.dist.assign(n, Q(0));
    r.owner.assign(n, -1);
    r.parent.assign(n, -1);
    for (int v = 0; v < n; ++v) {
        if (!p.key_[v]) continue;
        const BfKey& k = *p.key_[v];
        r.reached[v] = 1;
        r.dist[v] = k.d;
        r.owner[v] = k.owner;
        if (sources[v] && BfKey{sources[v]->dist, sources[v]->owner} == k) continue;
        const auto& adj = g.adj(v);
        for (int port = 0; port < static_cast<int>(adj.size()); ++port) {
            const auto& h = p.heard_[v][port];
            if (!h) continue;
            auto w = weight(adj[port].edge);
            if (h->owner == k.owner && h->d + *w == k.d) {
                r.parent[v] = adj[port].to;
                break;
            }
        }
        STEINER_CHECK(r.parent[v] >= 0, "Bellman-Ford value without a witness");
    }
    r.rounds = sim.round() - before;
    return r;
}

}  // namespace steiner
