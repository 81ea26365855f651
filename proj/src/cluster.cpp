#include "cluster.hpp"

#include "moat_common.hpp"
#include "steiner/errors.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <map>

namespace steiner::detail {

namespace {

class PortExchange : public NodeProgram {
public:
    PortExchange(const WeightedGraph& g, const std::vector<std::vector<int>>& ports, const std::vector<Message>& msg)
        : ports_(ports), msg_(msg), got_(g.n()), done_(g.n(), 0) {
        for (int v = 0; v < g.n(); ++v) got_[v].resize(g.degree(v));
    }
    void send(int v, Outbox& out) override {
        for (int p : ports_[v])
            if (out.port_free(p)) out.send(p, msg_[v]);
        done_[v] = 1;
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in) got_[v][d.port] = d.msg;
    }
    bool terminated(int v) const override { return done_[v] || ports_[v].empty(); }

    const std::vector<std::vector<int>>& ports_;
    const std::vector<Message>& msg_;
    std::vector<std::vector<std::optional<Message>>> got_;
    std::vector<char> done_;
};

class PortSend : public NodeProgram {
public:
    PortSend(const WeightedGraph& g, const std::vector<std::vector<std::pair<int, Message>>>& out)
        : out_(out), got_(g.n()), done_(g.n(), 0) {
        for (int v = 0; v < g.n(); ++v) got_[v].resize(g.degree(v));
    }
    void send(int v, Outbox& out) override {
        for (const auto& [p, m] : out_[v]) out.send(p, m);
        done_[v] = 1;
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in) got_[v][d.port] = d.msg;
    }
    bool terminated(int v) const override { return done_[v] || out_[v].empty(); }

    const std::vector<std::vector<std::pair<int, Message>>>& out_;
    std::vector<std::vector<std::optional<Message>>> got_;
    std::vector<char> done_;
};

// Upward phase of the tree routine followed by the downward unmarking.
class SelectProgram : public NodeProgram {
public:
    SelectProgram(const RootedForest& f, const std::vector<std::set<int>>& labels)
        : f_(f), own_(labels), n_(static_cast<int>(f.parent.size())), pending_(n_), sent_(n_), from_(n_),
          children_done_(n_, 0), done_sent_(n_, 0) {
        for (int v = 0; v < n_; ++v)
            if (f_.member[v] && !f_.is_root(v)) pending_[v] = own_[v];
    }
    void send(int v, Outbox& out) override {
        if (!pending_[v].empty()) {
            int lab = *pending_[v].begin();
            pending_[v].erase(pending_[v].begin());
            sent_[v].insert(lab);
            out.send_to(f_.parent[v], Message(kTagMark, {lab}));
            return;
        }
        if (children_done_[v] == static_cast<int>(f_.children[v].size()) && !done_sent_[v]) {
            out.send_to(f_.parent[v], Message(kTagDone));
            done_sent_[v] = 1;
        }
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in) {
            if (d.msg.tag == kTagDone) {
                ++children_done_[v];
                continue;
            }
            int lab = d.msg.id(0);
            from_[v][lab].push_back(d.from);
            if (!f_.is_root(v) && !sent_[v].count(lab)) pending_[v].insert(lab);
        }
    }
    bool terminated(int v) const override {
        if (!f_.member[v]) return true;
        if (f_.is_root(v)) return children_done_[v] == static_cast<int>(f_.children[v].size());
        return done_sent_[v];
    }

    const RootedForest& f_;
    const std::vector<std::set<int>>& own_;
    int n_;
    std::vector<std::set<int>> pending_, sent_;
    std::vector<std::map<int, std::vector<int>>> from_;  // label -> children that sent it
    std::vector<int> children_done_;
    std::vector<char> done_sent_;
};

class UnmarkProgram : public NodeProgram {
public:
    explicit UnmarkProgram(const SelectProgram& up)
        : up_(up), f_(up.f_), n_(up.n_), queue_(n_), got_done_(n_, 0), unmarked_(n_) {}
    void init(int v) override {
        queue_[v].resize(f_.children[v].size());
        if (!f_.member[v] || !f_.is_root(v)) return;
        for (const auto& [lab, kids] : up_.from_[v]) release(v, lab);
        finish(v);
    }
    void send(int v, Outbox& out) override {
        const auto& ch = f_.children[v];
        for (size_t c = 0; c < ch.size(); ++c) {
            if (queue_[v][c].empty()) continue;
            out.send_to(ch[c], Message(queue_[v][c].front() < 0 ? kTagDone : kTagMark,
                                       queue_[v][c].front() < 0 ? std::vector<std::int64_t>{}
                                                                : std::vector<std::int64_t>{queue_[v][c].front()}));
            queue_[v][c].pop_front();
        }
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in) {
            if (d.from != f_.parent[v]) continue;
            if (d.msg.tag == kTagDone) {
                finish(v);
                continue;
            }
            int lab = d.msg.id(0);
            unmarked_[v].insert(lab);
            release(v, lab);
        }
    }
    bool terminated(int v) const override {
        if (!f_.member[v]) return true;
        if (!got_done_[v]) return false;
        for (const auto& q : queue_[v])
            if (!q.empty()) return false;
        return true;
    }

    // The part above v no longer needs `lab`; pass the unmark on if v's
    // subtree holds a single carrier branch and v is no carrier itself.
    void release(int v, int lab) {
        auto it = up_.from_[v].find(lab);
        int kids = it == up_.from_[v].end() ? 0 : static_cast<int>(it->second.size());
        if (kids >= 2 || up_.own_[v].count(lab) || kids == 0) return;
        int c = it->second.front();
        auto& ch = f_.children[v];
        size_t idx = static_cast<size_t>(std::find(ch.begin(), ch.end(), c) - ch.begin());
        queue_[v][idx].push_back(lab);
    }
    void finish(int v) {
        for (auto& q : queue_[v]) q.push_back(-1);
        got_done_[v] = 1;
    }

    const SelectProgram& up_;
    const RootedForest& f_;
    int n_;
    std::vector<std::vector<std::deque<int>>> queue_;
    std::vector<char> got_done_;
    std::vector<std::set<int>> unmarked_;
};

}  // namespace

std::vector<std::vector<std::optional<Message>>> port_exchange(Simulator& sim,
                                                               const std::vector<std::vector<int>>& ports,
                                                               const std::vector<Message>& msg,
                                                               const std::string& stage) {
    PortExchange p(sim.graph(), ports, msg);
    sim.run(stage, p);
    return std::move(p.got_);
}

ClusterView form_clusters(Simulator& sim, const RootedForest& detect, const std::vector<char>& member,
                          const std::vector<char>& edge_in, const std::string& stage) {
    const int n = sim.graph().n();
    std::vector<std::int64_t> key(n, -1);
    for (int v = 0; v < n; ++v)
        if (member[v]) key[v] = v;
    auto fl = flood_max(sim, key, edge_in, &detect, stage + "/flood");
    ClusterView view;
    view.tree = make_forest(sim, fl.parent, member, stage + "/tree");
    view.leader.assign(n, -1);
    for (int v = 0; v < n; ++v)
        if (member[v]) view.leader[v] = static_cast<int>(fl.best[v]);
    view.hops = fl.hops;
    std::vector<std::optional<Message>> one(n);
    for (int v = 0; v < n; ++v)
        if (member[v]) one[v] = Message(kTagState, {1});
    auto cnt = forest_convergecast(
        sim, view.tree, one, [](int, std::optional<Message>& acc, const Message& m) { acc->ints[0] += m.at(0); },
        stage + "/size");
    std::vector<std::vector<Message>> at_root(n);
    for (int v = 0; v < n; ++v)
        if (view.tree.is_root(v)) at_root[v] = {*cnt[v]};
    auto got = forest_broadcast(sim, view.tree, at_root, stage + "/size-broadcast");
    view.size.assign(n, 0);
    for (int v = 0; v < n; ++v) {
        if (!member[v]) continue;
        view.size[v] = view.tree.is_root(v) ? cnt[v]->id(0) : got[v].at(0).id(0);
    }
    return view;
}

Links make_links(Simulator& sim, const std::vector<int>& up_port, const std::string& stage) {
    const auto& g = sim.graph();
    const int n = g.n();
    std::vector<std::vector<int>> ports(n);
    std::vector<Message> msg(n, Message(kTagPropose));
    for (int v = 0; v < n; ++v)
        if (up_port[v] >= 0) ports[v] = {up_port[v]};
    auto got = port_exchange(sim, ports, msg, stage);
    Links l;
    l.up = up_port;
    l.down.resize(n);
    for (int v = 0; v < n; ++v)
        for (int p = 0; p < g.degree(v); ++p)
            if (got[v][p]) l.down[v].push_back(p);
    return l;
}

VirtualOut virtual_round(Simulator& sim, const ClusterView& view, const Links& links,
                         const std::vector<Message>& leader_state, const Combine& combine_down,
                         const std::string& stage) {
    const int n = sim.graph().n();
    std::vector<std::vector<Message>> at_root(n);
    for (int v = 0; v < n; ++v)
        if (view.tree.is_root(v)) at_root[v] = {leader_state[v]};
    auto got = forest_broadcast(sim, view.tree, at_root, stage + "/down");
    std::vector<Message> state(n);
    std::vector<std::vector<int>> ports(n);
    for (int v = 0; v < n; ++v) {
        if (view.leader[v] < 0) continue;
        state[v] = view.tree.is_root(v) ? leader_state[v] : got[v].at(0);
        if (links.up[v] >= 0) ports[v].push_back(links.up[v]);
        for (int p : links.down[v])
            if (p != links.up[v]) ports[v].push_back(p);
    }
    auto across = port_exchange(sim, ports, state, stage + "/across");
    std::vector<std::optional<Message>> upv(n), downv(n);
    for (int v = 0; v < n; ++v) {
        if (view.leader[v] < 0) continue;
        if (links.up[v] >= 0) upv[v] = across[v][links.up[v]];
        for (int p : links.down[v]) {
            if (!across[v][p]) continue;
            if (!downv[v])
                downv[v] = across[v][p];
            else
                combine_down(v, downv[v], *across[v][p]);
        }
    }
    auto pick_one = [](int, std::optional<Message>&, const Message&) {
        throw InvariantViolation("a cluster with two chosen links");
    };
    VirtualOut out;
    out.across_up = forest_convergecast(sim, view.tree, upv, pick_one, stage + "/up-a");
    out.across_down = forest_convergecast(sim, view.tree, downv, combine_down, stage + "/up-b");
    return out;
}

namespace {

// State layout used by the matching: leader, small, vchild, color, matched, propose, accepted.
enum Field { kLeader, kSmall, kVchild, kColor, kMatched, kPropose, kAccepted, kFields };

}  // namespace

MatchingOut cluster_matching(Simulator& sim, const ClusterView& view, const Links& links,
                             const std::vector<char>& small_at_leader, const std::string& stage) {
    const int n = sim.graph().n();
    std::vector<int> leaders;
    for (int v = 0; v < n; ++v)
        if (view.tree.is_root(v)) leaders.push_back(v);
    std::vector<std::array<std::int64_t, kFields>> st(n);
    for (int r : leaders) {
        st[r].fill(0);
        st[r][kLeader] = r;
        st[r][kSmall] = small_at_leader[r];
        st[r][kColor] = r;
        st[r][kAccepted] = -1;
    }
    MatchingOut out;
    out.own_link_matched.assign(n, 0);
    out.partner.assign(n, -1);
    int round_no = 0;
    auto message_of = [&](int r) {
        std::vector<std::int64_t> f(st[r].begin(), st[r].end());
        return Message(kTagState, f);
    };
    // children that propose: keep the smallest proposer
    Combine min_proposer = [](int, std::optional<Message>& acc, const Message& m) {
        bool a = acc->at(kVchild) && acc->at(kPropose);
        bool b = m.at(kVchild) && m.at(kPropose);
        if (b && (!a || m.at(kLeader) < acc->at(kLeader))) acc = m;
    };
    auto vround = [&]() {
        std::vector<Message> s(n);
        for (int r : leaders) s[r] = message_of(r);
        ++round_no;
        ++out.virtual_rounds;
        return virtual_round(sim, view, links, s, min_proposer, stage + "/v" + std::to_string(round_no));
    };

    // who is whose virtual parent
    std::vector<int> vparent(n, -1);
    {
        Combine keep_first = [](int, std::optional<Message>&, const Message&) {};
        std::vector<Message> s(n);
        for (int r : leaders) {
            // target leader is learnt in this very round; send own leader and smallness
            s[r] = Message(kTagState, {r, small_at_leader[r], -1});
        }
        ++round_no;
        ++out.virtual_rounds;
        auto first = virtual_round(sim, view, links, s, keep_first, stage + "/v" + std::to_string(round_no));
        // second round tells each cluster where its target's link points
        std::vector<int> target(n, -1);
        for (int r : leaders)
            if (first.across_up[r]) target[r] = first.across_up[r]->id(0);
        for (int r : leaders) s[r] = Message(kTagState, {r, small_at_leader[r], target[r]});
        ++round_no;
        ++out.virtual_rounds;
        auto second = virtual_round(sim, view, links, s, keep_first, stage + "/v" + std::to_string(round_no));
        for (int r : leaders) {
            if (!second.across_up[r] || !small_at_leader[r]) continue;
            const Message& d = *second.across_up[r];
            int D = d.id(0);
            bool mutual = d.id(2) == r;
            if (d.at(1) && !(mutual && r < D)) vparent[r] = D;
        }
        for (int r : leaders) st[r][kVchild] = vparent[r] >= 0;
    }

    auto parent_color = [&](const VirtualOut& vo, int r) -> std::optional<std::int64_t> {
        if (vparent[r] < 0) return std::nullopt;
        return vo.across_up[r]->at(kColor);
    };

    // Cole-Vishkin colour reduction from IDs
    std::int64_t bound = n;
    while (bound > 6) {
        auto vo = vround();
        for (int r : leaders) {
            std::int64_t own = st[r][kColor];
            auto pc = parent_color(vo, r);
            int i = pc ? std::countr_zero(static_cast<std::uint64_t>(own ^ *pc)) : 0;
            st[r][kColor] = 2 * i + ((own >> i) & 1);
        }
        int bits = std::bit_width(static_cast<std::uint64_t>(bound - 1));
        bound = 2 * bits;
    }
    // shift down and recolour 5, 4, 3 into {0, 1, 2}
    for (int c = 5; c >= 3; --c) {
        std::vector<std::int64_t> old(n, 0);
        auto vo = vround();
        for (int r : leaders) {
            old[r] = st[r][kColor];
            auto pc = parent_color(vo, r);
            if (pc) {
                st[r][kColor] = *pc;
            } else {
                st[r][kColor] = old[r] == 0 ? 1 : 0;
            }
        }
        auto vo2 = vround();
        for (int r : leaders) {
            if (st[r][kColor] != c) continue;
            auto pc = parent_color(vo2, r);
            for (int x = 0; x < 3; ++x)
                if ((!pc || *pc != x) && old[r] != x) {
                    st[r][kColor] = x;
                    break;
                }
        }
    }
    for (int r : leaders) STEINER_CHECK(st[r][kColor] >= 0 && st[r][kColor] < 3, "colour reduction failed");

    // one proposal sweep per colour
    for (int c = 0; c < 3; ++c) {
        auto vo = vround();  // learn whether the parent is matched
        for (int r : leaders) {
            st[r][kPropose] = 0;
            if (st[r][kColor] != c || st[r][kMatched] || vparent[r] < 0) continue;
            if (!vo.across_up[r]->at(kMatched)) st[r][kPropose] = 1;
        }
        auto vo2 = vround();  // parents pick the smallest proposer
        for (int r : leaders) {
            st[r][kAccepted] = -1;
            const auto& ch = vo2.across_down[r];
            if (st[r][kMatched] || !ch || !ch->at(kVchild) || !ch->at(kPropose)) continue;
            st[r][kMatched] = 1;
            st[r][kAccepted] = ch->at(kLeader);
            out.partner[r] = ch->id(kLeader);
        }
        auto vo3 = vround();  // proposers learn the answer
        for (int r : leaders) {
            if (!st[r][kPropose]) continue;
            st[r][kPropose] = 0;
            if (vo3.across_up[r]->at(kAccepted) == r) {
                st[r][kMatched] = 1;
                out.own_link_matched[r] = 1;
                out.partner[r] = vparent[r];
            }
        }
    }
    return out;
}

std::vector<char> tree_select(Simulator& sim, const RootedForest& f, const std::vector<std::set<int>>& labels,
                              const std::string& stage) {
    SelectProgram up(f, labels);
    sim.run(stage + "/mark", up);
    UnmarkProgram down(up);
    sim.run(stage + "/unmark", down);
    const int n = static_cast<int>(f.parent.size());
    std::vector<char> keep(n, 0);
    for (int v = 0; v < n; ++v) {
        if (!f.member[v] || f.is_root(v)) continue;
        for (int lab : up.sent_[v])
            if (!down.unmarked_[v].count(lab)) keep[v] = 1;
    }
    return keep;
}

std::vector<std::vector<std::optional<Message>>> port_send(Simulator& sim,
                                                           const std::vector<std::vector<std::pair<int, Message>>>& out,
                                                           const std::string& stage) {
    PortSend p(sim.graph(), out);
    sim.run(stage, p);
    return std::move(p.got_);
}

}  // namespace steiner::detail
