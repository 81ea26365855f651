#include "doctest.h"

#include "steiner/congest.hpp"
#include "steiner/dsu.hpp"
#include "steiner/errors.hpp"
#include "steiner/primitives.hpp"
#include "test_util.hpp"

#include <map>
#include <queue>
#include <set>
#include <sstream>

using namespace steiner;
using steiner::testing::make_graph;

namespace {

// Token flood: a node terminates once it holds the token and has passed it on.
class TokenFlood : public NodeProgram {
public:
    TokenFlood(const WeightedGraph& g, int src) : g_(g), has_(g.n(), 0), fwd_(g.n(), 0), from_(g.n()) { has_[src] = 1; }
    void send(int v, Outbox& out) override {
        if (!has_[v] || fwd_[v]) return;
        const auto& adj = g_.adj(v);
        for (int p = 0; p < static_cast<int>(adj.size()); ++p)
            if (!from_[v].count(adj[p].to)) out.send(p, Message(1));
        fwd_[v] = 1;
    }
    void receive(int v, const Inbox& in) override {
        for (const auto& d : in) {
            if (!has_[v]) from_[v].insert(d.from);
            else if (!fwd_[v]) from_[v].insert(d.from);
        }
        if (!in.empty()) has_[v] = 1;
    }
    bool terminated(int v) const override { return has_[v] && (fwd_[v] || from_[v].size() == g_.adj(v).size()); }

    const WeightedGraph& g_;
    std::vector<char> has_, fwd_;
    std::vector<std::set<int>> from_;
};

class Oversize : public NodeProgram {
public:
    explicit Oversize(int ints, bool twice) : ints_(ints), twice_(twice) {}
    void send(int v, Outbox& out) override {
        if (v != 0) return;
        out.send(0, Message(1, std::vector<std::int64_t>(ints_, 7)));
        if (twice_) out.send(0, Message(1));
    }
    void receive(int, const Inbox&) override { done_ = true; }
    bool terminated(int) const override { return done_; }
    int ints_;
    bool twice_;
    bool done_ = false;
};

class Forever : public NodeProgram {
public:
    void send(int, Outbox&) override {}
    void receive(int, const Inbox&) override {}
    bool terminated(int) const override { return false; }
};

std::vector<Q> dijkstra_q(const WeightedGraph& g, const std::vector<std::optional<BfSource>>& src,
                          const std::function<std::optional<Q>(int)>& w, std::vector<int>* owner) {
    const int n = g.n();
    std::vector<std::optional<std::pair<Q, int>>> best(n);
    using Item = std::tuple<Q, int, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    for (int v = 0; v < n; ++v)
        if (src[v]) {
            best[v] = std::make_pair(src[v]->dist, src[v]->owner);
            pq.emplace(src[v]->dist, src[v]->owner, v);
        }
    while (!pq.empty()) {
        auto [d, o, v] = pq.top();
        pq.pop();
        if (std::make_pair(d, o) != *best[v]) continue;
        for (const auto& a : g.adj(v)) {
            auto ww = w(a.edge);
            if (!ww) continue;
            std::pair<Q, int> c{d + *ww, o};
            if (!best[a.to] || c < *best[a.to]) {
                best[a.to] = c;
                pq.emplace(c.first, c.second, a.to);
            }
        }
    }
    std::vector<Q> out(n, Q(-1));
    owner->assign(n, -1);
    for (int v = 0; v < n; ++v)
        if (best[v]) {
            out[v] = best[v]->first;
            (*owner)[v] = best[v]->second;
        }
    return out;
}

}  // namespace

TEST_CASE("token flood over a unit path takes D rounds") {
    auto g = make_graph(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}});
    Simulator sim(g);
    TokenFlood p(g, 0);
    CHECK(sim.run("flood", p) == 3);
    for (int v = 0; v < 4; ++v) CHECK(p.terminated(v));
    CHECK(sim.stats().messages == 3);
    CHECK(sim.stats().termination_round[3] == 3);
}

TEST_CASE("message accounting and budget enforcement") {
    Message m(3, {1, 2}, {Q(1, 2)});
    CHECK(m.words() == 5);
    CHECK(Message().words() == 0);

    auto g = make_graph(2, {{0, 1, 1}});
    {
        Simulator sim(g);
        Oversize ok(7, false);
        CHECK_NOTHROW(sim.run("ok", ok));
        CHECK(sim.stats().max_edge_words == 8);
    }
    {
        Simulator sim(g);
        Oversize big(8, false);
        CHECK_THROWS_AS(sim.run("big", big), BudgetViolation);
    }
    {
        Simulator sim(g);
        Oversize dup(1, true);
        CHECK_THROWS_AS(sim.run("dup", dup), BudgetViolation);
    }
    {
        Simulator sim(g, SimConfig{16, 0, 0, nullptr});
        Oversize wide(12, false);
        CHECK_NOTHROW(sim.run("wide", wide));
    }
}

TEST_CASE("round cap is cumulative") {
    auto g = make_graph(3, {{0, 1, 1}, {1, 2, 1}});
    Simulator sim(g, SimConfig{8, 5, 0, nullptr});
    TokenFlood p(g, 0);
    sim.run("a", p);
    Forever f;
    CHECK_THROWS_AS(sim.run("b", f), RoundCapExceeded);
    CHECK(sim.round() == 5);
}

TEST_CASE("trace output lists every message") {
    auto g = make_graph(3, {{0, 1, 1}, {1, 2, 1}});
    std::ostringstream os;
    Simulator sim(g, SimConfig{8, 0, 0, &os});
    TokenFlood p(g, 0);
    sim.run("flood", p);
    CHECK(os.str() == "1,0,1,1,1\n2,1,2,1,1\n");
}

TEST_CASE("BFS tree on a star and a path") {
    auto star = make_graph(5, {{4, 0, 1}, {4, 1, 1}, {4, 2, 1}, {4, 3, 1}});
    Simulator s1(star);
    auto t = build_bfs_tree(s1);
    CHECK(t.root == 4);
    for (int v = 0; v < 4; ++v) {
        CHECK(t.depth[v] == 1);
        CHECK(t.parent[v] == 4);
    }
    CHECK(t.children[4].size() == 4);

    auto path = make_graph(5, {{4, 3, 1}, {3, 2, 1}, {2, 1, 1}, {1, 0, 1}});
    Simulator s2(path);
    auto tp = build_bfs_tree(s2);
    for (int v = 0; v < 5; ++v) CHECK(tp.depth[v] == 4 - v);
    CHECK(tp.max_depth == 4);
}

TEST_CASE("BFS tree matches central BFS and is deterministic") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        auto g = gen_random_connected(20, 19 + static_cast<int>(seed) * 3, 1, 9, rng);
        Simulator sim(g, SimConfig{8, 0, seed, nullptr});
        auto t = build_bfs_tree(sim);
        auto hops = bfs_hops(g, g.n() - 1);
        for (int v = 0; v < g.n(); ++v) {
            CHECK(t.depth[v] == hops[v]);
            if (v != t.root) CHECK(t.depth[t.parent[v]] == t.depth[v] - 1);
        }
        Simulator again(g, SimConfig{8, 0, seed, nullptr});
        auto t2 = build_bfs_tree(again);
        CHECK(t2.parent == t.parent);
        CHECK(to_json(again.stats()) == to_json(sim.stats()));
        CHECK(again.stats().messages_per_round == sim.stats().messages_per_round);
    }
}

TEST_CASE("disconnected graph is rejected") {
    auto g = make_graph(4, {{0, 1, 1}, {2, 3, 1}});
    Simulator sim(g);
    CHECK_THROWS_AS(build_bfs_tree(sim), DisconnectedGraph);
}

TEST_CASE("tree broadcast, convergecast and ordered upcast") {
    Rng rng(5);
    auto g = gen_random_connected(15, 25, 1, 5, rng);
    Simulator sim(g);
    auto t = build_bfs_tree(sim);

    std::vector<std::vector<Message>> at_root(g.n());
    for (int i = 0; i < 6; ++i) at_root[t.root].push_back(Message(1, {i}));
    long long before = sim.round();
    auto got = forest_broadcast(sim, t, at_root, "bcast");
    for (int v = 0; v < g.n(); ++v) {
        REQUIRE(got[v].size() == 6);
        for (int i = 0; i < 6; ++i) CHECK(got[v][i].at(0) == i);
    }
    CHECK(sim.round() - before <= t.max_depth + 6);

    std::vector<std::optional<Message>> val(g.n());
    for (int v = 0; v < g.n(); ++v) val[v] = Message(1, {v});
    auto sum = forest_convergecast(
        sim, t, val, [](int, std::optional<Message>& acc, const Message& m) { acc->ints[0] += m.at(0); }, "sum");
    CHECK(sum[t.root]->at(0) == g.n() * (g.n() - 1) / 2);

    // duplicate keys combine, a filter drops multiples of 5, root stops at 40
    std::vector<std::vector<UpItem>> items(g.n());
    for (int v = 0; v < g.n(); ++v)
        for (int i = 0; i < 4; ++i) items[v].push_back(UpItem{{Message(1, {(v * 7 + i * 13) % 50, 1})}});
    UpcastHooks h;
    h.less = [](const UpItem& a, const UpItem& b) { return a.parts[0].at(0) < b.parts[0].at(0); };
    h.combine = [](int, UpItem& into, const UpItem& o) { into.parts[0].ints[1] += o.parts[0].at(1); };
    h.forward = [](int, const UpItem& x) { return x.parts[0].at(0) % 5 != 0; };
    h.at_root = [](int, const UpItem& x) { return x.parts[0].at(0) >= 40; };
    auto out = ordered_upcast(sim, t, items, h, "upcast");
    std::map<std::int64_t, std::int64_t> expect;
    for (int v = 0; v < g.n(); ++v)
        for (const auto& it : items[v]) expect[it.parts[0].at(0)] += 1;
    const auto& seq = out[t.root];
    REQUIRE(!seq.empty());
    for (size_t i = 0; i + 1 < seq.size(); ++i) CHECK(seq[i].parts[0].at(0) < seq[i + 1].parts[0].at(0));
    CHECK(seq.back().parts[0].at(0) >= 40);
    for (const auto& it : seq) {
        auto key = it.parts[0].at(0);
        if (key % 5 != 0) CHECK(it.parts[0].at(1) == expect[key]);
    }
    // every surviving key below the stop point reaches the root
    std::set<std::int64_t> seen;
    for (const auto& it : seq) seen.insert(it.parts[0].at(0));
    for (auto [k, c] : expect)
        if (k % 5 != 0 && k < seq.back().parts[0].at(0)) CHECK(seen.count(k));
}

TEST_CASE("two-part upcast items") {
    auto g = make_graph(4, {{3, 2, 1}, {2, 1, 1}, {1, 0, 1}});
    Simulator sim(g);
    auto t = build_bfs_tree(sim);
    std::vector<std::vector<UpItem>> items(4);
    items[0] = {UpItem{{Message(1, {5}), Message(2, {50})}}, UpItem{{Message(1, {1}), Message(2, {10})}}};
    items[2] = {UpItem{{Message(1, {3}), Message(2, {30})}}};
    UpcastHooks h;
    h.parts = 2;
    h.less = [](const UpItem& a, const UpItem& b) { return a.parts[0].at(0) < b.parts[0].at(0); };
    auto out = ordered_upcast(sim, t, items, h, "up2");
    REQUIRE(out[3].size() == 3);
    CHECK(out[3][0].parts[1].at(0) == 10);
    CHECK(out[3][1].parts[1].at(0) == 30);
    CHECK(out[3][2].parts[1].at(0) == 50);
}

TEST_CASE("Bellman-Ford examples") {
    auto g = make_graph(5, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
    auto unit = [](int) -> std::optional<Q> { return Q(1); };
    std::vector<char> all(5, 1);
    {
        Simulator sim(g);
        std::vector<std::optional<BfSource>> src(5);
        src[0] = BfSource{Q(0), 0};
        auto r = distributed_bellman_ford(sim, src, unit, all, 0, nullptr, "bf");
        for (int v = 0; v < 5; ++v) CHECK(r.dist[v] == Q(v));
        CHECK(r.parent[3] == 2);
    }
    {
        Simulator sim(g);
        std::vector<std::optional<BfSource>> src(5);
        src[0] = BfSource{Q(0), 0};
        src[4] = BfSource{Q(0), 4};
        auto r = distributed_bellman_ford(sim, src, unit, all, 0, nullptr, "bf");
        CHECK(r.dist[2] == Q(2));
        CHECK(r.owner[2] == 0);
        CHECK(r.parent[2] == 1);
    }
    {
        Simulator sim(g);
        std::vector<std::optional<BfSource>> src(5);
        src[0] = BfSource{Q(0), 0};
        auto r = distributed_bellman_ford(sim, src, unit, all, 2, nullptr, "bf");
        CHECK(r.reached[2]);
        CHECK(!r.reached[3]);
    }
}

TEST_CASE("Bellman-Ford equals central Dijkstra on reduced weights") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed * 31);
        int n = 10 + static_cast<int>(seed % 15);
        auto g = gen_random_connected(n, n - 1 + static_cast<int>(seed % 9), 1, 9, rng);
        // zero weight on edges inside random "balls", halves elsewhere
        std::vector<std::optional<Q>> wt(g.m());
        for (int e = 0; e < g.m(); ++e) {
            auto r = uniform_int(rng, 0, 5);
            if (r == 0) wt[e] = Q(0);
            else if (r == 1) wt[e] = std::nullopt;
            else wt[e] = Q(g.edge(e).w) - Q(1, 2);
        }
        auto w = [&](int e) { return wt[e]; };
        std::vector<std::optional<BfSource>> src(n);
        for (int v = 0; v < n; ++v)
            if (uniform_int(rng, 0, 3) == 0) src[v] = BfSource{Q(uniform_int(rng, 0, 4), 2), v};
        if (!src[0]) src[0] = BfSource{Q(0), 0};
        Simulator sim(g);
        auto t = build_bfs_tree(sim);
        std::vector<char> all(n, 1);
        auto r = distributed_bellman_ford(sim, src, w, all, 0, &t, "bf");
        std::vector<int> owner;
        auto d = dijkstra_q(g, src, w, &owner);
        for (int v = 0; v < n; ++v) {
            CHECK(static_cast<bool>(r.reached[v]) == (d[v] >= 0));
            if (!r.reached[v]) continue;
            CHECK(r.dist[v] == d[v]);
            CHECK(r.owner[v] == owner[v]);
            if (r.parent[v] >= 0) {
                auto e = g.edge_id(v, r.parent[v]);
                CHECK(r.dist[r.parent[v]] + *wt[e] == r.dist[v]);
            }
        }
    }
}

TEST_CASE("flood_max finds component maxima over an edge subset") {
    auto g = make_graph(6, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}, {4, 5, 1}});
    std::vector<char> allowed{1, 1, 0, 1, 1};
    std::vector<std::int64_t> key{0, 1, 2, 3, 4, 5};
    Simulator sim(g);
    auto r = flood_max(sim, key, allowed, nullptr, "flood");
    CHECK(r.best == std::vector<std::int64_t>{2, 2, 2, 5, 5, 5});
    CHECK(r.hops == std::vector<int>{2, 1, 0, 2, 1, 0});
    CHECK(r.parent[0] == 1);
}
