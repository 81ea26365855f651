#include "steiner/graph.hpp"

#include "steiner/dsu.hpp"
#include "steiner/errors.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <string>

namespace steiner {

WeightedGraph::WeightedGraph(int n) : adj_(n) {
    if (n < 0) throw InvalidGraph("negative node count");
}

int WeightedGraph::add_edge(int u, int v, Weight w) {
    if (u < 0 || v < 0 || u >= n() || v >= n()) throw InvalidGraph("edge endpoint out of range");
    if (u == v) throw InvalidGraph("self-loop at " + std::to_string(u));
    if (w < 1) throw InvalidGraph("edge weight must be >= 1");
    if (edge_id(u, v) >= 0) throw InvalidGraph("parallel edge " + std::to_string(u) + "-" + std::to_string(v));
    int id = m();
    edges_.push_back({std::min(u, v), std::max(u, v), w});
    auto insert = [&](int a, int b) {
        auto& list = adj_[a];
        auto it = std::lower_bound(list.begin(), list.end(), b,
                                   [](const Arc& x, int key) { return x.to < key; });
        list.insert(it, Arc{b, id, w});
    };
    insert(u, v);
    insert(v, u);
    return id;
}

int WeightedGraph::port_of(int v, int neighbor) const {
    const auto& list = adj_[v];
    auto it = std::lower_bound(list.begin(), list.end(), neighbor,
                               [](const Arc& x, int key) { return x.to < key; });
    if (it == list.end() || it->to != neighbor) return -1;
    return static_cast<int>(it - list.begin());
}

int WeightedGraph::edge_id(int u, int v) const {
    if (u < 0 || u >= n()) return -1;
    int p = port_of(u, v);
    return p < 0 ? -1 : adj_[u][p].edge;
}

bool WeightedGraph::connected() const {
    if (n() == 0) return true;
    auto d = bfs_hops(*this, 0);
    return std::none_of(d.begin(), d.end(), [](int x) { return x < 0; });
}

Weight WeightedGraph::total_weight() const {
    Weight s = 0;
    for (const auto& e : edges_) s += e.w;
    return s;
}

Weight WeightedGraph::weight_of(const std::vector<int>& ids) const {
    Weight s = 0;
    for (int e : ids) s += edges_[e].w;
    return s;
}

std::vector<int> bfs_hops(const WeightedGraph& g, int src) {
    std::vector<int> d(g.n(), -1);
    std::queue<int> q;
    d[src] = 0;
    q.push(src);
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (const auto& a : g.adj(v)) {
            if (d[a.to] < 0) {
                d[a.to] = d[v] + 1;
                q.push(a.to);
            }
        }
    }
    return d;
}

GraphMetrics all_pairs_shortest_paths(const WeightedGraph& g) {
    const int n = g.n();
    if (!g.connected()) throw DisconnectedGraph("graph is not connected");
    GraphMetrics m;
    m.n = n;
    m.wd.assign(n, std::vector<Weight>(n, kInfWeight));
    m.hops.assign(n, std::vector<int>(n, 0));
    using Item = std::pair<std::pair<Weight, int>, int>;  // ((dist, hops), node)
    for (int src = 0; src < n; ++src) {
        auto& d = m.wd[src];
        auto& h = m.hops[src];
        std::vector<char> done(n, 0);
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        d[src] = 0;
        h[src] = 0;
        pq.push({{0, 0}, src});
        while (!pq.empty()) {
            auto [key, v] = pq.top();
            pq.pop();
            if (done[v]) continue;
            done[v] = 1;
            for (const auto& a : g.adj(v)) {
                std::pair<Weight, int> cand{key.first + a.w, key.second + 1};
                if (cand < std::pair<Weight, int>{d[a.to], h[a.to]} || d[a.to] == kInfWeight) {
                    if (done[a.to]) continue;
                    d[a.to] = cand.first;
                    h[a.to] = cand.second;
                    pq.push({cand, a.to});
                }
            }
        }
        auto bfs = bfs_hops(g, src);
        for (int v = 0; v < n; ++v) {
            m.WD = std::max(m.WD, d[v]);
            m.s = std::max(m.s, h[v]);
            m.D = std::max(m.D, bfs[v]);
        }
    }
    return m;
}

std::vector<int> canonical_path(const WeightedGraph& g, const GraphMetrics& m, int v, int w) {
    std::vector<int> path{v};
    int cur = v;
    while (cur != w) {
        int next = -1;
        for (const auto& a : g.adj(cur)) {  // sorted by neighbor id
            if (a.w + m.wd[a.to][w] == m.wd[cur][w]) {
                next = a.to;
                break;
            }
        }
        STEINER_CHECK(next >= 0, "no shortest-path successor");
        path.push_back(next);
        cur = next;
    }
    return path;
}

std::vector<int> path_edges(const WeightedGraph& g, const std::vector<int>& nodes) {
    std::vector<int> out;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        int e = g.edge_id(nodes[i - 1], nodes[i]);
        STEINER_CHECK(e >= 0, "path uses a non-edge");
        out.push_back(e);
    }
    return out;
}

BallView ball(const WeightedGraph& g, const GraphMetrics& m, int v, const Q& r) {
    BallView b;
    b.center = v;
    b.radius = r;
    std::vector<char> inside(g.n(), 0);
    for (int u = 0; u < g.n(); ++u) {
        if (Q(m.wd[v][u]) <= r) {
            inside[u] = 1;
            b.interior.push_back(u);
        }
    }
    auto frac = [&](int w, const Edge& e) {
        if (!inside[w]) return Q(0);
        Q f = (r - Q(m.wd[v][w])) / Q(e.w);
        return f > 1 ? Q(1) : f;
    };
    for (int id = 0; id < g.m(); ++id) {
        const auto& e = g.edge(id);
        if (!inside[e.u] && !inside[e.v]) continue;
        Q fu = frac(e.u, e), fv = frac(e.v, e);
        if (fu + fv >= 1) continue;  // fully covered
        if (inside[e.u]) b.boundary.push_back({id, e.u, fu});
        if (inside[e.v]) b.boundary.push_back({id, e.v, fv});
    }
    return b;
}

std::vector<int> mst_edges(const WeightedGraph& g) {
    std::vector<int> order(g.m());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return g.edge(a).w < g.edge(b).w; });
    Dsu dsu(g.n());
    std::vector<int> out;
    for (int e : order) {
        if (dsu.unite(g.edge(e).u, g.edge(e).v)) out.push_back(e);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Weight mst_weight(const WeightedGraph& g) {
    if (!g.connected()) throw DisconnectedGraph("graph is not connected");
    return g.weight_of(mst_edges(g));
}

WeightedGraph read_graph(std::istream& in) {
    long long n = -1, m = -1;
    if (!(in >> n >> m) || n < 0 || m < 0) throw ParseError("expected 'n m' header");
    WeightedGraph g(static_cast<int>(n));
    for (long long i = 0; i < m; ++i) {
        long long u, v, w;
        if (!(in >> u >> v >> w)) throw ParseError("truncated edge list");
        g.add_edge(static_cast<int>(u), static_cast<int>(v), w);
    }
    return g;
}

void write_graph(std::ostream& out, const WeightedGraph& g) {
    std::vector<int> order(g.m());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::pair(g.edge(a).u, g.edge(a).v) < std::pair(g.edge(b).u, g.edge(b).v);
    });
    out << g.n() << ' ' << g.m() << '\n';
    for (int e : order) out << g.edge(e).u << ' ' << g.edge(e).v << ' ' << g.edge(e).w << '\n';
}

}  // namespace steiner
