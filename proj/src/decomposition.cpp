#include "steiner/decomposition.hpp"

#include "steiner/errors.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace steiner {

Candidate make_candidate(int owner_x, int owner_y, int phase, Q what, int x, int y) {
    Candidate c;
    c.phase = phase;
    c.what = std::move(what);
    if (owner_x < owner_y) {
        c.v = owner_x;
        c.w = owner_y;
        c.x = x;
        c.y = y;
    } else {
        c.v = owner_y;
        c.w = owner_x;
        c.x = y;
        c.y = x;
    }
    return c;
}

namespace {
Q clip(const Q& a, const Q& lo, const Q& hi) { return a < lo ? lo : (a > hi ? hi : a); }
}  // namespace

Q split_share(const Q& dx, const std::optional<Q>& dy, const Q& gap) {
    if (!dy) return gap;
    return clip((*dy - dx + gap) / 2, Q(0), gap);
}

Q candidate_weight(const Q& dx, const std::optional<Q>& dy, const Q& gap) {
    return dx + split_share(dx, dy, gap);
}

Q claim_extension(const Q& dx, const std::optional<Q>& dy, const Q& gap, const Q& growth) {
    return clip(growth - dx, Q(0), split_share(dx, dy, gap));
}

CentralDecomposition::CentralDecomposition(const WeightedGraph& g, const GraphMetrics& m,
                                           const std::vector<int>& terminals)
    : g_(g), m_(m), owner_(g.n(), -1), wd_(g.n(), 0), rparent_(g.n(), -1), claim_(g.m()),
      active_(g.n(), 0), radius_(g.n()) {
    for (int v : terminals) owner_[v] = v;
    for (auto& c : claim_) c = {Q(0), Q(0)};
}

const Q& CentralDecomposition::claim(int edge, int endpoint) const {
    return claim_[edge][g_.edge(edge).u == endpoint ? 0 : 1];
}

Q CentralDecomposition::covered(int edge) const { return claim_[edge][0] + claim_[edge][1]; }

Q CentralDecomposition::reduced_weight(int edge) const {
    return Q(g_.edge(edge).w) - claim_[edge][0] - claim_[edge][1];
}

void CentralDecomposition::begin_phase(int j, const std::vector<char>& active, const std::vector<Q>& radius) {
    phase_ = j;
    active_ = active;
    radius_ = radius;
    const int n = g_.n();
    status_.assign(n, NodeStatus::Unassigned);
    dist_.assign(n, Q(0));
    cell_owner_.assign(n, -1);
    cparent_.assign(n, -1);
    candidates_.clear();

    using Key = std::tuple<Q, int, int>;  // (reduced distance, source terminal, node)
    std::priority_queue<Key, std::vector<Key>, std::greater<>> pq;
    std::vector<char> done(n, 0);
    std::vector<char> reached(n, 0);
    for (int u = 0; u < n; ++u) {
        if (owner_[u] < 0) continue;
        if (active_[owner_[u]]) {
            status_[u] = NodeStatus::ActiveRegion;
            cell_owner_[u] = owner_[u];
            reached[u] = 1;
            pq.push({Q(0), owner_[u], u});
        } else {
            status_[u] = NodeStatus::InactiveRegion;
        }
    }
    while (!pq.empty()) {
        auto [d, src, u] = pq.top();
        pq.pop();
        if (done[u]) continue;
        done[u] = 1;
        for (const auto& a : g_.adj(u)) {
            if (status_[a.to] == NodeStatus::ActiveRegion || status_[a.to] == NodeStatus::InactiveRegion) continue;
            Q nd = d + reduced_weight(a.edge);
            if (!reached[a.to] || std::tie(nd, src) < std::tie(dist_[a.to], cell_owner_[a.to])) {
                reached[a.to] = 1;
                dist_[a.to] = nd;
                cell_owner_[a.to] = src;
                status_[a.to] = NodeStatus::Cell;
                pq.push({nd, src, a.to});
            }
        }
    }
    // Cell parents: smallest-ID neighbour realizing (distance, source).
    for (int u = 0; u < n; ++u) {
        if (status_[u] != NodeStatus::Cell) continue;
        for (const auto& a : g_.adj(u)) {
            auto st = status_[a.to];
            if (st != NodeStatus::ActiveRegion && st != NodeStatus::Cell) continue;
            if (cell_owner_[a.to] == cell_owner_[u] && dist_[a.to] + reduced_weight(a.edge) == dist_[u]) {
                cparent_[u] = a.to;
                break;
            }
        }
        STEINER_CHECK(cparent_[u] >= 0, "cell node without parent");
    }
    for (int e = 0; e < g_.m(); ++e) {
        const auto& ed = g_.edge(e);
        for (int side = 0; side < 2; ++side) {
            int x = side == 0 ? ed.u : ed.v;
            int y = ed.other(x);
            auto sx = status_[x], sy = status_[y];
            if (sx != NodeStatus::ActiveRegion && sx != NodeStatus::Cell) continue;
            if (sy == NodeStatus::Unassigned) continue;
            int ox = cell_owner_[x];
            int oy = sy == NodeStatus::InactiveRegion ? owner_[y] : cell_owner_[y];
            if (ox == oy) continue;
            Q dx = sx == NodeStatus::Cell ? dist_[x] : Q(0);
            std::optional<Q> dy;
            if (sy != NodeStatus::InactiveRegion) dy = sy == NodeStatus::Cell ? dist_[y] : Q(0);
            candidates_.push_back(make_candidate(ox, oy, j, candidate_weight(dx, dy, reduced_weight(e)), x, y));
        }
    }
    std::sort(candidates_.begin(), candidates_.end());
    candidates_.erase(std::unique(candidates_.begin(), candidates_.end()), candidates_.end());
}

void CentralDecomposition::end_phase(const Q& growth) {
    const int n = g_.n();
    std::vector<std::array<Q, 2>> ext(g_.m(), {Q(0), Q(0)});
    for (int e = 0; e < g_.m(); ++e) {
        const auto& ed = g_.edge(e);
        for (int side = 0; side < 2; ++side) {
            int x = side == 0 ? ed.u : ed.v;
            int y = ed.other(x);
            auto sx = status_[x], sy = status_[y];
            if (sx != NodeStatus::ActiveRegion && sx != NodeStatus::Cell) continue;
            STEINER_CHECK(sy != NodeStatus::Unassigned, "assigned node next to an unreached one");
            Q dx = sx == NodeStatus::Cell ? dist_[x] : Q(0);
            std::optional<Q> dy;
            if (sy != NodeStatus::InactiveRegion) dy = sy == NodeStatus::Cell ? dist_[y] : Q(0);
            ext[e][side] = claim_extension(dx, dy, reduced_weight(e), growth);
        }
    }
    for (int e = 0; e < g_.m(); ++e) {
        claim_[e][0] += ext[e][0];
        claim_[e][1] += ext[e][1];
        STEINER_CHECK(claim_[e][0] + claim_[e][1] <= Q(g_.edge(e).w), "claims exceed edge weight");
    }
    for (int u = 0; u < n; ++u) {
        if (status_[u] != NodeStatus::Cell || dist_[u] > growth) continue;
        int o = cell_owner_[u];
        Q wd = dist_[u] + radius_[o];
        STEINER_CHECK(wd == Q(m_.dist(o, u)), "region node at wrong distance from its terminal");
        owner_[u] = o;
        wd_[u] = m_.dist(o, u);
        rparent_[u] = cparent_[u];
    }
}

std::vector<int> CentralDecomposition::chain(int u) const {
    std::vector<int> out{u};
    while (true) {
        int p = (status_[u] == NodeStatus::Cell) ? cparent_[u] : rparent_[u];
        if (p < 0) break;
        out.push_back(p);
        u = p;
    }
    return out;
}

std::vector<int> CentralDecomposition::path(const Candidate& c) const {
    auto left = chain(c.x);   // x .. v
    auto right = chain(c.y);  // y .. w
    STEINER_CHECK(left.back() == c.v && right.back() == c.w, "candidate path does not reach its terminals");
    std::reverse(left.begin(), left.end());
    left.insert(left.end(), right.begin(), right.end());
    return left;
}

}  // namespace steiner
