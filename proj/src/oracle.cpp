#include "steiner/oracle.hpp"

#include "steiner/dsu.hpp"
#include "steiner/errors.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace steiner {
namespace {

bool feasible_with(const SteinerInstance& inst, const std::vector<std::vector<int>>& comps,
                   const std::vector<int>& edges) {
    Dsu dsu(inst.n());
    for (int e : edges) dsu.unite(inst.graph.edge(e).u, inst.graph.edge(e).v);
    for (const auto& c : comps) {
        for (int v : c) if (!dsu.same(v, c.front())) return false;
    }
    return true;
}

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Branch and bound over acyclic edge subsets in ID order.
ForestSolution optimum_enumerate(const SteinerInstance& inst) {
    const auto& g = inst.graph;
    if (g.m() > kEnumerateMaxEdges) throw TooLarge("edge enumeration needs |E| <= 24");
    auto comps = inst.components();
    Weight best_w = kInfWeight;
    std::vector<int> best;
    std::vector<int> cur;
    // Undo-able union-find via plain parent copies; |V| is tiny here.
    std::vector<int> parent(g.n());
    for (int v = 0; v < g.n(); ++v) parent[v] = v;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x];
        return x;
    };
    auto satisfied = [&] {
        for (const auto& c : comps) {
            int r = find(c.front());
            for (int v : c) if (find(v) != r) return false;
        }
        return true;
    };
    std::function<void(int, Weight)> rec = [&](int e, Weight w) {
        if (w > best_w) return;
        if (satisfied()) {
            if (w < best_w || lex_less(cur, best)) {
                best_w = w;
                best = cur;
            }
            return;  // any superset is heavier
        }
        if (e == g.m()) return;
        const auto& ed = g.edge(e);
        int a = find(ed.u), b = find(ed.v);
        if (a != b && w + ed.w <= best_w) {
            parent[a] = b;
            cur.push_back(e);
            rec(e + 1, w + ed.w);
            cur.pop_back();
            parent[a] = a;
        }
        rec(e + 1, w);
    };
    rec(0, 0);
    if (best_w == kInfWeight) throw Infeasible("instance has no feasible solution");
    return make_solution(inst, best);
}

// Dreyfus-Wagner over terminals, then a partition DP over label classes.
// Edges in `forced` cost nothing, edges in `banned` are absent.
Weight forest_dp(const SteinerInstance& inst, const std::vector<std::vector<int>>& comps,
                 const std::vector<char>& forced, const std::vector<char>& banned) {
    const auto& g = inst.graph;
    const int n = g.n();
    std::vector<int> terms;
    std::vector<int> cls_mask;
    for (const auto& c : comps) {
        int mask = 0;
        for (int v : c) {
            mask |= 1 << static_cast<int>(terms.size());
            terms.push_back(v);
        }
        cls_mask.push_back(mask);
    }
    const int t = static_cast<int>(terms.size());
    if (t > kDpMaxTerminals) throw TooLarge("terminal DP needs t <= 10");
    if (t == 0) return 0;
    std::vector<std::vector<Weight>> d(n, std::vector<Weight>(n, kInfWeight));
    for (int v = 0; v < n; ++v) d[v][v] = 0;
    for (int e = 0; e < g.m(); ++e) {
        if (banned[e]) continue;
        const auto& ed = g.edge(e);
        Weight w = forced[e] ? 0 : ed.w;
        d[ed.u][ed.v] = std::min(d[ed.u][ed.v], w);
        d[ed.v][ed.u] = std::min(d[ed.v][ed.u], w);
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            if (d[i][k] >= kInfWeight) continue;
            for (int j = 0; j < n; ++j) {
                if (d[k][j] >= kInfWeight) continue;
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
            }
        }
    const int full = 1 << t;
    std::vector<std::vector<Weight>> dp(full, std::vector<Weight>(n, kInfWeight));
    for (int i = 0; i < t; ++i)
        for (int v = 0; v < n; ++v) dp[1 << i][v] = d[terms[i]][v];
    std::vector<Weight> tree(full, kInfWeight);
    for (int S = 1; S < full; ++S) {
        auto& row = dp[S];
        if (S & (S - 1)) {
            for (int A = (S - 1) & S; A > 0; A = (A - 1) & S) {
                if (A < (S ^ A)) continue;  // each split once
                const auto& x = dp[A];
                const auto& y = dp[S ^ A];
                for (int v = 0; v < n; ++v) {
                    if (x[v] < kInfWeight && y[v] < kInfWeight) row[v] = std::min(row[v], x[v] + y[v]);
                }
            }
            std::vector<Weight> relaxed = row;
            for (int u = 0; u < n; ++u) {
                if (row[u] >= kInfWeight) continue;
                for (int v = 0; v < n; ++v) {
                    if (d[u][v] < kInfWeight) relaxed[v] = std::min(relaxed[v], row[u] + d[u][v]);
                }
            }
            row = std::move(relaxed);
        }
        for (int v = 0; v < n; ++v) tree[S] = std::min(tree[S], row[v]);
    }
    const int k = static_cast<int>(cls_mask.size());
    std::vector<Weight> f(1 << k, kInfWeight);
    f[0] = 0;
    for (int X = 1; X < (1 << k); ++X) {
        int low = X & -X;
        for (int Y = X; Y > 0; Y = (Y - 1) & X) {
            if (!(Y & low)) continue;
            int tm = 0;
            for (int c = 0; c < k; ++c) if (Y >> c & 1) tm |= cls_mask[c];
            if (tree[tm] >= kInfWeight || f[X ^ Y] >= kInfWeight) continue;
            f[X] = std::min(f[X], tree[tm] + f[X ^ Y]);
        }
    }
    return f[(1 << k) - 1];
}

ForestSolution optimum_dp(const SteinerInstance& inst) {
    const auto& g = inst.graph;
    auto comps = inst.components();
    std::vector<char> forced(g.m(), 0), banned(g.m(), 0);
    const Weight opt = forest_dp(inst, comps, forced, banned);
    if (opt >= kInfWeight) throw Infeasible("instance has no feasible solution");
    // Greedy lexicographic extraction: decide edges in ID order.
    std::vector<int> chosen;
    Weight chosen_w = 0;
    for (int e = 0; e < g.m(); ++e) {
        if (chosen_w == opt && feasible_with(inst, comps, chosen)) break;
        forced[e] = 1;
        if (chosen_w + g.edge(e).w <= opt &&
            forest_dp(inst, comps, forced, banned) + chosen_w + g.edge(e).w == opt) {
            chosen.push_back(e);
            chosen_w += g.edge(e).w;
        } else {
            forced[e] = 0;
            banned[e] = 1;
        }
    }
    auto sol = make_solution(inst, chosen);
    STEINER_CHECK(sol.feasible && sol.weight == opt, "DP extraction lost optimality");
    return sol;
}

}  // namespace

bool oracle_admits(const SteinerInstance& inst) {
    return inst.graph.m() <= kEnumerateMaxEdges || inst.t() <= kDpMaxTerminals;
}

ForestSolution exact_optimum(const SteinerInstance& inst, OracleBackend backend) {
    switch (backend) {
        case OracleBackend::Enumerate: return optimum_enumerate(inst);
        case OracleBackend::TerminalDp: return optimum_dp(inst);
        case OracleBackend::Auto: break;
    }
    if (inst.t() <= kDpMaxTerminals) return optimum_dp(inst);
    if (inst.graph.m() <= kEnumerateMaxEdges) return optimum_enumerate(inst);
    throw TooLarge("instance exceeds oracle guards (|E| <= 24 or t <= 10)");
}

Weight exact_optimum_weight(const SteinerInstance& inst) {
    if (inst.t() <= kDpMaxTerminals) {
        std::vector<char> none(inst.graph.m(), 0);
        Weight w = forest_dp(inst, inst.components(), none, none);
        if (w >= kInfWeight) throw Infeasible("instance has no feasible solution");
        return w;
    }
    return exact_optimum(inst).weight;
}

ForestSolution minimal_subforest(const std::vector<int>& forest, const SteinerInstance& inst) {
    const auto& g = inst.graph;
    const int n = g.n();
    auto base = make_solution(inst, forest);
    if (!base.acyclic) throw std::invalid_argument("minimal_subforest: edge set contains a cycle");
    if (!base.feasible) throw Infeasible("forest does not solve the instance");
    // Root every tree of (V, F); an edge (p(u), u) is needed iff some label has
    // terminals both inside and outside the subtree of u.
    std::vector<std::vector<std::pair<int, int>>> fadj(n);
    for (int e : base.edges) {
        fadj[g.edge(e).u].push_back({g.edge(e).v, e});
        fadj[g.edge(e).v].push_back({g.edge(e).u, e});
    }
    auto comps = inst.components();
    std::vector<int> comp_of(n, -1);
    for (int c = 0; c < static_cast<int>(comps.size()); ++c)
        for (int v : comps[c]) comp_of[v] = c;
    std::vector<int> parent_edge(n, -1), order;
    std::vector<char> seen(n, 0);
    for (int r = 0; r < n; ++r) {
        if (seen[r]) continue;
        std::vector<int> stack{r};
        seen[r] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            order.push_back(v);
            for (auto [w, e] : fadj[v]) {
                if (seen[w]) continue;
                seen[w] = 1;
                parent_edge[w] = e;
                stack.push_back(w);
            }
        }
    }
    const int k = static_cast<int>(comps.size());
    std::vector<std::vector<int>> cnt(n, std::vector<int>(k, 0));
    for (int v = 0; v < n; ++v) if (comp_of[v] >= 0) cnt[v][comp_of[v]] = 1;
    std::vector<int> keep;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int v = *it;
        int e = parent_edge[v];
        if (e < 0) continue;
        bool needed = false;
        for (int c = 0; c < k; ++c) {
            if (cnt[v][c] > 0 && cnt[v][c] < static_cast<int>(comps[c].size())) needed = true;
        }
        if (needed) keep.push_back(e);
        int p = g.edge(e).other(v);
        for (int c = 0; c < k; ++c) cnt[p][c] += cnt[v][c];
    }
    return make_solution(inst, keep);
}

bool check_feasible(const std::vector<int>& edges, const SteinerInstance& inst) {
    return feasible_with(inst, inst.components(), edges);
}

Q approx_ratio(Weight w, Weight opt) {
    if (opt == 0) {
        if (w == 0) return Q(1);
        throw std::domain_error("ratio undefined: optimum is 0");
    }
    return Q(w, opt);
}

Q approx_ratio(const std::vector<int>& edges, const SteinerInstance& inst) {
    if (!check_feasible(edges, inst)) throw Infeasible("edge set is not feasible");
    return approx_ratio(inst.graph.weight_of(edges), exact_optimum_weight(inst));
}

}  // namespace steiner
