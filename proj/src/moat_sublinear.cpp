#include "steiner/moat_dist.hpp"

#include "cluster.hpp"
#include "moat_common.hpp"
#include "steiner/errors.hpp"
#include "steiner/oracle.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <set>

namespace steiner {

using namespace detail;

namespace {

// A moat is the set of nodes owned by its terminals, spanned by the region
// trees and the edges of F between them.
struct Moats {
    ClusterView view;
    std::vector<char> small;  // per owned node
    std::vector<int> fsize;   // nodes of the moat's component of (V, F)
};

std::optional<Candidate> min_of(const std::optional<Candidate>& a, const std::optional<Candidate>& b) {
    if (!a) return b;
    if (!b) return a;
    return *b < *a ? b : a;
}

class Sublinear {
public:
    Sublinear(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst, const Q& eps, int sigma)
        : sim_(sim), tree_(tree), inst_(inst), g_(inst.graph), n_(g_.n()), eps_(eps), sigma_(sigma),
          terr_(g_, inst.terminals()), act_(n_, 0), fedge_(g_.m(), 0), held_(n_) {
        for (int v : inst.terminals()) act_[v] = 1;
        res_.sublinear.sigma = sigma;
    }

    DistResult run() {
        if (inst_.terminals().empty()) {
            res_.solution = make_solution(inst_, {});
            return std::move(res_);
        }
        Q muhat(1);
        Q cum(0);
        int g = 0;
        bool any_active = true;
        auto moats = identify("init");
        while (any_active) {
            ++g;
            const std::string gs = "growth" + std::to_string(g);
            for (auto& h : held_) h.clear();
            grow_until_checkpoint(g, muhat, cum, moats);

            auto best = edge_minima(gs + "/mirror");
            int iterations = 0;
            while ((1 << iterations) < sigma_) ++iterations;
            for (int it = 1; it <= iterations; ++it) {
                const std::string st = gs + "/merge" + std::to_string(it);
                moats = identify(st);
                merge_small(moats, best, st);
                ++res_.sublinear.matching_iterations;
            }
            moats = identify(gs + "/pre-filter");
            filter_rest(moats, gs + "/filter");
            moats = identify(gs + "/post-filter");
            any_active = update_activity(moats, gs + "/activity");
            muhat *= Q(1) + eps_ / 2;
        }
        res_.sublinear.growth_phases = g;
        res_.merge_phases = static_cast<int>(res_.phases.size());
        for (auto& p : res_.phases) std::sort(p.accepted.begin(), p.accepted.end());
        std::vector<int> f;
        for (int e = 0; e < g_.m(); ++e)
            if (fedge_[e]) f.push_back(e);
        res_.forest = f;
        res_.solution = make_solution(inst_, f);
        return std::move(res_);
    }

private:
    // Merge phases of one growth phase; only merges with inactive moats end a
    // phase early, everything else is decided afterwards.
    void grow_until_checkpoint(int g, const Q& muhat, Q& cum, const Moats& moats) {
        while (true) {
            const int j = static_cast<int>(res_.phases.size()) + 1;
            const std::string st = "phase" + std::to_string(j);
            long long start = sim_.round();
            auto pd = decompose_phase(sim_, tree_, terr_, act_, j, st);

            std::vector<std::optional<Message>> mine(n_);
            for (int u = 0; u < n_; ++u) {
                std::optional<Candidate> b;
                for (const auto& c : pd.cands[u])
                    if (!act_[c.v] || !act_[c.w]) b = min_of(b, c);
                if (b) mine[u] = encode_candidate(*b, kTagMin);
            }
            auto low = forest_convergecast(
                sim_, tree_, mine,
                [](int, std::optional<Message>& acc, const Message& m) {
                    if (decode_candidate(m) < decode_candidate(*acc)) acc = m;
                },
                st + "/inactive-min");
            std::optional<Candidate> cstar;
            if (low[tree_.root]) cstar = decode_candidate(*low[tree_.root]);
            // a merge exactly at the threshold comes after the checkpoint
            const bool merge = cstar && cum + cstar->what < muhat;
            const Q growth = merge ? cstar->what : muhat - cum;
            std::vector<Message> news{Message(kTagMin, {merge ? 1 : 0}, {growth})};
            if (merge) news.push_back(encode_candidate(*cstar, kTagMin));
            broadcast_from_root(sim_, tree_, news, st + "/growth");

            for (int u = 0; u < n_; ++u)
                for (const auto& c : pd.cands[u])
                    if (merge ? !(*cstar < c) : c.what < growth) held_[u].push_back(c);
            end_phase_local(g_, terr_, pd, growth);
            cum += growth;

            DistPhaseLog log;
            log.j = j;
            log.growth_phase = g;
            log.growth = growth;
            if (cstar) log.collected.push_back(*cstar);
            log.status = pd.status;
            log.cell_owner = pd.cell_owner;
            log.dist = pd.dist;

            if (merge) {
                // the inactive moat's leader tells everyone that it wakes up
                int wc = act_[cstar->v] ? cstar->w : cstar->v;
                std::vector<std::vector<Message>> items(n_);
                items[wc].push_back(Message(kTagLeader, {moats.view.leader[wc]}));
                auto got = gather_everywhere(
                    sim_, tree_, std::move(items), [](const Message& a, const Message& b) { return a.at(0) < b.at(0); },
                    st + "/wake");
                for (int v : inst_.terminals())
                    if (moats.view.leader[v] == got.at(0).id(0)) act_[v] = 1;
            }
            log.rounds = sim_.round() - start;
            res_.phases.push_back(std::move(log));
            if (!merge) return;
        }
    }

    Moats identify(const std::string& st) {
        std::vector<char> member(n_, 0), edge_in(fedge_), fnode(n_, 0);
        for (int u = 0; u < n_; ++u) {
            member[u] = terr_.owner[u] >= 0;
            if (terr_.rparent[u] >= 0) edge_in[g_.edge_id(u, terr_.rparent[u])] = 1;
            fnode[u] = (inst_.label[u] != kNoLabel);
        }
        for (int e = 0; e < g_.m(); ++e)
            if (fedge_[e]) fnode[g_.edge(e).u] = fnode[g_.edge(e).v] = 1;
        Moats m;
        m.view = form_clusters(sim_, tree_, member, edge_in, st + "/moats");
        std::vector<std::optional<Message>> one(n_);
        for (int u = 0; u < n_; ++u)
            if (member[u]) one[u] = Message(kTagState, {fnode[u]});
        auto cnt = forest_convergecast(
            sim_, m.view.tree, one, [](int, std::optional<Message>& acc, const Message& x) { acc->ints[0] += x.at(0); },
            st + "/count");
        std::vector<std::vector<Message>> at_root(n_);
        for (int u = 0; u < n_; ++u)
            if (m.view.tree.is_root(u)) at_root[u] = {*cnt[u]};
        auto got = forest_broadcast(sim_, m.view.tree, at_root, st + "/size");
        m.small.assign(n_, 0);
        m.fsize.assign(n_, 0);
        int large = 0;
        for (int u = 0; u < n_; ++u) {
            if (!member[u]) continue;
            m.fsize[u] = static_cast<int>((m.view.tree.is_root(u) ? at_root[u] : got[u]).at(0).at(0));
            m.small[u] = m.fsize[u] < sigma_;
            if (m.view.tree.is_root(u) && !m.small[u]) ++large;
        }
        auto& s = res_.sublinear;
        s.max_large_moats = std::max(s.max_large_moats, large);
        s.max_small_diameter = std::max(s.max_small_diameter, small_diameter());
        return m;
    }

    // Hop diameter within F of components below sigma nodes (analysis only).
    int small_diameter() const {
        std::vector<std::vector<int>> adj(n_);
        for (int e = 0; e < g_.m(); ++e)
            if (fedge_[e]) {
                adj[g_.edge(e).u].push_back(g_.edge(e).v);
                adj[g_.edge(e).v].push_back(g_.edge(e).u);
            }
        auto bfs = [&](int s, std::vector<int>& dist) {
            std::deque<int> q{s};
            dist[s] = 0;
            std::vector<int> seen{s};
            while (!q.empty()) {
                int x = q.front();
                q.pop_front();
                for (int y : adj[x])
                    if (dist[y] < 0) {
                        dist[y] = dist[x] + 1;
                        seen.push_back(y);
                        q.push_back(y);
                    }
            }
            return seen;
        };
        int best = 0;
        std::vector<int> dist(n_, -1);
        for (int s = 0; s < n_; ++s) {
            if (adj[s].empty()) continue;
            std::fill(dist.begin(), dist.end(), -1);
            auto comp = bfs(s, dist);
            if (static_cast<int>(comp.size()) >= sigma_) continue;
            for (int x : comp) best = std::max(best, dist[x]);
        }
        return best;
    }

    // Every edge's smallest held candidate, known at both endpoints.
    std::vector<std::vector<std::optional<Candidate>>> edge_minima(const std::string& st) {
        std::vector<std::vector<std::optional<Candidate>>> best(n_);
        std::vector<std::vector<std::pair<int, Message>>> out(n_);
        for (int u = 0; u < n_; ++u) {
            best[u].resize(g_.degree(u));
            for (const auto& c : held_[u]) {
                int p = g_.port_of(u, c.x == u ? c.y : c.x);
                best[u][p] = min_of(best[u][p], c);
            }
            for (int p = 0; p < g_.degree(u); ++p)
                if (best[u][p]) out[u].push_back({p, encode_candidate(*best[u][p])});
        }
        auto got = port_send(sim_, out, st);
        for (int u = 0; u < n_; ++u)
            for (int p = 0; p < g_.degree(u); ++p)
                if (got[u][p]) best[u][p] = min_of(best[u][p], decode_candidate(*got[u][p]));
        return best;
    }

    std::vector<std::vector<std::optional<Message>>> neighbor_leaders(const Moats& m, const std::string& st) {
        std::vector<std::vector<int>> ports(n_);
        std::vector<Message> msg(n_);
        for (int u = 0; u < n_; ++u) {
            if (terr_.owner[u] < 0) continue;
            for (int p = 0; p < g_.degree(u); ++p) ports[u].push_back(p);
            msg[u] = Message(kTagLeader, {m.view.leader[u]});
        }
        return port_exchange(sim_, ports, msg, st);
    }

    void add_merges(const std::vector<Candidate>& list, const std::string& st) {
        if (list.empty()) return;
        for (int e : materialize_paths(sim_, terr_, list, st)) fedge_[e] = 1;
        for (const auto& c : list) {
            auto& acc = res_.phases.at(c.phase - 1).accepted;
            if (std::find(acc.begin(), acc.end(), c) == acc.end()) acc.push_back(c);
        }
    }

    // Each small moat proposes its cheapest outgoing merge; a maximal matching
    // among the proposals between small moats, plus the proposals of unmatched
    // moats, is merged.
    void merge_small(const Moats& m, const std::vector<std::vector<std::optional<Candidate>>>& best,
                     const std::string& st) {
        auto nl = neighbor_leaders(m, st + "/leaders");
        std::vector<std::optional<Message>> mine(n_);
        for (int u = 0; u < n_; ++u) {
            if (terr_.owner[u] < 0 || !m.small[u]) continue;
            std::optional<Candidate> b;
            for (int p = 0; p < g_.degree(u); ++p)
                if (best[u][p] && nl[u][p] && nl[u][p]->id(0) != m.view.leader[u]) b = min_of(b, best[u][p]);
            if (b) mine[u] = encode_candidate(*b, kTagPropose);
        }
        auto low = forest_convergecast(
            sim_, m.view.tree, mine,
            [](int, std::optional<Message>& acc, const Message& x) {
                if (decode_candidate(x) < decode_candidate(*acc)) acc = x;
            },
            st + "/propose");
        std::vector<std::vector<Message>> at_root(n_);
        std::vector<char> small_at_leader(n_, 0);
        for (int u = 0; u < n_; ++u) {
            if (!m.view.tree.is_root(u)) continue;
            small_at_leader[u] = m.small[u];
            if (low[u]) at_root[u] = {*low[u]};
        }
        auto heard = forest_broadcast(sim_, m.view.tree, at_root, st + "/announce");
        std::vector<int> up(n_, -1);
        for (int u = 0; u < n_; ++u) {
            const auto& l = m.view.tree.is_root(u) ? at_root[u] : heard[u];
            if (l.empty()) continue;
            auto c = decode_candidate(l[0]);
            if (c.x == u || c.y == u) up[u] = g_.port_of(u, c.x == u ? c.y : c.x);
        }
        auto links = make_links(sim_, up, st + "/links");
        auto mt = cluster_matching(sim_, m.view, links, small_at_leader, st + "/match");
        std::vector<Candidate> plus;
        for (int u = 0; u < n_; ++u) {
            if (!m.view.tree.is_root(u) || at_root[u].empty()) continue;
            if (mt.own_link_matched[u] || mt.partner[u] < 0) plus.push_back(decode_candidate(at_root[u][0]));
        }
        std::sort(plus.begin(), plus.end());
        plus.erase(std::unique(plus.begin(), plus.end()), plus.end());
        // leaders tell the chosen endpoints, which start the path tokens
        std::vector<std::vector<Message>> use(n_);
        for (int u = 0; u < n_; ++u)
            if (m.view.tree.is_root(u) && !at_root[u].empty())
                use[u] = {Message(kTagAccept, {mt.own_link_matched[u] || mt.partner[u] < 0 ? 1 : 0})};
        forest_broadcast(sim_, m.view.tree, use, st + "/use");
        add_merges(plus, st + "/paths");
    }

    // The remaining merges of the growth phase, as a minimum spanning forest
    // over moat leaders computed by filtering towards the BFS root.
    void filter_rest(const Moats& m, const std::string& st) {
        auto nl = neighbor_leaders(m, st + "/leaders");
        std::vector<std::vector<UpItem>> items(n_);
        for (int u = 0; u < n_; ++u)
            for (const auto& c : held_[u]) {
                int p = g_.port_of(u, c.x == u ? c.y : c.x);
                int a = m.view.leader[u], b = nl[u][p]->id(0);
                if (a == b) continue;
                items[u].push_back(
                    UpItem{{encode_candidate(c), Message(kTagLeader, {std::min(a, b), std::max(a, b)})}});
            }
        std::vector<std::unique_ptr<Dsu>> seen(n_);
        auto dsu_at = [&](int v) -> Dsu& {
            if (!seen[v]) seen[v] = std::make_unique<Dsu>(n_);
            return *seen[v];
        };
        std::vector<Candidate> accepted;
        UpcastHooks h;
        h.parts = 2;
        h.less = item_less;
        h.forward = [&](int v, const UpItem& x) { return dsu_at(v).unite(x.parts[1].id(0), x.parts[1].id(1)); };
        h.at_root = [&](int v, const UpItem& x) {
            if (dsu_at(v).unite(x.parts[1].id(0), x.parts[1].id(1))) accepted.push_back(decode_candidate(x.parts[0]));
            return false;
        };
        ordered_upcast(sim_, tree_, std::move(items), h, st + "/upcast");
        std::vector<Message> msg;
        for (const auto& c : accepted) msg.push_back(encode_candidate(c, kTagAccepted));
        broadcast_from_root(sim_, tree_, msg, st + "/broadcast");
        add_merges(accepted, st + "/paths");
    }

    // A moat stays active iff one of its labels also occurs in another moat.
    bool update_activity(const Moats& m, const std::string& st) {
        std::vector<std::vector<UpItem>> items(n_);
        for (int v : inst_.terminals())
            items[v].push_back(UpItem{{Message(kTagLabel, {inst_.label[v], m.view.leader[v]})}});
        std::vector<std::map<std::int64_t, int>> sent(n_);
        UpcastHooks h;
        h.less = [](const UpItem& a, const UpItem& b) {
            return std::make_pair(a.parts[0].at(0), a.parts[0].at(1)) <
                   std::make_pair(b.parts[0].at(0), b.parts[0].at(1));
        };
        h.forward = [&](int v, const UpItem& x) { return ++sent[v][x.parts[0].at(0)] <= 2; };
        auto at = ordered_upcast(sim_, tree_, std::move(items), h, st + "/labels");
        std::map<std::int64_t, int> moats_per_label;
        for (const auto& it : at[tree_.root]) ++moats_per_label[it.parts[0].at(0)];
        std::vector<Message> split;
        for (auto [lab, c] : moats_per_label)
            if (c > 1) split.push_back(Message(kTagLabel, {lab}));
        auto known = broadcast_from_root(sim_, tree_, split, st + "/split");
        std::set<std::int64_t> open;
        for (const auto& x : known) open.insert(x.at(0));

        std::vector<std::optional<Message>> flag(n_);
        for (int u = 0; u < n_; ++u)
            if (terr_.owner[u] >= 0)
                flag[u] = Message(kTagState, {(inst_.label[u] != kNoLabel) && open.count(inst_.label[u]) ? 1 : 0});
        auto any = forest_convergecast(
            sim_, m.view.tree, flag, [](int, std::optional<Message>& acc, const Message& x) { acc->ints[0] |= x.at(0); },
            st + "/or");
        std::vector<std::vector<Message>> at_root(n_);
        for (int u = 0; u < n_; ++u)
            if (m.view.tree.is_root(u)) at_root[u] = {*any[u]};
        auto got = forest_broadcast(sim_, m.view.tree, at_root, st + "/tell");
        for (int v : inst_.terminals())
            act_[v] = (m.view.tree.is_root(v) ? at_root[v] : got[v]).at(0).at(0) != 0;
        return !open.empty();
    }

    Simulator& sim_;
    const BfsTree& tree_;
    const SteinerInstance& inst_;
    const WeightedGraph& g_;
    const int n_;
    const Q eps_;
    const int sigma_;
    Territory terr_;
    std::vector<char> act_;
    std::vector<char> fedge_;
    std::vector<std::vector<Candidate>> held_;  // candidates of this growth phase that can still merge
    DistResult res_;
};

}  // namespace

DistResult moat_grow_sublinear(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst, const Q& eps,
                               const DistOptions& opt) {
    if (eps <= 0) throw InvalidEpsilon("epsilon must be positive");
    check_dist_input(inst, opt.tie);
    int sigma = opt.sigma ? *opt.sigma
                          : sublinear_sigma(all_pairs_shortest_paths(inst.graph).s, inst.t(), inst.n());
    return Sublinear(sim, tree, inst, eps, std::max(1, sigma)).run();
}

DistResult moat_grow_sublinear(const SteinerInstance& inst, const Q& eps, const DistOptions& opt) {
    if (eps <= 0) throw InvalidEpsilon("epsilon must be positive");
    check_dist_input(inst, opt.tie);
    Simulator sim(inst.graph, opt.sim);
    auto tree = build_bfs_tree(sim);
    auto res = moat_grow_sublinear(sim, tree, inst, eps, opt);
    res.stats = sim.stats();
    return res;
}

DistResult full_deterministic(const SteinerInstance& inst, const Q& eps, const DistOptions& opt) {
    if (eps <= 0) throw InvalidEpsilon("epsilon must be positive");
    if (opt.tie != TieBreak::Regional) throw InvalidSpec("the distributed algorithms use the regional tie-break");
    Simulator sim(inst.graph, opt.sim);
    auto tree = build_bfs_tree(sim);
    auto ic = transform_cr_to_ic(sim, tree, inst);
    auto minimal = transform_to_minimal(sim, tree, ic);
    auto res = moat_grow_sublinear(sim, tree, minimal, eps, opt);
    auto pruned = fast_prune(sim, tree, minimal, res.forest, opt.sigma);
    res.solution = make_solution(inst, pruned.solution.edges);
    res.stats = sim.stats();
    return res;
}

}  // namespace steiner
