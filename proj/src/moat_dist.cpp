#include "steiner/moat_dist.hpp"

#include "moat_common.hpp"
#include "steiner/errors.hpp"

#include <algorithm>
#include <map>
#include <memory>

namespace steiner {

using namespace detail;

nlohmann::json to_json(const DistPhaseLog& p) {
    nlohmann::json j{{"j", p.j}, {"growth", to_string(p.growth)}, {"rounds", p.rounds}};
    if (p.growth_phase > 0) j["growth_phase"] = p.growth_phase;
    j["collected"] = nlohmann::json::array();
    for (const auto& c : p.collected) j["collected"].push_back(to_json(c));
    j["accepted"] = nlohmann::json::array();
    for (const auto& c : p.accepted) j["accepted"].push_back(to_json(c));
    static const char* names[] = {"unassigned", "active_region", "cell", "inactive_region"};
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (size_t u = 0; u < p.status.size(); ++u)
        nodes.push_back({{"status", names[static_cast<int>(p.status[u])]},
                         {"owner", p.cell_owner[u]},
                         {"dist", to_string(p.dist[u])}});
    return j;
}

SteinerInstance transform_cr_to_ic(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst) {
    if (inst.kind == InstanceKind::IC) return inst;
    const int n = inst.n();
    std::vector<std::vector<UpItem>> items(n);
    for (int v = 0; v < n; ++v)
        for (int w : inst.requests[v])
            if (w != v) items[v].push_back(UpItem{{Message(kTagPair, {std::min(v, w), std::max(v, w)})}});
    // a pair joining two already connected nodes carries no information
    std::vector<std::unique_ptr<Dsu>> seen(n);
    auto dsu_at = [&](int v) -> Dsu& {
        if (!seen[v]) seen[v] = std::make_unique<Dsu>(n);
        return *seen[v];
    };
    UpcastHooks h;
    h.less = [](const UpItem& a, const UpItem& b) {
        return std::make_pair(a.parts[0].at(0), a.parts[0].at(1)) < std::make_pair(b.parts[0].at(0), b.parts[0].at(1));
    };
    h.forward = [&](int v, const UpItem& x) { return dsu_at(v).unite(x.parts[0].id(0), x.parts[0].id(1)); };
    auto at = ordered_upcast(sim, tree, std::move(items), h, "transform/cr-gather");
    std::vector<Message> pairs;
    Dsu& root = dsu_at(tree.root);
    for (auto& it : at[tree.root])
        if (root.unite(it.parts[0].id(0), it.parts[0].id(1))) pairs.push_back(it.parts[0]);
    auto known = broadcast_from_root(sim, tree, pairs, "transform/cr-broadcast");

    Dsu comp(n);
    std::vector<char> term(n, 0);
    for (const auto& m : known) {
        comp.unite(m.id(0), m.id(1));
        term[m.id(0)] = term[m.id(1)] = 1;
    }
    std::vector<int> smallest(n, -1);
    for (int v = 0; v < n; ++v)
        if (term[v] && smallest[comp.find(v)] < 0) smallest[comp.find(v)] = v;
    std::vector<int> labels(n, kNoLabel);
    for (int v = 0; v < n; ++v)
        if (term[v]) labels[v] = smallest[comp.find(v)];
    return SteinerInstance::ic(inst.graph, labels);
}

SteinerInstance transform_to_minimal(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst) {
    if (inst.kind != InstanceKind::IC) throw InvalidSpec("transform_to_minimal expects an input-component instance");
    const int n = inst.n();
    std::vector<std::vector<UpItem>> items(n);
    for (int v = 0; v < n; ++v)
        if (inst.label[v] != kNoLabel) items[v].push_back(UpItem{{Message(kTagLabel, {inst.label[v], v})}});
    // two terminals per label are enough to know the label is not a singleton
    std::vector<std::map<std::int64_t, int>> sent(n);
    UpcastHooks h;
    h.less = [](const UpItem& a, const UpItem& b) {
        return std::make_pair(a.parts[0].at(0), a.parts[0].at(1)) < std::make_pair(b.parts[0].at(0), b.parts[0].at(1));
    };
    h.forward = [&](int v, const UpItem& x) { return ++sent[v][x.parts[0].at(0)] <= 2; };
    auto at = ordered_upcast(sim, tree, std::move(items), h, "transform/minimal-gather");
    std::map<std::int64_t, int> count;
    for (const auto& it : at[tree.root]) ++count[it.parts[0].at(0)];
    std::vector<Message> singles;
    for (auto [lab, c] : count)
        if (c == 1) singles.push_back(Message(kTagLabel, {lab}));
    auto known = broadcast_from_root(sim, tree, singles, "transform/minimal-broadcast");
    std::vector<int> labels = inst.label;
    for (const auto& m : known)
        for (auto& l : labels)
            if (l == m.at(0)) l = kNoLabel;
    return SteinerInstance::ic(inst.graph, labels);
}

// Every node learns all (v, label) pairs.
static MoatBook learn_terminals(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst) {
    std::vector<std::vector<Message>> items(inst.n());
    for (int v = 0; v < inst.n(); ++v)
        if (inst.label[v] != kNoLabel) items[v].push_back(Message(kTagTerminal, {v, inst.label[v]}));
    auto all = gather_everywhere(
        sim, tree, std::move(items), [](const Message& a, const Message& b) { return a.at(0) < b.at(0); }, "terminals");
    std::vector<std::pair<int, int>> tl;
    for (const auto& m : all) tl.push_back({m.id(0), m.id(1)});
    return MoatBook(tl);
}

DistResult moat_grow_distributed(Simulator& sim, const BfsTree& tree, const SteinerInstance& inst, TieBreak tie) {
    check_dist_input(inst, tie);
    const auto& g = inst.graph;
    const int n = g.n();
    MoatBook book = learn_terminals(sim, tree, inst);
    Territory terr(g, book.terminals());
    std::vector<Candidate> fc;
    DistResult res;

    int j = 0;
    while (book.any_active()) {
        ++j;
        long long start = sim.round();
        const std::string stage = "phase" + std::to_string(j);
        auto before = book.activity();
        auto pd = decompose_phase(sim, tree, terr, book.activity_by_node(n), j, stage);

        // ordered filtering towards the root
        std::vector<std::unique_ptr<Dsu>> seen(n);
        auto dsu_at = [&](int v) -> Dsu& {
            if (!seen[v]) {
                seen[v] = std::make_unique<Dsu>(book.t());
                for (int ti = 0; ti < book.t(); ++ti) seen[v]->unite(ti, book.rep(ti));
            }
            return *seen[v];
        };
        std::vector<std::vector<UpItem>> items(n);
        for (int u = 0; u < n; ++u)
            for (const auto& c : pd.cands[u]) items[u].push_back(UpItem{{encode_candidate(c)}});
        DistPhaseLog log;
        log.j = j;
        UpcastHooks h;
        h.less = item_less;
        h.forward = [&](int v, const UpItem& x) {
            auto c = decode_candidate(x.parts[0]);
            return dsu_at(v).unite(book.index(c.v), book.index(c.w));
        };
        h.at_root = [&](int v, const UpItem& x) {
            auto c = decode_candidate(x.parts[0]);
            log.collected.push_back(c);
            if (!dsu_at(v).unite(book.index(c.v), book.index(c.w))) return false;
            log.accepted.push_back(c);
            book.refresh(book.merge(c.v, c.w));
            return book.activity() != before;
        };
        ordered_upcast(sim, tree, std::move(items), h, stage + "/filter");
        STEINER_CHECK(!log.accepted.empty(), "merge phase without a merge");
        STEINER_CHECK(book.activity() != before, "merge phase ended without an activity change");

        // broadcast F_c^(j), then local updates
        std::vector<Message> acc;
        for (const auto& c : log.accepted) acc.push_back(encode_candidate(c, kTagAccepted));
        broadcast_from_root(sim, tree, acc, stage + "/broadcast");
        log.growth = log.accepted.back().what;
        end_phase_local(g, terr, pd, log.growth);
        fc.insert(fc.end(), log.accepted.begin(), log.accepted.end());

        log.status = pd.status;
        log.cell_owner = pd.cell_owner;
        log.dist = pd.dist;
        log.rounds = sim.round() - start;
        res.phases.push_back(std::move(log));
    }
    res.merge_phases = j;

    // F_min locally, then token backtracing
    auto keep = minimal_candidates(fc, book);
    auto edges = materialize_paths(sim, terr, keep, "paths");
    std::sort(edges.begin(), edges.end());
    res.forest = edges;
    // paths of different candidates can share region-tree edges
    res.solution = fast_prune(sim, tree, inst, edges, std::nullopt).solution;
    return res;
}

DistResult moat_grow_distributed(const SteinerInstance& inst, const DistOptions& opt) {
    check_dist_input(inst, opt.tie);
    Simulator sim(inst.graph, opt.sim);
    auto tree = build_bfs_tree(sim);
    auto res = moat_grow_distributed(sim, tree, inst, opt.tie);
    res.stats = sim.stats();
    return res;
}

}  // namespace steiner
