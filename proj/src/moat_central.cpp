#include "steiner/moat_central.hpp"

#include "steiner/dsu.hpp"
#include "steiner/errors.hpp"
#include "steiner/oracle.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace steiner {

std::string to_string(TieBreak t) { return t == TieBreak::Regional ? "regional" : "lexicographic"; }

TieBreak parse_tie_break(const std::string& s) {
    if (s == "regional") return TieBreak::Regional;
    if (s == "lexicographic" || s == "lex") return TieBreak::Lexicographic;
    throw InvalidSpec("unknown tie-break: " + s);
}

int MoatTrace::merges() const {
    int c = 0;
    for (const auto& s : steps) c += s.checkpoint ? 0 : 1;
    return c;
}

namespace {

struct Engine {
    const SteinerInstance& inst;
    const WeightedGraph& g;
    GraphMetrics metrics;
    TieBreak tie;
    std::optional<Q> eps;

    std::vector<int> term;      // node IDs
    std::vector<int> index_of;  // node -> terminal index or -1
    std::vector<int> moat;      // terminal index -> representative
    std::map<int, char> active; // representative -> activity
    std::map<int, int> label;   // representative -> label
    std::vector<Q> radius;
    Dsu forest_dsu;
    std::vector<int> forest;

    MoatTrace trace;
    GrowthSchedule schedule;

    Engine(const SteinerInstance& in, TieBreak t, std::optional<Q> e)
        : inst(in), g(in.graph), metrics(all_pairs_shortest_paths(in.graph)), tie(t), eps(std::move(e)),
          forest_dsu(in.graph.n()) {}

    int rep(int ti) const { return moat[ti]; }
    bool is_active(int ti) const { return active.at(moat[ti]); }

    std::vector<int> members(int r) const {
        std::vector<int> out;
        for (int ti = 0; ti < static_cast<int>(term.size()); ++ti)
            if (moat[ti] == r) out.push_back(ti);
        return out;
    }

    int count_label(int lab) const {
        int c = 0;
        for (const auto& [r, l] : label) c += l == lab ? 1 : 0;
        return c;
    }

    std::vector<char> terminal_activity() const {
        std::vector<char> a(term.size());
        for (size_t ti = 0; ti < term.size(); ++ti) a[ti] = is_active(static_cast<int>(ti));
        return a;
    }

    // Growth at which terminals a and b (different moats, at least one active) touch.
    std::optional<Q> touch(int a, int b) const {
        bool aa = is_active(a), ab = is_active(b);
        if (!aa && !ab) return std::nullopt;
        Q slack = Q(metrics.dist(term[a], term[b])) - radius[a] - radius[b];
        return aa && ab ? slack / 2 : slack;
    }

    void merge(int ti_v, int ti_w) {
        int rv = rep(ti_v), rw = rep(ti_w);
        int lv = label.at(rv), lw = label.at(rw);
        int nr = std::min(rv, rw);
        for (auto& r : moat)
            if (r == rv || r == rw) r = nr;
        active.erase(rv);
        active.erase(rw);
        label.erase(rv);
        label.erase(rw);
        for (auto& [r, l] : label)
            if (l == lw) l = lv;
        label[nr] = lv;
        active[nr] = 1;
    }

    void add_path(MoatStep& st) {
        for (int e : path_edges(g, st.path)) {
            const auto& ed = g.edge(e);
            if (forest_dsu.same(ed.u, ed.v)) continue;
            forest_dsu.unite(ed.u, ed.v);
            forest.push_back(e);
            st.added_edges.push_back(e);
        }
    }

    void snapshot(MoatStep& st) const {
        st.moat = moat;
        st.active.resize(term.size());
        st.label.resize(term.size());
        for (size_t ti = 0; ti < term.size(); ++ti) {
            st.active[ti] = active.at(moat[ti]);
            st.label[ti] = label.at(moat[ti]);
        }
        st.radius = radius;
    }

    void run() {
        if (!inst.is_minimal()) throw NotMinimalInstance("instance has a label with a single terminal");
        if (inst.kind != InstanceKind::IC) throw InvalidSpec("moat growing expects an input-component instance");
        term = inst.terminals();
        index_of.assign(g.n(), -1);
        for (size_t ti = 0; ti < term.size(); ++ti) {
            index_of[term[ti]] = static_cast<int>(ti);
            moat.push_back(static_cast<int>(ti));
            active[static_cast<int>(ti)] = 1;
            label[static_cast<int>(ti)] = inst.label[term[ti]];
        }
        radius.assign(term.size(), Q(0));
        trace.terminals = term;
        trace.tie_break = tie;
        trace.eps = eps;
        if (eps) schedule.eps = *eps;

        Q muhat(1);
        Q cumulative(0);
        std::optional<CentralDecomposition> decomp;
        if (tie == TieBreak::Regional) decomp.emplace(g, metrics, term);

        int j = 0;
        MoatPhase phase;
        Q phase_growth(0);
        int merge_phases_in_growth = 0;
        auto open_phase = [&](int first_step) {
            ++j;
            phase = MoatPhase{};
            phase.j = j;
            phase.first_step = first_step;
            phase.active = terminal_activity();
            phase.radius = radius;
            phase_growth = 0;
            if (decomp) {
                std::vector<char> act_node(g.n(), 0);
                std::vector<Q> rad_node(g.n(), Q(0));
                for (size_t ti = 0; ti < term.size(); ++ti) {
                    act_node[term[ti]] = phase.active[ti];
                    rad_node[term[ti]] = radius[ti];
                }
                decomp->begin_phase(j, act_node, rad_node);
            }
        };
        auto close_phase = [&](int last_step) {
            phase.last_step = last_step;
            phase.growth = phase_growth;
            if (decomp) decomp->end_phase(phase_growth);
            trace.phases.push_back(std::move(phase));
            ++merge_phases_in_growth;
        };

        const int t = static_cast<int>(term.size());
        bool any_active = t > 0;
        int i = 0;
        if (any_active) open_phase(1);
        while (any_active) {
            ++i;
            MoatStep st;
            st.i = i;
            st.phase = j;
            st.active_before = terminal_activity();
            for (const auto& [r, a] : active) st.active_moats += a ? 1 : 0;

            std::optional<Q> mu;
            int best_a = -1, best_b = -1;
            for (int a = 0; a < t; ++a)
                for (int b = a + 1; b < t; ++b) {
                    if (rep(a) == rep(b)) continue;
                    auto m = touch(a, b);
                    if (!m) continue;
                    STEINER_CHECK(*m >= 0, "negative growth between two moats");
                    // terminals are sorted by ID, so (a, b) scans pairs lexicographically
                    if (!mu || *m < *mu) {
                        mu = *m;
                        best_a = a;
                        best_b = b;
                    }
                }

            bool checkpoint = eps && (!mu || cumulative + *mu >= muhat);
            if (!checkpoint && !mu) throw InvariantViolation("active moat without a reachable partner");

            bool phase_ends = false;
            if (checkpoint) {
                st.checkpoint = true;
                st.mu = muhat - cumulative;
                // all moats grow first, activity is re-evaluated afterwards
                for (int ti = 0; ti < t; ++ti)
                    if (st.active_before[ti]) radius[ti] += st.mu;
                for (auto& [r, a] : active) a = count_label(label.at(r)) > 1 ? 1 : 0;
                schedule.thresholds.push_back(muhat);
                schedule.checkpoint_steps.push_back(i);
                muhat *= Q(1) + *eps / 2;
                phase_ends = true;
            } else {
                st.mu = *mu;
                for (int ti = 0; ti < t; ++ti)
                    if (st.active_before[ti]) radius[ti] += st.mu;
                int va = best_a, wb = best_b;
                if (tie == TieBreak::Regional) {
                    Q reach = phase_growth + st.mu;
                    const Candidate* pick = nullptr;
                    for (const auto& c : decomp->candidates()) {
                        if (c.what != reach) continue;
                        if (rep(index_of[c.v]) == rep(index_of[c.w])) continue;
                        pick = &c;
                        break;  // candidates are sorted
                    }
                    if (!pick) throw InvariantViolation("no candidate merge realizes the minimal growth");
                    va = index_of[pick->v];
                    wb = index_of[pick->w];
                    // the chosen pair must itself touch now; compare against pre-growth radii
                    Q slack = Q(metrics.dist(term[va], term[wb])) - (radius[va] - (st.active_before[va] ? st.mu : Q(0))) -
                              (radius[wb] - (st.active_before[wb] ? st.mu : Q(0)));
                    Q need = st.active_before[va] && st.active_before[wb] ? slack / 2 : slack;
                    STEINER_CHECK(need == st.mu, "candidate pair does not achieve the minimal growth");
                    st.path = decomp->path(*pick);
                    STEINER_CHECK(g.weight_of(path_edges(g, st.path)) == metrics.dist(term[va], term[wb]),
                                  "candidate path is not a least-weight path");
                    st.candidate = *pick;
                    phase.accepted.push_back(*pick);
                } else {
                    st.path = canonical_path(g, metrics, term[va], term[wb]);
                }
                st.v = term[va];
                st.w = term[wb];
                bool inactive_involved = !st.active_before[va] || !st.active_before[wb];
                add_path(st);
                merge(va, wb);
                if (!eps) {
                    int nr = rep(va);
                    active[nr] = count_label(label.at(nr)) > 1 ? 1 : 0;
                }
                if (eps) phase_ends = inactive_involved;
            }
            cumulative += st.mu;
            phase_growth += st.mu;
            st.cumulative = cumulative;
            snapshot(st);
            if (!eps) {
                for (int ti = 0; ti < t; ++ti)
                    if (st.active[ti] != st.active_before[ti]) phase_ends = true;
            }
            trace.steps.push_back(std::move(st));

            any_active = false;
            for (const auto& [r, a] : active) any_active = any_active || a;
            if (phase_ends || !any_active) {
                close_phase(i);
                if (checkpoint) {
                    schedule.merge_phases.push_back(merge_phases_in_growth);
                    merge_phases_in_growth = 0;
                }
                if (any_active) open_phase(i + 1);
            }
        }
        std::sort(forest.begin(), forest.end());
        trace.forest = forest;
    }
};

}  // namespace

MoatResult moat_grow_exact(const SteinerInstance& inst, TieBreak tie) {
    Engine eng(inst, tie, std::nullopt);
    eng.run();
    MoatResult r;
    r.solution = minimal_subforest(eng.forest, inst);
    r.trace = std::move(eng.trace);
    return r;
}

RoundedMoatResult moat_grow_rounded(const SteinerInstance& inst, const Q& eps, TieBreak tie) {
    if (eps <= 0) throw InvalidEpsilon("epsilon must be positive");
    Engine eng(inst, tie, eps);
    eng.run();
    RoundedMoatResult r;
    r.solution = minimal_subforest(eng.forest, inst);
    r.trace = std::move(eng.trace);
    r.schedule = std::move(eng.schedule);
    return r;
}

Q dual_lower_bound(const MoatTrace& trace) {
    Q sum(0);
    for (const auto& s : trace.steps) sum += Q(s.active_moats) * s.mu;
    return sum;
}

int growth_phase_bound(const Q& eps, Weight wd) {
    if (eps <= 0) throw InvalidEpsilon("epsilon must be positive");
    const Q base = Q(1) + eps / 2;
    const Q x = Q(wd) / 2;
    // ceil(log_base x) = smallest c with base^c >= x
    int c = 0;
    Q p(1);
    if (x >= 1) {
        while (p < x) {
            p *= base;
            ++c;
        }
    } else {
        while (p / base >= x) {
            p /= base;
            --c;
        }
    }
    return 1 + c;
}

std::string check_trace_invariants(const MoatTrace& trace, const SteinerInstance& inst) {
    const auto& g = inst.graph;
    const int t = static_cast<int>(trace.terminals.size());
    std::vector<Q> prev_radius(t, Q(0));
    std::vector<int> prev_moat(t);
    for (int ti = 0; ti < t; ++ti) prev_moat[ti] = ti;
    Dsu dsu(g.n());
    auto fail = [](int i, const std::string& what) { return "step " + std::to_string(i) + ": " + what; };
    for (const auto& st : trace.steps) {
        for (int ti = 0; ti < t; ++ti)
            if (st.radius[ti] < prev_radius[ti]) return fail(st.i, "radius decreased");
        // coarsening: terminals sharing a moat before still share one
        for (int a = 0; a < t; ++a)
            for (int b = a + 1; b < t; ++b)
                if (prev_moat[a] == prev_moat[b] && st.moat[a] != st.moat[b]) return fail(st.i, "moat split");
        for (int e : st.added_edges) {
            const auto& ed = g.edge(e);
            if (dsu.same(ed.u, ed.v)) return fail(st.i, "cycle in F");
            dsu.unite(ed.u, ed.v);
        }
        for (int a = 0; a < t; ++a)
            for (int b = a + 1; b < t; ++b) {
                bool same_moat = st.moat[a] == st.moat[b];
                bool same_comp = dsu.same(trace.terminals[a], trace.terminals[b]);
                if (same_moat != same_comp) return fail(st.i, "moats differ from components of F");
            }
        // an inactive moat holds whole input components
        for (int a = 0; a < t; ++a) {
            if (st.active[a]) continue;
            for (int b = 0; b < t; ++b)
                if (inst.label[trace.terminals[a]] == inst.label[trace.terminals[b]] && st.moat[a] != st.moat[b])
                    return fail(st.i, "inactive moat splits an input component");
        }
        prev_radius = st.radius;
        prev_moat = st.moat;
    }
    return {};
}

nlohmann::json to_json(const Candidate& c) {
    return {{"v", c.v}, {"w", c.w}, {"phase", c.phase}, {"what", to_string(c.what)}, {"x", c.x}, {"y", c.y}};
}

nlohmann::json to_json(const MoatTrace& t) {
    nlohmann::json j;
    j["terminals"] = t.terminals;
    j["tie_break"] = to_string(t.tie_break);
    if (t.eps) j["eps"] = to_string(*t.eps);
    j["i_max"] = t.i_max();
    j["forest"] = t.forest;
    auto qs = [](const std::vector<Q>& v) {
        std::vector<std::string> out;
        for (const auto& x : v) out.push_back(to_string(x));
        return out;
    };
    auto flags = [](const std::vector<char>& v) {
        std::vector<int> out(v.begin(), v.end());
        return out;
    };
    for (const auto& s : t.steps) {
        nlohmann::json js{{"i", s.i},
                          {"checkpoint", s.checkpoint},
                          {"mu", to_string(s.mu)},
                          {"cumulative", to_string(s.cumulative)},
                          {"phase", s.phase},
                          {"active_moats", s.active_moats},
                          {"moat", s.moat},
                          {"active", flags(s.active)},
                          {"label", s.label},
                          {"radius", qs(s.radius)}};
        if (!s.checkpoint) {
            js["v"] = s.v;
            js["w"] = s.w;
            js["path"] = s.path;
            js["added_edges"] = s.added_edges;
        }
        if (s.candidate) js["candidate"] = to_json(*s.candidate);
        j["steps"].push_back(std::move(js));
    }
    for (const auto& p : t.phases) {
        nlohmann::json jp{{"j", p.j},
                          {"first_step", p.first_step},
                          {"last_step", p.last_step},
                          {"growth", to_string(p.growth)},
                          {"active", flags(p.active)},
                          {"radius", qs(p.radius)}};
        jp["accepted"] = nlohmann::json::array();
        for (const auto& c : p.accepted) jp["accepted"].push_back(to_json(c));
        j["phases"].push_back(std::move(jp));
    }
    return j;
}

nlohmann::json to_json(const GrowthSchedule& s) {
    std::vector<std::string> th;
    for (const auto& x : s.thresholds) th.push_back(to_string(x));
    return {{"eps", to_string(s.eps)},
            {"thresholds", th},
            {"checkpoint_steps", s.checkpoint_steps},
            {"merge_phases", s.merge_phases},
            {"growth_phases", s.growth_phases()}};
}

}  // namespace steiner
