#include "doctest.h"
#include "test_util.hpp"

#include "steiner/errors.hpp"
#include "steiner/moat_central.hpp"
#include "steiner/oracle.hpp"

using namespace steiner;
using steiner::testing::make_graph;
using steiner::testing::small_instance;

namespace {

SteinerInstance all_terminal_instance(std::uint64_t seed, int n, int m) {
    Rng rng(seed);
    auto g = gen_random_connected(n, m, 1, 20, rng);
    return SteinerInstance::ic(std::move(g), std::vector<int>(n, 0));
}

// Union of the balls B(v, r_v) restricted to edge e: covered length.
Q ball_union_on_edge(const WeightedGraph& g, const GraphMetrics& m, const std::vector<int>& term,
                     const std::vector<Q>& radius, int e) {
    const auto& ed = g.edge(e);
    Q w(ed.w), a(0), b(0);
    for (size_t i = 0; i < term.size(); ++i) {
        Q ra = radius[i] - Q(m.dist(term[i], ed.u));
        Q rb = radius[i] - Q(m.dist(term[i], ed.v));
        if (ra > a) a = ra;
        if (rb > b) b = rb;
    }
    Q c = a + b;
    return c > w ? w : c;
}

}  // namespace

TEST_CASE("exact moat growing on hand instances") {
    SUBCASE("single edge") {
        auto inst = SteinerInstance::ic(make_graph(2, {{0, 1, 4}}), {0, 0});
        auto r = moat_grow_exact(inst);
        REQUIRE(r.trace.i_max() == 1);
        CHECK(r.trace.steps[0].mu == Q(2));
        CHECK(r.solution.edges == std::vector<int>{0});
        CHECK(r.solution.weight == 4);
        CHECK(dual_lower_bound(r.trace) == Q(4));
        CHECK(exact_optimum_weight(inst) == 4);
    }
    SUBCASE("star with two terminals") {
        // c = 0, leaves x, y, z = 1, 2, 3
        auto g = make_graph(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}});
        auto inst = SteinerInstance::ic(std::move(g), {kNoLabel, 7, 7, kNoLabel});
        for (auto tie : {TieBreak::Regional, TieBreak::Lexicographic}) {
            auto r = moat_grow_exact(inst, tie);
            REQUIRE(r.trace.i_max() == 1);
            CHECK(r.trace.steps[0].mu == Q(1));
            CHECK(r.trace.steps[0].path == std::vector<int>{1, 0, 2});
            CHECK(r.solution.weight == 2);
            CHECK(r.solution.weight == exact_optimum_weight(inst));
        }
    }
    SUBCASE("no terminals") {
        auto inst = SteinerInstance::ic(make_graph(2, {{0, 1, 3}}), {kNoLabel, kNoLabel});
        auto r = moat_grow_exact(inst);
        CHECK(r.trace.i_max() == 0);
        CHECK(r.solution.edges.empty());
        CHECK(dual_lower_bound(r.trace) == 0);
    }
    SUBCASE("non-minimal instance rejected") {
        auto inst = SteinerInstance::ic(make_graph(2, {{0, 1, 3}}), {0, 1});
        CHECK_THROWS_AS(moat_grow_exact(inst), NotMinimalInstance);
        CHECK_THROWS_AS(moat_grow_rounded(inst, Q(1)), NotMinimalInstance);
    }
    SUBCASE("bad epsilon") {
        auto inst = SteinerInstance::ic(make_graph(2, {{0, 1, 3}}), {0, 0});
        CHECK_THROWS_AS(moat_grow_rounded(inst, Q(0)), InvalidEpsilon);
        CHECK_THROWS_AS(moat_grow_rounded(inst, Q(-1, 2)), InvalidEpsilon);
    }
}

TEST_CASE("an inactive moat can be reactivated by a merge") {
    // 0 and 1 satisfied quickly; 2-3 far apart with 1 on the way
    auto g = make_graph(5, {{0, 1, 1}, {1, 2, 3}, {2, 4, 10}, {4, 3, 10}});
    auto inst = SteinerInstance::ic(std::move(g), {0, 0, 1, 1, kNoLabel});
    auto r = moat_grow_exact(inst);
    CHECK(check_trace_invariants(r.trace, inst).empty());
    CHECK(r.solution.feasible);
    bool saw_reactivation = false;
    for (const auto& st : r.trace.steps)
        for (size_t ti = 0; ti < st.active.size(); ++ti)
            saw_reactivation = saw_reactivation || (!st.active_before[ti] && st.active[ti]);
    CHECK(saw_reactivation);
    CHECK(r.solution.weight <= 2 * exact_optimum_weight(inst));
}

TEST_CASE("all-terminal single-label instances yield an MST") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto inst = all_terminal_instance(seed, 8 + static_cast<int>(seed), 20 + 2 * static_cast<int>(seed));
        for (auto tie : {TieBreak::Regional, TieBreak::Lexicographic}) {
            auto r = moat_grow_exact(inst, tie);
            CHECK(r.solution.weight == mst_weight(inst.graph));
        }
        auto r2 = moat_grow_rounded(inst, Q(1, 2));
        CHECK(r2.solution.weight == mst_weight(inst.graph));
    }
}

TEST_CASE("exact moat growing: ratio, dual and trace invariants") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        int n = 5 + static_cast<int>(seed % 8);
        int m = std::min(n * (n - 1) / 2, n + static_cast<int>(seed % 9));
        int k = std::min(1 + static_cast<int>(seed % 3), n / 2);
        int per = 3 * k <= n ? 2 + static_cast<int>(seed % 2) : 2;
        auto inst = small_instance(seed, n, m, k, per);
        if (!inst.is_minimal() || !oracle_admits(inst)) continue;
        Weight opt = exact_optimum_weight(inst);
        for (auto tie : {TieBreak::Regional, TieBreak::Lexicographic}) {
            auto r = moat_grow_exact(inst, tie);
            INFO("seed " << seed);
            CHECK(r.solution.feasible);
            CHECK(r.solution.acyclic);
            Q dual = dual_lower_bound(r.trace);
            if (inst.t() > 0) CHECK(Q(r.solution.weight) < 2 * dual);
            CHECK(dual <= Q(opt));
            CHECK(r.solution.weight <= 2 * opt);
            CHECK(r.trace.merges() <= inst.t() - 1);
            CHECK(static_cast<int>(r.trace.phases.size()) <= 2 * inst.k());
            if (tie == TieBreak::Regional) CHECK(check_trace_invariants(r.trace, inst) == "");
        }
        ++checked;
    }
    CHECK(checked >= 60);
}

TEST_CASE("both tie-breaks pick the same growth sequence") {
    for (std::uint64_t seed = 200; seed < 260; ++seed) {
        auto inst = small_instance(seed, 9, 14, 2, 3);
        if (!inst.is_minimal()) continue;
        auto a = moat_grow_exact(inst, TieBreak::Regional);
        auto b = moat_grow_exact(inst, TieBreak::Lexicographic);
        REQUIRE(a.trace.i_max() == b.trace.i_max());
        for (int i = 0; i < a.trace.i_max(); ++i) CHECK(a.trace.steps[i].mu == b.trace.steps[i].mu);
        CHECK(dual_lower_bound(a.trace) == dual_lower_bound(b.trace));
    }
}

TEST_CASE("region decomposition matches the union of moat balls") {
    int phases = 0;
    for (std::uint64_t seed = 300; seed < 340; ++seed) {
        int n = 8 + static_cast<int>(seed % 10);
        auto inst = small_instance(seed, n, n - 1 + static_cast<int>(seed % 12), 3, 2);
        if (!inst.is_minimal()) continue;
        const auto& g = inst.graph;
        auto m = all_pairs_shortest_paths(g);
        auto r = moat_grow_exact(inst);
        const auto& tr = r.trace;
        const auto& term = tr.terminals;
        CentralDecomposition dec(g, m, term);
        std::vector<int> fixed_parent(g.n(), -2);
        for (const auto& ph : tr.phases) {
            std::vector<char> act(g.n(), 0);
            std::vector<Q> rad(g.n(), Q(0));
            for (size_t ti = 0; ti < term.size(); ++ti) {
                act[term[ti]] = ph.active[ti];
                rad[term[ti]] = ph.radius[ti];
            }
            dec.begin_phase(ph.j, act, rad);
            dec.end_phase(ph.growth);
            const auto& end_radius = tr.steps[ph.last_step - 1].radius;
            for (int u = 0; u < g.n(); ++u) {
                bool in_ball = false;
                for (size_t ti = 0; ti < term.size(); ++ti)
                    in_ball = in_ball || Q(m.dist(term[ti], u)) <= end_radius[ti];
                INFO("seed " << seed << " phase " << ph.j << " node " << u);
                CHECK((dec.owner(u) >= 0) == in_ball);
                if (dec.owner(u) >= 0) {
                    // trees only extend
                    if (fixed_parent[u] != -2) CHECK(dec.region_parent(u) == fixed_parent[u]);
                    fixed_parent[u] = dec.region_parent(u);
                }
            }
            for (int e = 0; e < g.m(); ++e) {
                INFO("seed " << seed << " phase " << ph.j << " edge " << e);
                CHECK(dec.covered(e) == ball_union_on_edge(g, m, term, end_radius, e));
            }
            ++phases;
        }
    }
    CHECK(phases > 40);
}

TEST_CASE("candidate geometry helpers") {
    // active x at 0, y active at distance 2 through an edge with gap 4: meet halfway of (4 + 2)
    CHECK(candidate_weight(Q(0), Q(2), Q(4)) == Q(3));
    CHECK(split_share(Q(0), Q(2), Q(4)) == Q(3));
    // y far behind on its side: x claims the whole gap
    CHECK(split_share(Q(0), Q(10), Q(4)) == Q(4));
    CHECK(split_share(Q(10), Q(0), Q(4)) == Q(0));
    // inactive y
    CHECK(candidate_weight(Q(1), std::nullopt, Q(5)) == Q(6));
    CHECK(claim_extension(Q(1), std::nullopt, Q(5), Q(3)) == Q(2));
    CHECK(claim_extension(Q(1), Q(1), Q(5), Q(10)) == Q(5, 2));
    CHECK(claim_extension(Q(4), Q(1), Q(5), Q(3)) == Q(0));
}

TEST_CASE("rounded moat growing") {
    SUBCASE("growth phase bound arithmetic") {
        CHECK(growth_phase_bound(Q(1), 32) == 8);
        CHECK(growth_phase_bound(Q(1), 2) == 1);
        CHECK(growth_phase_bound(Q(1, 2), 2) == 1);
        CHECK(growth_phase_bound(Q(1), 1) == 0);
    }
    SUBCASE("coincides with exact growth when no checkpoint binds") {
        auto g = make_graph(4, {{0, 1, 1}, {1, 2, 5}, {2, 3, 1}});
        auto inst = SteinerInstance::ic(std::move(g), {0, 0, 1, 1});
        auto a = moat_grow_exact(inst);
        auto b = moat_grow_rounded(inst, Q(1));
        CHECK(a.trace.forest == b.trace.forest);
        CHECK(a.solution.edges == b.solution.edges);
        REQUIRE(b.schedule.growth_phases() == 1);
        CHECK(b.schedule.thresholds[0] == Q(1));
    }
    SUBCASE("huge epsilon: exact growth until the first checkpoint at 1") {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            auto inst = small_instance(seed, 10, 16, 2, 3);
            if (!inst.is_minimal()) continue;
            auto a = moat_grow_exact(inst);
            auto b = moat_grow_rounded(inst, Q(1000000));
            const auto& sa = a.trace.steps;
            const auto& sb = b.trace.steps;
            REQUIRE(!b.schedule.checkpoint_steps.empty());
            int first = b.schedule.checkpoint_steps[0];
            CHECK(sb[first - 1].cumulative == Q(1));
            for (int i = 0; i + 1 < first; ++i) {
                REQUIRE(i < a.trace.i_max());
                CHECK(sa[i].mu == sb[i].mu);
                CHECK(sa[i].v == sb[i].v);
                CHECK(sa[i].w == sb[i].w);
            }
            // thresholds follow 1, 1+eps/2, ...
            Q th(1);
            for (const auto& t : b.schedule.thresholds) {
                CHECK(t == th);
                th *= Q(1) + Q(1000000) / 2;
            }
            for (size_t c = 0; c < b.schedule.checkpoint_steps.size(); ++c)
                CHECK(sb[b.schedule.checkpoint_steps[c] - 1].cumulative == b.schedule.thresholds[c]);
        }
    }
    SUBCASE("checkpoint fires on equality") {
        // two terminals at distance 2 touch at growth exactly 1 = first threshold
        auto inst = SteinerInstance::ic(make_graph(2, {{0, 1, 2}}), {0, 0});
        auto r = moat_grow_rounded(inst, Q(1));
        REQUIRE(r.trace.i_max() >= 2);
        CHECK(r.trace.steps[0].checkpoint);
        CHECK(r.trace.steps[0].mu == Q(1));
        CHECK(!r.trace.steps[1].checkpoint);
        CHECK(r.trace.steps[1].mu == Q(0));
        CHECK(r.solution.weight == 2);
        // last merge at WD/2 = 1 = (1+eps/2)^0, so one more checkpoint than the proof's count
        CHECK(r.schedule.growth_phases() == 2);
        CHECK(growth_phase_bound(Q(1), 2) == 1);
    }
    SUBCASE("ratio and dual on random instances") {
        int checked = 0;
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            int n = 5 + static_cast<int>(seed % 8);
            int m = std::min(n * (n - 1) / 2, n + static_cast<int>(seed % 9));
            auto inst = small_instance(seed + 1000, n, m, std::min(1 + static_cast<int>(seed % 3), n / 2), 2);
            if (!inst.is_minimal() || !oracle_admits(inst)) continue;
            Weight opt = exact_optimum_weight(inst);
            auto wd = all_pairs_shortest_paths(inst.graph).WD;
            for (Q eps : {Q(1, 10), Q(1, 2), Q(1)}) {
                auto r = moat_grow_rounded(inst, eps);
                INFO("seed " << seed << " eps " << to_string(eps));
                CHECK(r.solution.feasible);
                CHECK(Q(r.solution.weight) <= (2 + eps) * Q(opt));
                CHECK(check_trace_invariants(r.trace, inst) == "");
                if (wd > 3) CHECK(r.schedule.growth_phases() <= growth_phase_bound(eps, wd));
            }
            ++checked;
        }
        CHECK(checked >= 60);
    }
}

TEST_CASE("rounded dual overshoots before the first checkpoint") {
    // Labels {1,5} and {0,3}. 1-5 merge at growth 1/2 and their moat keeps growing
    // (and counting) until the checkpoint at 1, which the (1+eps/2) dual bound ignores.
    auto g = make_graph(6, {{0, 2, 6}, {0, 5, 8}, {1, 3, 3}, {1, 5, 1}, {2, 3, 1}, {3, 4, 4}, {4, 5, 2}});
    auto inst = SteinerInstance::ic(std::move(g), {1, 0, kNoLabel, 1, kNoLabel, 0});
    REQUIRE(exact_optimum_weight(inst) == 8);
    auto exact = moat_grow_exact(inst);
    CHECK(dual_lower_bound(exact.trace) == Q(8));
    auto r = moat_grow_rounded(inst, Q(1, 10));
    REQUIRE(r.trace.steps.size() >= 2);
    CHECK(!r.trace.steps[0].checkpoint);
    CHECK(r.trace.steps[0].cumulative == Q(1, 2));
    CHECK(r.trace.steps[1].checkpoint);
    CHECK(r.trace.steps[1].active_moats == 3);
    CHECK(dual_lower_bound(r.trace) > Q(21, 20) * 8);
    CHECK(r.solution.weight == 8);
}

TEST_CASE("trace JSON round trip of key fields") {
    auto inst = small_instance(7, 8, 12, 2, 2);
    REQUIRE(inst.is_minimal());
    auto r = moat_grow_rounded(inst, Q(1, 2));
    auto j = to_json(r.trace);
    CHECK(j["i_max"].get<int>() == r.trace.i_max());
    CHECK(j["steps"].size() == r.trace.steps.size());
    CHECK(j["forest"].get<std::vector<int>>() == r.trace.forest);
    CHECK(parse_rational(j["steps"][0]["mu"].get<std::string>()) == r.trace.steps[0].mu);
    auto js = to_json(r.schedule);
    CHECK(js["growth_phases"].get<int>() == r.schedule.growth_phases());
}
