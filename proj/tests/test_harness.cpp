#include "doctest.h"

#include "steiner/errors.hpp"
#include "steiner/generators.hpp"
#include "steiner/harness.hpp"
#include "steiner/oracle.hpp"
#include "moat_common.hpp"

#include <fstream>
#include <sstream>

using namespace steiner;

namespace {

std::string data_path(const std::string& name) { return std::string(STEINER_TEST_DATA) + "/" + name; }

std::string suite_csv(const ExperimentConfig& cfg) {
    std::ostringstream o;
    write_csv(o, run_suite(cfg), cfg.wall_time);
    return o.str();
}

bool uses_edge(const std::vector<int>& edges, int e) { return std::find(edges.begin(), edges.end(), e) != edges.end(); }

}  // namespace

TEST_CASE("grid family with four 2-terminal components") {
    GenSpec g;
    g.family = "grid";
    g.rows = 4;
    g.cols = 4;
    g.wmin = g.wmax = 1;
    g.k = 4;
    g.per_component = 2;
    auto inst = gen_instance(g, 11);
    CHECK(inst.n() == 16);
    CHECK(inst.k() == 4);
    CHECK(inst.t() == 8);
}

TEST_CASE("heavy-middle path has s = n - 1") {
    for (int n : {5, 8, 13}) {
        GenSpec g;
        g.family = "path";
        g.n = n;
        g.k = 1;
        auto inst = gen_instance(g, n);
        CHECK(all_pairs_shortest_paths(inst.graph).s == n - 1);
    }
}

TEST_CASE("geometric sweep: denser radius, smaller diameters") {
    GenSpec g;
    g.family = "geometric";
    g.n = 30;
    g.k = 3;
    int prev_D = 1 << 30;
    Weight prev_WD = 1 << 30;
    for (double r : {0.2, 0.3, 0.45, 0.7, 1.5}) {
        g.radius = r;
        auto inst = gen_instance(g, 99);
        auto m = all_pairs_shortest_paths(inst.graph);
        CAPTURE(r);
        CHECK(m.D <= prev_D);
        CHECK(m.WD <= prev_WD);
        CHECK(inst.k() == 3);
        prev_D = m.D;
        prev_WD = m.WD;
    }
    CHECK(prev_D == 1);
    // k follows its own knob
    for (int k = 1; k <= 5; ++k) {
        g.k = k;
        CHECK(gen_instance(g, 5).k() == k);
    }
}

TEST_CASE("generator errors") {
    GenSpec g;
    g.family = "nope";
    CHECK_THROWS_AS(gen_instance(g, 1), InvalidSpec);
    g.family = "gnm";
    g.n = 4;
    g.k = 3;
    CHECK_THROWS_AS(gen_instance(g, 1), InvalidSpec);
    CHECK_THROWS_AS(gen_sd_gadget_cr(3, {4}, {}, 2), InvalidSpec);
}

TEST_CASE("set-disjointness gadgets") {
    const int n = 3;
    SUBCASE("disjoint CR: OPT <= 2n+2 without a heavy edge") {
        auto inst = gen_sd_gadget_cr(n, {1, 3}, {2}, 2);
        auto opt = exact_optimum(inst);
        CHECK(opt.weight <= 2 * n + 2);
        for (int e : sd_gadget_heavy_edges(inst, n)) CHECK(!uses_edge(opt.edges, e));
        CHECK(inst.graph.edge(sd_gadget_heavy_edges(inst, n)[0]).w == sd_gadget_heavy_weight(n, 2));
    }
    SUBCASE("intersecting CR: a heavy edge is forced") {
        auto inst = gen_sd_gadget_cr(n, {1, 2}, {2}, 2);
        auto opt = exact_optimum(inst);
        auto heavy = sd_gadget_heavy_edges(inst, n);
        CHECK((uses_edge(opt.edges, heavy[0]) || uses_edge(opt.edges, heavy[1])));
        CHECK(opt.weight >= sd_gadget_heavy_weight(n, 2));
    }
    SUBCASE("disjoint IC: empty output") {
        auto inst = gen_sd_gadget_ic(n, {1}, {2, 3});
        CHECK(exact_optimum_weight(inst) == 0);
        CHECK(check_feasible({}, inst));
        auto hit = gen_sd_gadget_ic(n, {1, 2}, {2});
        CHECK(exact_optimum_weight(hit) > 0);
    }
}

TEST_CASE("algorithm names round trip") {
    for (auto a : {Algo::CentralExact, Algo::CentralEps, Algo::Dist, Algo::Sublinear, Algo::Randomized})
        CHECK(parse_algo(to_string(a)) == a);
    CHECK_THROWS_AS(parse_algo("greedy"), InvalidSpec);
}

TEST_CASE("experiment config JSON round trip") {
    ExperimentConfig c;
    GenSpec g;
    g.family = "cliques";
    g.n = 17;
    c.families = {g};
    c.algos = {Algo::Dist, Algo::Randomized};
    c.eps = {Q(1, 10), Q(1)};
    c.seeds = {3, 4};
    c.budget_words = 6;
    auto back = experiment_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    auto bad = to_json(c);
    bad["eps"] = {"0"};
    CHECK_THROWS_AS(experiment_from_json(bad), InvalidEpsilon);
}

TEST_CASE("ratio column present iff OPT is") {
    ExperimentConfig c;
    GenSpec small;
    small.n = 8;
    small.count = 2;
    GenSpec big;
    big.n = 40;
    big.k = 8;
    c.families = {small, big};
    for (const auto& r : run_suite(c)) {
        CHECK(r.opt.has_value() == r.ratio.has_value());
        CHECK(r.error.empty());
        if (r.ratio) CHECK(*r.ratio <= 2);
    }
}

TEST_CASE("pinned mini config matches the golden CSV") {
    std::ifstream cfg_in(data_path("mini.json"));
    REQUIRE(cfg_in);
    auto cfg = experiment_from_json(nlohmann::json::parse(cfg_in));
    std::ifstream golden_in(data_path("mini.csv"));
    REQUIRE(golden_in);
    std::stringstream golden;
    golden << golden_in.rdbuf();
    auto csv = suite_csv(cfg);
    CHECK(csv == golden.str());
    // same rows whatever the thread count
    cfg.threads = cfg.threads == 1 ? 3 : 1;
    CHECK(suite_csv(cfg) == csv);
}

TEST_CASE("word budgets below the message schema fail deterministically") {
    ExperimentConfig c;
    GenSpec g;
    g.n = 10;
    c.families = {g};
    c.algos = {Algo::Dist, Algo::Sublinear};
    c.budget_words = 1;
    c.with_opt = false;
    auto rows = run_suite(c);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(!r.feasible);
        CHECK(r.error.find("budget is 1") != std::string::npos);
    }
    auto again = run_suite(c);
    CHECK(again[0].error == rows[0].error);
    CHECK(again[1].error == rows[1].error);

    // one word short of a candidate merge: everything before growth fits
    auto inst = gen_instance(g, 1);
    SolveConfig sc;
    sc.algo = Algo::Dist;
    sc.sim.budget_words = kDefaultBudgetWords - 1;
    try {
        solve(inst, sc);
        FAIL("expected a budget violation");
    } catch (const BudgetViolation& e) {
        const std::string tag = "(tag " + std::to_string(detail::kTagCandidate) + ")";
        CHECK(std::string(e.what()).find(tag) != std::string::npos);
    }
}

TEST_CASE("round cap aborts a run") {
    GenSpec g;
    g.n = 12;
    auto inst = gen_instance(g, 2);
    SolveConfig sc;
    sc.algo = Algo::Dist;
    sc.sim.round_cap = 5;
    CHECK_THROWS_AS(solve(inst, sc), RoundCapExceeded);
}

TEST_CASE("envelope calibration and checks") {
    ResultRow r;
    r.instance = "x";
    r.family = "gnm";
    r.algorithm = "dist";
    r.p.s = 2;
    r.p.D = 3;
    r.p.k = 1;
    r.rounds = 60;  // model (2+3+1)(2+1) = 18
    auto e = calibrate_envelope({r});
    CHECK(e.rounds.at("dist/gnm") == doctest::Approx(60.0 / 18));
    CHECK(envelope_violations(e, {r}, 1.5).empty());
    r.rounds = 91;
    CHECK(envelope_violations(e, {r}, 1.5).size() == 1);
    r.family = "grid";
    CHECK(envelope_violations(e, {r}, 1.5).size() == 1);
    e.relay_c = 1.75;
    auto back = envelope_from_json(to_json(e));
    CHECK(back.rounds == e.rounds);
    CHECK(back.relay_c == 1.75);
}

TEST_CASE("oracle corpus is admitted and reproducible") {
    auto a = oracle_corpus(24, 7);
    auto b = oracle_corpus(24, 7);
    REQUIRE(a.size() == 24);
    bool has_cr = false;
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(oracle_admits(a[i].inst));
        std::ostringstream x, y;
        write_instance(x, a[i].inst);
        write_instance(y, b[i].inst);
        CHECK(x.str() == y.str());
        has_cr |= a[i].inst.kind == InstanceKind::CR;
    }
    CHECK(has_cr);
}
