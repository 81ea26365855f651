#include "steiner/harness.hpp"

#include "steiner/errors.hpp"
#include "steiner/moat_central.hpp"
#include "steiner/moat_dist.hpp"
#include "steiner/oracle.hpp"
#include "steiner/tree_embed.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

namespace steiner {

namespace {

const std::pair<Algo, const char*> kAlgoNames[] = {
    {Algo::CentralExact, "central-exact"}, {Algo::CentralEps, "central-eps"}, {Algo::Dist, "dist"},
    {Algo::Sublinear, "sublinear"},        {Algo::Randomized, "randomized"},
};

SteinerInstance central_input(const SteinerInstance& inst) {
    auto ic = inst.kind == InstanceKind::CR ? cr_to_ic_reference(inst) : inst;
    return minimalize_reference(ic);
}

int log2_ceil(int n) {
    int l = 0;
    while ((1 << l) < n) ++l;
    return l;
}

}  // namespace

std::string to_string(Algo a) {
    for (auto [x, name] : kAlgoNames)
        if (x == a) return name;
    return "?";
}

Algo parse_algo(const std::string& s) {
    for (auto [x, name] : kAlgoNames)
        if (s == name) return x;
    throw InvalidSpec("unknown algorithm '" + s + "'");
}

bool uses_eps(Algo a) { return a == Algo::CentralEps || a == Algo::Sublinear; }

SolveOutcome solve(const SteinerInstance& inst, const SolveConfig& cfg) {
    SolveOutcome out;
    switch (cfg.algo) {
        case Algo::CentralExact: {
            auto res = moat_grow_exact(central_input(inst));
            out.solution = make_solution(inst, res.solution.edges);
            out.merge_phases = static_cast<int>(res.trace.phases.size());
            out.dual = dual_lower_bound(res.trace);
            break;
        }
        case Algo::CentralEps: {
            auto res = moat_grow_rounded(central_input(inst), cfg.eps);
            out.solution = make_solution(inst, res.solution.edges);
            out.merge_phases = static_cast<int>(res.trace.phases.size());
            out.growth_phases = res.schedule.growth_phases();
            out.dual = dual_lower_bound(res.trace);
            break;
        }
        case Algo::Dist: {
            Simulator sim(inst.graph, cfg.sim);
            auto tree = build_bfs_tree(sim);
            auto minimal = transform_to_minimal(sim, tree, transform_cr_to_ic(sim, tree, inst));
            auto res = moat_grow_distributed(sim, tree, minimal, TieBreak::Regional);
            out.solution = make_solution(inst, res.solution.edges);
            out.merge_phases = res.merge_phases;
            out.stats = sim.stats();
            break;
        }
        case Algo::Sublinear: {
            DistOptions opt;
            opt.sim = cfg.sim;
            auto res = full_deterministic(inst, cfg.eps, opt);
            out.solution = res.solution;
            out.merge_phases = res.merge_phases;
            out.growth_phases = res.sublinear.growth_phases;
            out.stats = res.stats;
            out.detail["sigma"] = res.sublinear.sigma;
            out.detail["max_large_moats"] = res.sublinear.max_large_moats;
            out.detail["max_small_diameter"] = res.sublinear.max_small_diameter;
            break;
        }
        case Algo::Randomized: {
            RandomizedOptions opt;
            opt.sim = cfg.sim;
            opt.repetition_factor = cfg.repetition_factor;
            auto res = full_randomized(inst, cfg.seed, opt);
            out.solution = res.solution;
            out.stats = res.stats;
            out.detail["mode"] = res.mode == TreeMode::Full ? "full" : "truncate";
            out.detail["best"] = res.best;
            out.detail["max_relay"] = res.max_relay;
            out.detail["uncovered"] = res.uncovered;
            out.detail["stage2_edges"] = res.stage2_edges;
            out.detail["stage2_rounds"] = res.stage2_rounds;
            auto& reps = out.detail["repetitions"] = nlohmann::json::array();
            for (const auto& r : res.reps)
                reps.push_back({{"seed", r.seed},
                                {"beta", to_string(r.beta)},
                                {"weight", r.weight},
                                {"feasible", r.feasible},
                                {"tree_sum", to_string(r.tree_cost.sum_of_subtrees)},
                                {"tree_union", to_string(r.tree_cost.union_weight)},
                                {"relay", r.relay}});
            break;
        }
    }
    return out;
}

InstanceProfile profile(const SteinerInstance& inst) {
    InstanceProfile p;
    auto m = all_pairs_shortest_paths(inst.graph);
    p.n = inst.n();
    p.m = inst.graph.m();
    p.t = inst.t();
    p.k = static_cast<int>(inst.components().size());
    p.s = m.s;
    p.D = m.D;
    p.WD = m.WD;
    return p;
}

std::string csv_header(bool wall_time) {
    std::string h =
        "instance,family,n,m,t,k,s,D,WD,algorithm,eps,seed,weight,feasible,opt,ratio,rounds,messages,max_edge_words,"
        "merge_phases,growth_phases,error";
    if (wall_time) h += ",wall_ms";
    return h;
}

std::string csv_line(const ResultRow& r, bool wall_time) {
    std::ostringstream o;
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    o << r.instance << ',' << r.family << ',' << r.p.n << ',' << r.p.m << ',' << r.p.t << ',' << r.p.k << ',' << r.p.s
      << ',' << r.p.D << ',' << r.p.WD << ',' << r.algorithm << ',' << r.eps << ',' << r.seed << ',' << r.weight << ','
      << (r.feasible ? 1 : 0) << ',' << (r.opt ? std::to_string(*r.opt) : "") << ','
      << (r.ratio ? to_string(*r.ratio) : "") << ',' << r.rounds << ',' << r.messages << ',' << r.max_edge_words << ','
      << r.merge_phases << ',' << r.growth_phases << ',' << err;
    if (wall_time) o << ',' << r.wall_ms;
    return o.str();
}

nlohmann::json to_json(const ResultRow& r) {
    nlohmann::json j{{"instance", r.instance}, {"family", r.family},  {"n", r.p.n},
                     {"m", r.p.m},             {"t", r.p.t},            {"k", r.p.k},
                     {"s", r.p.s},             {"D", r.p.D},            {"WD", r.p.WD},
                     {"algorithm", r.algorithm}, {"eps", r.eps},        {"seed", r.seed},
                     {"weight", r.weight},     {"feasible", r.feasible}, {"rounds", r.rounds},
                     {"messages", r.messages}, {"max_edge_words", r.max_edge_words},
                     {"merge_phases", r.merge_phases}, {"growth_phases", r.growth_phases}};
    if (r.opt) j["opt"] = *r.opt;
    if (r.ratio) j["ratio"] = to_string(*r.ratio);
    if (!r.error.empty()) j["error"] = r.error;
    if (r.wall_ms >= 0) j["wall_ms"] = r.wall_ms;
    return j;
}

nlohmann::json to_json(const GenSpec& g) {
    return {{"family", g.family}, {"n", g.n},           {"m", g.m},       {"rows", g.rows},
            {"cols", g.cols},     {"radius", g.radius}, {"wmin", g.wmin}, {"wmax", g.wmax},
            {"k", g.k},           {"per_component", g.per_component},     {"heavy_middle", g.heavy_middle},
            {"count", g.count},   {"seed", g.seed}};
}

GenSpec gen_spec_from_json(const nlohmann::json& j) {
    GenSpec g;
    g.family = j.value("family", g.family);
    g.n = j.value("n", g.n);
    g.m = j.value("m", g.m);
    g.rows = j.value("rows", g.rows);
    g.cols = j.value("cols", g.cols);
    g.radius = j.value("radius", g.radius);
    g.wmin = j.value("wmin", g.wmin);
    g.wmax = j.value("wmax", g.wmax);
    g.k = j.value("k", g.k);
    g.per_component = j.value("per_component", g.per_component);
    g.heavy_middle = j.value("heavy_middle", g.heavy_middle);
    g.count = j.value("count", g.count);
    g.seed = j.value("seed", g.seed);
    return g;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    auto& fam = j["families"] = nlohmann::json::array();
    for (const auto& g : c.families) fam.push_back(to_json(g));
    auto& al = j["algos"] = nlohmann::json::array();
    for (auto a : c.algos) al.push_back(to_string(a));
    auto& ep = j["eps"] = nlohmann::json::array();
    for (const auto& e : c.eps) ep.push_back(to_string(e));
    j["seeds"] = c.seeds;
    j["budget_words"] = c.budget_words;
    j["round_cap"] = c.round_cap;
    j["with_opt"] = c.with_opt;
    j["wall_time"] = c.wall_time;
    j["threads"] = c.threads;
    return j;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.contains("families")) {
        c.families.clear();
        for (const auto& g : j["families"]) c.families.push_back(gen_spec_from_json(g));
    }
    if (j.contains("algos")) {
        c.algos.clear();
        for (const auto& a : j["algos"]) c.algos.push_back(parse_algo(a.get<std::string>()));
    }
    if (j.contains("eps")) {
        c.eps.clear();
        for (const auto& e : j["eps"]) c.eps.push_back(parse_rational(e.is_string() ? e.get<std::string>() : e.dump()));
    }
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.budget_words = j.value("budget_words", c.budget_words);
    c.round_cap = j.value("round_cap", c.round_cap);
    c.with_opt = j.value("with_opt", c.with_opt);
    c.wall_time = j.value("wall_time", c.wall_time);
    c.threads = j.value("threads", c.threads);
    for (const auto& e : c.eps)
        if (e <= 0) throw InvalidEpsilon("epsilon must be positive");
    return c;
}

std::vector<NamedInstance> expand_families(const std::vector<GenSpec>& families) {
    std::vector<NamedInstance> out;
    for (size_t f = 0; f < families.size(); ++f) {
        auto list = gen_family(families[f]);
        for (size_t i = 0; i < list.size(); ++i)
            out.push_back({families[f].family + "-" + std::to_string(f) + "-" + std::to_string(i), families[f].family,
                           std::move(list[i])});
    }
    return out;
}

std::vector<ResultRow> run_rows(const std::vector<NamedInstance>& instances, const ExperimentConfig& cfg) {
    struct Job {
        size_t inst;
        Algo algo;
        Q eps;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (size_t i = 0; i < instances.size(); ++i)
        for (auto a : cfg.algos) {
            std::vector<Q> eps = uses_eps(a) ? cfg.eps : std::vector<Q>{Q(0)};
            std::vector<std::uint64_t> seeds = a == Algo::Randomized ? cfg.seeds : std::vector<std::uint64_t>{0};
            for (const auto& e : eps)
                for (auto s : seeds) jobs.push_back({i, a, e, s});
        }
    std::vector<InstanceProfile> profiles(instances.size());
    std::vector<std::optional<Weight>> opts(instances.size());
    std::vector<ResultRow> rows(jobs.size());

    auto prepare = [&](size_t i) {
        profiles[i] = profile(instances[i].inst);
        if (cfg.with_opt && oracle_admits(instances[i].inst)) opts[i] = exact_optimum_weight(instances[i].inst);
    };
    auto run_job = [&](size_t idx) {
        const Job& jb = jobs[idx];
        const auto& ni = instances[jb.inst];
        ResultRow r;
        r.instance = ni.id;
        r.family = ni.family;
        r.p = profiles[jb.inst];
        r.algorithm = to_string(jb.algo);
        r.eps = uses_eps(jb.algo) ? to_string(jb.eps) : "";
        r.seed = jb.seed;
        r.opt = opts[jb.inst];
        SolveConfig sc;
        sc.algo = jb.algo;
        sc.eps = jb.eps;
        sc.seed = jb.seed;
        sc.sim.budget_words = cfg.budget_words;
        sc.sim.round_cap = cfg.round_cap;
        sc.sim.seed = jb.seed;
        auto t0 = std::chrono::steady_clock::now();
        try {
            auto out = solve(ni.inst, sc);
            r.weight = out.solution.weight;
            r.feasible = out.solution.feasible;
            r.rounds = out.stats.rounds;
            r.messages = out.stats.messages;
            r.max_edge_words = out.stats.max_edge_words;
            r.merge_phases = out.merge_phases;
            r.growth_phases = out.growth_phases;
            if (r.opt) r.ratio = approx_ratio(r.weight, *r.opt);
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        if (cfg.wall_time)
            r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        rows[idx] = std::move(r);
    };

    const int threads = std::max(1, cfg.threads);
    auto parallel = [&](size_t count, const std::function<void(size_t)>& fn) {
        if (threads == 1) {
            for (size_t i = 0; i < count; ++i) fn(i);
            return;
        }
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (size_t i; (i = next++) < count;) fn(i);
            });
        for (auto& th : pool) th.join();
    };
    parallel(instances.size(), prepare);
    parallel(jobs.size(), run_job);
    return rows;
}

std::vector<ResultRow> run_suite(const ExperimentConfig& cfg) { return run_rows(expand_families(cfg.families), cfg); }

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool wall_time) {
    out << csv_header(wall_time) << '\n';
    for (const auto& r : rows) out << csv_line(r, wall_time) << '\n';
}

std::vector<NamedInstance> oracle_corpus(int count, std::uint64_t seed) {
    static const char* kinds[] = {"gnm", "geometric", "grid", "path", "cliques", "requests"};
    std::vector<NamedInstance> out;
    std::uint64_t attempt = 0;
    while (static_cast<int>(out.size()) < count) {
        const int idx = static_cast<int>(out.size());
        const std::string kind = kinds[idx % 6];
        Rng rng(mix_seed(seed, attempt++));
        GenSpec g;
        g.k = static_cast<int>(uniform_int(rng, 1, 3));
        g.per_component = static_cast<int>(uniform_int(rng, 2, 3));
        g.wmin = 1;
        g.wmax = uniform_int(rng, 1, 3) == 1 ? 1 : 12;
        SteinerInstance inst;
        if (kind == "requests") {
            const int n = static_cast<int>(uniform_int(rng, 6, 12));
            auto graph = gen_random_connected(n, std::min(24, n + static_cast<int>(uniform_int(rng, 0, n / 2))), 1, 12, rng);
            std::vector<std::vector<int>> req(n);
            const int pairs = static_cast<int>(uniform_int(rng, 1, 4));
            for (int p = 0; p < pairs; ++p) {
                int a = static_cast<int>(uniform_int(rng, 0, n - 1));
                int b = static_cast<int>(uniform_int(rng, 0, n - 1));
                if (a == b) continue;
                req[a].push_back(b);
                req[b].push_back(a);
            }
            inst = SteinerInstance::cr(std::move(graph), std::move(req));
        } else {
            g.family = kind;
            if (kind == "grid") {
                g.rows = 3;
                g.cols = static_cast<int>(uniform_int(rng, 3, 4));
            } else if (kind == "cliques") {
                g.per_component = 2;
                g.n = static_cast<int>(uniform_int(rng, 7, 10));
            } else {
                g.n = static_cast<int>(uniform_int(rng, 6, 12));
                g.radius = 0.5;
            }
            if (kind == "path") g.heavy_middle = uniform_int(rng, 0, 1) == 1;
            try {
                inst = gen_instance(g, rng());
            } catch (const InvalidSpec&) {
                continue;  // too few nodes for k * per_component terminals
            }
        }
        if (!oracle_admits(inst)) continue;
        out.push_back({"oracle-" + std::to_string(idx), kind, std::move(inst)});
    }
    return out;
}

double round_model(Algo a, const InstanceProfile& p, const Q& eps) {
    switch (a) {
        case Algo::CentralExact:
        case Algo::CentralEps:
            return 1;
        case Algo::Dist:
            return static_cast<double>(p.s + p.D + 1) * (2 * p.k + 1);
        case Algo::Sublinear: {
            double sigma = sublinear_sigma(p.s, p.t, p.n);
            double phases = growth_phase_bound(eps, p.WD) + p.k + 1;
            return (sigma + p.D + p.k + 1) * phases;
        }
        case Algo::Randomized: {
            double reps = std::max(1, log2_ceil(p.n));
            double levels = virtual_tree_levels(p.WD) + 1;
            return (std::sqrt(static_cast<double>(p.n)) + p.D + p.k + 1) * levels * reps;
        }
    }
    return 1;
}

nlohmann::json to_json(const Envelope& e) { return {{"rounds", e.rounds}, {"relay_c", e.relay_c}}; }

Envelope envelope_from_json(const nlohmann::json& j) {
    Envelope e;
    e.rounds = j.at("rounds").get<std::map<std::string, double>>();
    e.relay_c = j.value("relay_c", 0.0);
    return e;
}

Envelope calibrate_envelope(const std::vector<ResultRow>& rows) {
    Envelope e;
    for (const auto& r : rows) {
        if (!r.error.empty()) continue;
        Algo a = parse_algo(r.algorithm);
        double ratio = r.rounds / round_model(a, r.p, r.eps.empty() ? Q(1) : parse_rational(r.eps));
        double& slot = e.rounds[Envelope::key(a, r.family)];
        slot = std::max(slot, ratio);
    }
    return e;
}

std::vector<std::string> envelope_violations(const Envelope& e, const std::vector<ResultRow>& rows, double slack) {
    std::vector<std::string> bad;
    for (const auto& r : rows) {
        if (!r.error.empty()) continue;
        Algo a = parse_algo(r.algorithm);
        auto it = e.rounds.find(Envelope::key(a, r.family));
        double ratio = r.rounds / round_model(a, r.p, r.eps.empty() ? Q(1) : parse_rational(r.eps));
        if (it == e.rounds.end()) {
            bad.push_back(r.instance + " " + r.algorithm + ": no calibrated envelope for family " + r.family);
        } else if (ratio > slack * it->second + 1e-9) {
            std::ostringstream o;
            o << r.instance << ' ' << r.algorithm << ": rounds " << r.rounds << " exceed " << slack << " x envelope";
            bad.push_back(o.str());
        }
    }
    return bad;
}

}  // namespace steiner
