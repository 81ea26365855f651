// steiner: generate instances, run one algorithm, run a suite, dump traces.

#include "steiner/errors.hpp"
#include "steiner/generators.hpp"
#include "steiner/harness.hpp"
#include "steiner/moat_central.hpp"
#include "steiner/moat_dist.hpp"
#include "steiner/oracle.hpp"
#include "steiner/tree_embed.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace steiner;
using nlohmann::json;

namespace {

struct Common {
    std::string algo = "central-exact";
    std::string eps = "1/2";
    std::uint64_t seed = 1;
    int budget_words = kDefaultBudgetWords;
    long long round_cap = 0;
    std::string out;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--algo", c.algo, "central-exact | central-eps | dist | sublinear | randomized")
        ->check(CLI::IsMember({"central-exact", "central-eps", "dist", "sublinear", "randomized"}));
    app->add_option("--eps", c.eps, "epsilon for the rounded variants, e.g. 1/2");
    app->add_option("--seed", c.seed, "seed for randomized runs");
    app->add_option("--budget-words", c.budget_words, "words per edge per round");
    app->add_option("--round-cap", c.round_cap, "abort after this many rounds (0 = none)");
    app->add_option("--out", c.out, "output file (default stdout)");
}

SteinerInstance load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return read_instance(in);
}

// Writes to --out or stdout.
void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << text;
}

SolveConfig solve_config(const Common& c) {
    SolveConfig sc;
    sc.algo = parse_algo(c.algo);
    sc.eps = parse_rational(c.eps);
    if (sc.eps <= 0) throw InvalidEpsilon("epsilon must be positive");
    sc.seed = c.seed;
    sc.sim.budget_words = c.budget_words;
    sc.sim.round_cap = c.round_cap;
    sc.sim.seed = c.seed;
    return sc;
}

std::vector<int> parse_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(std::stoi(item));
    return out;
}

// decomposition: per-node region/cell state; filter: candidates per phase.
json stage_payload(const std::string& stage, const std::vector<DistPhaseLog>& phases) {
    json arr = json::array();
    for (const auto& p : phases) {
        json j = to_json(p);
        if (stage == "decomposition") {
            j.erase("collected");
            j.erase("accepted");
        } else {
            j.erase("nodes");
        }
        arr.push_back(std::move(j));
    }
    return arr;
}

int cmd_trace(const std::string& file, const Common& c, const std::string& stage, const std::string& messages) {
    auto inst = load(file);
    auto sc = solve_config(c);
    std::ofstream msg_out;
    if (!messages.empty()) {
        msg_out.open(messages);
        msg_out << "round,src,dst,words,tag\n";
        sc.sim.trace = &msg_out;
    }
    json j{{"algorithm", c.algo}, {"stage", stage}};
    switch (sc.algo) {
        case Algo::CentralExact:
        case Algo::CentralEps: {
            auto ic = minimalize_reference(inst.kind == InstanceKind::CR ? cr_to_ic_reference(inst) : inst);
            if (sc.algo == Algo::CentralExact) {
                auto res = moat_grow_exact(ic);
                j["trace"] = to_json(res.trace);
                j["solution"] = res.solution.edges;
            } else {
                auto res = moat_grow_rounded(ic, sc.eps);
                j["trace"] = to_json(res.trace);
                j["schedule"] = to_json(res.schedule);
                j["solution"] = res.solution.edges;
            }
            break;
        }
        case Algo::Dist:
        case Algo::Sublinear: {
            Simulator sim(inst.graph, sc.sim);
            auto tree = build_bfs_tree(sim);
            auto minimal = transform_to_minimal(sim, tree, transform_cr_to_ic(sim, tree, inst));
            DistOptions opt;
            auto res = sc.algo == Algo::Dist ? moat_grow_distributed(sim, tree, minimal, TieBreak::Regional)
                                             : moat_grow_sublinear(sim, tree, minimal, sc.eps, opt);
            if (stage == "prune") {
                auto pr = fast_prune(sim, tree, minimal, res.forest, std::nullopt);
                j["forest"] = res.forest;
                j["pruned"] = pr.solution.edges;
                j["sigma"] = pr.sigma;
                j["clusters"] = pr.clusters;
                j["local_components"] = pr.local_components;
            } else {
                j["phases"] = stage_payload(stage, res.phases);
                j["forest"] = res.forest;
            }
            j["stats"] = to_json(sim.stats());
            break;
        }
        case Algo::Randomized: {
            Simulator sim(inst.graph, sc.sim);
            auto tree = build_bfs_tree(sim);
            auto minimal = transform_to_minimal(sim, tree, transform_cr_to_ic(sim, tree, inst));
            auto metrics = all_pairs_shortest_paths(inst.graph);
            TreeOptions to;
            to.mode = metrics.s * metrics.s > inst.n() ? TreeMode::Truncate : TreeMode::Full;
            auto vt = build_virtual_tree(sim, tree, metrics.WD, mix_seed(c.seed, 0), to);
            j["virtual_tree"] = to_json(vt);
            auto s1 = stage1_select(sim, tree, vt, minimal);
            json ph = json::array();
            for (const auto& p : s1.phases)
                ph.push_back({{"i", p.i}, {"purged", p.purged}, {"holders", p.holders},
                              {"destinations", p.destinations}, {"added", p.added}, {"rounds", p.rounds}});
            j["stage1"] = {{"phases", ph}, {"forest", s1.forest}, {"weight", s1.weight}};
            j["stats"] = to_json(sim.stats());
            break;
        }
    }
    emit(c.out, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steiner forest approximation in a simulated CONGEST network"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate instances");
    GenSpec spec;
    std::string gen_out, gadget, set_a, set_b;
    int gadget_n = 3;
    Weight rho = 2;
    gen->add_option("--family", spec.family, "gnm | geometric | grid | path | cliques | mst");
    gen->add_option("--n", spec.n, "nodes");
    gen->add_option("--m", spec.m, "edges (gnm)");
    gen->add_option("--rows", spec.rows);
    gen->add_option("--cols", spec.cols);
    gen->add_option("--radius", spec.radius, "geometric connection radius");
    gen->add_option("--wmin", spec.wmin);
    gen->add_option("--wmax", spec.wmax);
    gen->add_option("--k", spec.k, "input components");
    gen->add_option("--per", spec.per_component, "terminals per component");
    gen->add_flag("--heavy-middle,!--no-heavy-middle", spec.heavy_middle);
    gen->add_option("--count", spec.count, "number of instances");
    gen->add_option("--seed", spec.seed);
    gen->add_option("--gadget", gadget, "cr | ic: set-disjointness gadget instead of a family")
        ->check(CLI::IsMember({"cr", "ic"}));
    gen->add_option("--gadget-n", gadget_n);
    gen->add_option("--A", set_a, "comma-separated subset of 1..n");
    gen->add_option("--B", set_b, "comma-separated subset of 1..n");
    gen->add_option("--rho", rho, "approximation factor the heavy edges defeat");
    gen->add_option("--out", gen_out, "file, or directory when --count > 1");

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "run one algorithm on an instance file");
    Common sc;
    std::string solve_file;
    bool with_opt = false;
    solve_cmd->add_option("instance", solve_file)->required();
    add_common(solve_cmd, sc);
    solve_cmd->add_flag("--opt", with_opt, "also compute the exact optimum (small instances)");

    // suite
    auto* suite = app.add_subcommand("suite", "run a JSON experiment config");
    Common uc;
    std::string config_file, json_out, calibrate;
    int threads = 0;
    bool wall_time = false;
    suite->add_option("config", config_file)->required();
    add_common(suite, uc);
    suite->add_option("--json", json_out, "also write rows as JSON");
    suite->add_option("--threads", threads, "worker threads (overrides the config)");
    suite->add_flag("--wall-time", wall_time, "add a wall_ms column");
    suite->add_option("--calibrate", calibrate, "write a round envelope calibrated on these rows");

    // trace
    auto* trace = app.add_subcommand("trace", "dump per-phase state of one run");
    Common tc;
    std::string trace_file, stage = "filter", messages;
    trace->add_option("instance", trace_file)->required();
    add_common(trace, tc);
    trace->add_option("--stage", stage, "decomposition | filter | prune")
        ->check(CLI::IsMember({"decomposition", "filter", "prune"}));
    trace->add_option("--messages", messages, "CSV of every message (round,src,dst,words,tag)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            std::vector<SteinerInstance> list;
            if (!gadget.empty()) {
                auto A = parse_list(set_a), B = parse_list(set_b);
                list.push_back(gadget == "cr" ? gen_sd_gadget_cr(gadget_n, A, B, rho) : gen_sd_gadget_ic(gadget_n, A, B));
            } else {
                list = gen_family(spec);
            }
            if (list.size() == 1) {
                std::ostringstream o;
                write_instance(o, list[0]);
                emit(gen_out, o.str());
            } else {
                if (gen_out.empty()) throw InvalidSpec("--out directory required for --count > 1");
                std::filesystem::create_directories(gen_out);
                for (size_t i = 0; i < list.size(); ++i) {
                    std::ofstream f(std::filesystem::path(gen_out) / (spec.family + "-" + std::to_string(i) + ".txt"));
                    write_instance(f, list[i]);
                }
            }
            return 0;
        }
        if (*solve_cmd) {
            auto inst = load(solve_file);
            auto out = solve(inst, solve_config(sc));
            json j{{"algorithm", sc.algo},
                   {"edges", out.solution.edges},
                   {"weight", out.solution.weight},
                   {"feasible", out.solution.feasible},
                   {"merge_phases", out.merge_phases},
                   {"growth_phases", out.growth_phases},
                   {"stats", to_json(out.stats)}};
            if (out.dual) j["dual"] = to_string(*out.dual);
            if (!out.detail.is_null()) j["detail"] = out.detail;
            if (with_opt) {
                Weight opt = exact_optimum_weight(inst);
                j["opt"] = opt;
                j["ratio"] = to_string(approx_ratio(out.solution.weight, opt));
            }
            emit(sc.out, j.dump(2) + "\n");
            return 0;
        }
        if (*suite) {
            std::ifstream in(config_file);
            if (!in) throw ParseError("cannot open " + config_file);
            auto cfg = experiment_from_json(json::parse(in));
            // flags given on the command line win over the config
            if (suite->count("--algo")) cfg.algos = {parse_algo(uc.algo)};
            if (suite->count("--eps")) cfg.eps = {parse_rational(uc.eps)};
            if (suite->count("--seed")) cfg.seeds = {uc.seed};
            if (suite->count("--budget-words")) cfg.budget_words = uc.budget_words;
            if (suite->count("--round-cap")) cfg.round_cap = uc.round_cap;
            if (threads > 0) cfg.threads = threads;
            if (wall_time) cfg.wall_time = true;
            auto rows = run_suite(cfg);
            std::ostringstream o;
            write_csv(o, rows, cfg.wall_time);
            emit(uc.out, o.str());
            if (!json_out.empty()) {
                json arr = json::array();
                for (const auto& r : rows) arr.push_back(to_json(r));
                emit(json_out, arr.dump(2) + "\n");
            }
            if (!calibrate.empty()) emit(calibrate, to_json(calibrate_envelope(rows)).dump(2) + "\n");
            int failed = 0;
            for (const auto& r : rows) failed += !r.error.empty() || !r.feasible;
            if (failed) std::cerr << failed << " of " << rows.size() << " rows failed\n";
            return failed ? 1 : 0;
        }
        if (*trace) return cmd_trace(trace_file, tc, stage, messages);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
