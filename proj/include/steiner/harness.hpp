#pragma once

#include "steiner/congest.hpp"
#include "steiner/generators.hpp"
#include "steiner/instance.hpp"
#include "steiner/rational.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace steiner {

enum class Algo { CentralExact, CentralEps, Dist, Sublinear, Randomized };

std::string to_string(Algo a);
Algo parse_algo(const std::string& s);
bool uses_eps(Algo a);

struct SolveConfig {
    Algo algo = Algo::CentralExact;
    Q eps = Q(1, 2);
    std::uint64_t seed = 1;
    SimConfig sim;
    int repetition_factor = 1;  // randomized only
};

struct SolveOutcome {
    ForestSolution solution;
    RunStats stats;  // zero rounds for the centralized algorithms
    int merge_phases = 0;
    int growth_phases = 0;
    std::optional<Q> dual;  // sum act_i mu_i of the central traces
    nlohmann::json detail;
};

// CR inputs go through the reference relabelling for the centralized
// algorithms and through the distributed transform otherwise.
SolveOutcome solve(const SteinerInstance& inst, const SolveConfig& cfg);

struct InstanceProfile {
    int n = 0, m = 0, t = 0, k = 0, s = 0, D = 0;
    Weight WD = 0;
};

InstanceProfile profile(const SteinerInstance& inst);

struct ResultRow {
    std::string instance;
    std::string family;
    InstanceProfile p;
    std::string algorithm;
    std::string eps;  // empty when unused
    std::uint64_t seed = 0;
    Weight weight = 0;
    bool feasible = false;
    std::optional<Weight> opt;
    std::optional<Q> ratio;  // present iff opt is
    long long rounds = 0;
    long long messages = 0;
    int max_edge_words = 0;
    int merge_phases = 0;
    int growth_phases = 0;
    std::string error;  // non-empty when the run threw
    double wall_ms = -1;  // < 0: not recorded
};

std::string csv_header(bool wall_time);
std::string csv_line(const ResultRow& r, bool wall_time);
nlohmann::json to_json(const ResultRow& r);

struct NamedInstance {
    std::string id;
    std::string family;
    SteinerInstance inst;
};

struct ExperimentConfig {
    std::vector<GenSpec> families;
    std::vector<Algo> algos{Algo::CentralExact};
    std::vector<Q> eps{Q(1, 2)};
    std::vector<std::uint64_t> seeds{1};
    int budget_words = kDefaultBudgetWords;
    long long round_cap = 0;
    bool with_opt = true;
    bool wall_time = false;
    int threads = 1;
};

nlohmann::json to_json(const GenSpec& g);
GenSpec gen_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

std::vector<NamedInstance> expand_families(const std::vector<GenSpec>& families);

// Rows in (instance, algorithm, eps, seed) order whatever the thread count.
std::vector<ResultRow> run_suite(const ExperimentConfig& cfg);
std::vector<ResultRow> run_rows(const std::vector<NamedInstance>& instances, const ExperimentConfig& cfg);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool wall_time);

// Small instances the exact oracle admits: a mix of random, geometric, grid,
// path, clique-star and request (CR) instances.
std::vector<NamedInstance> oracle_corpus(int count, std::uint64_t seed);

// Round-count regression envelope: per (algorithm, family) the largest
// rounds / model value seen on the calibration run.
double round_model(Algo a, const InstanceProfile& p, const Q& eps);

struct Envelope {
    std::map<std::string, double> rounds;  // key "algo/family"
    double relay_c = 0;                    // relayed paths / log2 n

    static std::string key(Algo a, const std::string& family) { return to_string(a) + "/" + family; }
};

nlohmann::json to_json(const Envelope& e);
Envelope envelope_from_json(const nlohmann::json& j);
Envelope calibrate_envelope(const std::vector<ResultRow>& rows);
// Rows whose rounds exceed `slack` times the envelope (rows of uncalibrated
// keys are reported as well).
std::vector<std::string> envelope_violations(const Envelope& e, const std::vector<ResultRow>& rows, double slack);

}  // namespace steiner
