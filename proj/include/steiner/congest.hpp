#pragma once

#include "steiner/graph.hpp"
#include "steiner/rational.hpp"
#include "steiner/rng.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace steiner {

inline constexpr int kDefaultBudgetWords = 8;

// Flat record: an optional small tag, integer words (IDs, labels, weights) and
// rationals (two words each: numerator, denominator).
struct Message {
    int tag = -1;
    std::vector<std::int64_t> ints;
    std::vector<Q> rats;

    Message() = default;
    explicit Message(int t) : tag(t) {}
    Message(int t, std::vector<std::int64_t> i, std::vector<Q> r = {}) : tag(t), ints(std::move(i)), rats(std::move(r)) {}

    int words() const { return static_cast<int>(ints.size()) + 2 * static_cast<int>(rats.size()) + (tag >= 0 ? 1 : 0); }
    std::int64_t at(size_t i) const { return ints.at(i); }
    int id(size_t i) const { return static_cast<int>(ints.at(i)); }
};

struct Delivery {
    int port;  // index into adj(v)
    int from;  // neighbor ID
    Message msg;
};
using Inbox = std::vector<Delivery>;

class Outbox {
public:
    Outbox(const WeightedGraph& g, int v, int budget) : g_(&g), v_(v), budget_(budget), slots_(g.degree(v)), used_(g.degree(v), 0) {}
    void send(int port, Message m);
    void send_to(int neighbor, Message m);
    void send_all(const Message& m);
    bool port_free(int port) const { return !used_[port]; }

private:
    friend class Simulator;
    const WeightedGraph* g_;
    int v_;
    int budget_;
    std::vector<Message> slots_;
    std::vector<char> used_;
};

// A synchronous protocol. Node state lives in the program, indexed by node;
// each callback may only touch the entry of node v.
class NodeProgram {
public:
    virtual ~NodeProgram() = default;
    virtual void init(int /*v*/) {}
    virtual void send(int v, Outbox& out) = 0;
    virtual void receive(int v, const Inbox& in) = 0;
    virtual bool terminated(int v) const = 0;
    // Lets a stage end early once the outcome is fixed at one node; callers pair
    // this with a broadcast that tells everyone.
    virtual bool halted() const { return false; }
};

struct StageStats {
    std::string name;
    long long rounds = 0;
    long long messages = 0;
    long long words = 0;
    int max_words = 0;
};

struct RunStats {
    long long rounds = 0;
    long long messages = 0;
    long long words = 0;
    int max_edge_words = 0;                    // max words over one directed edge in one round
    std::vector<long long> messages_per_round;
    std::vector<long long> termination_round;  // per node, last stage
    std::vector<StageStats> stages;

    long long stage_rounds(const std::string& prefix) const;
    void append(const RunStats& other);
};

nlohmann::json to_json(const RunStats& s);

struct SimConfig {
    int budget_words = kDefaultBudgetWords;
    long long round_cap = 0;  // cumulative over all stages; 0 = unlimited
    std::uint64_t seed = 0;
    std::ostream* trace = nullptr;  // CSV: round,src,dst,words,tag
};

class Simulator {
public:
    Simulator(const WeightedGraph& g, SimConfig cfg = {});

    const WeightedGraph& graph() const { return g_; }
    const SimConfig& config() const { return cfg_; }
    Rng& rng(int v) { return rngs_[v]; }
    long long round() const { return stats_.rounds; }
    const RunStats& stats() const { return stats_; }

    // Runs the program until every node has terminated; returns the rounds used.
    long long run(const std::string& stage, NodeProgram& p);

private:
    const WeightedGraph& g_;
    SimConfig cfg_;
    std::vector<Rng> rngs_;
    RunStats stats_;
};

}  // namespace steiner
