#include "steiner/congest.hpp"

#include "steiner/errors.hpp"

#include <algorithm>
#include <ostream>

namespace steiner {

void Outbox::send(int port, Message m) {
    if (port < 0 || port >= static_cast<int>(slots_.size())) throw InvalidGraph("send on a port that does not exist");
    if (used_[port])
        throw BudgetViolation("node " + std::to_string(v_) + " sent two messages on one edge in a round");
    if (m.words() > budget_)
        throw BudgetViolation("node " + std::to_string(v_) + " sent " + std::to_string(m.words()) +
                              " words (tag " + std::to_string(m.tag) + "), budget is " + std::to_string(budget_));
    used_[port] = 1;
    slots_[port] = std::move(m);
}

void Outbox::send_to(int neighbor, Message m) {
    int p = g_->port_of(v_, neighbor);
    if (p < 0) throw InvalidGraph("send to a non-neighbor");
    send(p, std::move(m));
}

void Outbox::send_all(const Message& m) {
    for (int p = 0; p < static_cast<int>(slots_.size()); ++p) send(p, m);
}

long long RunStats::stage_rounds(const std::string& prefix) const {
    long long r = 0;
    for (const auto& s : stages)
        if (s.name.compare(0, prefix.size(), prefix) == 0) r += s.rounds;
    return r;
}

void RunStats::append(const RunStats& o) {
    rounds += o.rounds;
    messages += o.messages;
    words += o.words;
    max_edge_words = std::max(max_edge_words, o.max_edge_words);
    messages_per_round.insert(messages_per_round.end(), o.messages_per_round.begin(), o.messages_per_round.end());
    if (!o.termination_round.empty()) termination_round = o.termination_round;
    stages.insert(stages.end(), o.stages.begin(), o.stages.end());
}

nlohmann::json to_json(const RunStats& s) {
    nlohmann::json j{{"rounds", s.rounds},
                     {"messages", s.messages},
                     {"words", s.words},
                     {"max_edge_words", s.max_edge_words}};
    j["stages"] = nlohmann::json::array();
    for (const auto& st : s.stages)
        j["stages"].push_back({{"name", st.name},
                               {"rounds", st.rounds},
                               {"messages", st.messages},
                               {"words", st.words},
                               {"max_words", st.max_words}});
    return j;
}

Simulator::Simulator(const WeightedGraph& g, SimConfig cfg) : g_(g), cfg_(cfg) {
    if (cfg_.budget_words < 1) throw InvalidSpec("word budget must be positive");
    rngs_.reserve(g.n());
    for (int v = 0; v < g.n(); ++v) rngs_.emplace_back(mix_seed(cfg_.seed, static_cast<std::uint64_t>(v)));
    stats_.termination_round.assign(g.n(), 0);
}

long long Simulator::run(const std::string& stage, NodeProgram& p) {
    const int n = g_.n();
    StageStats st;
    st.name = stage;
    std::vector<long long> term_round(n, 0);
    for (int v = 0; v < n; ++v) p.init(v);
    auto all_done = [&] {
        for (int v = 0; v < n; ++v)
            if (!p.terminated(v)) return false;
        return true;
    };
    std::vector<Inbox> inbox(n);
    std::vector<Outbox> outs;
    outs.reserve(n);
    for (int v = 0; v < n; ++v) outs.emplace_back(g_, v, cfg_.budget_words);
    long long local = 0;
    while (!all_done() && !p.halted()) {
        if (cfg_.round_cap > 0 && stats_.rounds >= cfg_.round_cap)
            throw RoundCapExceeded("round cap " + std::to_string(cfg_.round_cap) + " reached in stage " + stage);
        ++local;
        std::vector<char> awake(n);
        for (int v = 0; v < n; ++v) {
            awake[v] = !p.terminated(v);
            auto& o = outs[v];
            std::fill(o.used_.begin(), o.used_.end(), 0);
            if (awake[v]) p.send(v, o);
        }
        long long msgs = 0;
        for (int v = 0; v < n; ++v) inbox[v].clear();
        for (int v = 0; v < n; ++v) {
            auto& o = outs[v];
            const auto& adj = g_.adj(v);
            for (int port = 0; port < static_cast<int>(adj.size()); ++port) {
                if (!o.used_[port]) continue;
                int to = adj[port].to;
                int w = o.slots_[port].words();
                ++msgs;
                stats_.words += w;
                st.words += w;
                st.max_words = std::max(st.max_words, w);
                stats_.max_edge_words = std::max(stats_.max_edge_words, w);
                if (cfg_.trace)
                    *cfg_.trace << stats_.rounds + 1 << ',' << v << ',' << to << ',' << w << ',' << o.slots_[port].tag << '\n';
                inbox[to].push_back(Delivery{g_.port_of(to, v), v, std::move(o.slots_[port])});
                o.slots_[port] = Message{};
            }
        }
        for (int v = 0; v < n; ++v) {
            // a terminated node wakes up if something arrives
            if (awake[v] || !inbox[v].empty()) {
                std::sort(inbox[v].begin(), inbox[v].end(),
                          [](const Delivery& a, const Delivery& b) { return a.port < b.port; });
                p.receive(v, inbox[v]);
            }
            if (!p.terminated(v)) term_round[v] = local + 1;
        }
        ++stats_.rounds;  // round() counts completed rounds, also while one is in progress
        stats_.messages += msgs;
        st.messages += msgs;
        stats_.messages_per_round.push_back(msgs);
    }
    st.rounds = local;
    stats_.stages.push_back(st);
    // a node still running at a halt is counted as stopping in the last round
    for (int v = 0; v < n; ++v) stats_.termination_round[v] = std::min(term_round[v], local);
    return local;
}

}  // namespace steiner
