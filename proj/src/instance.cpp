#include "steiner/instance.hpp"

#include "steiner/dsu.hpp"
#include "steiner/errors.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

namespace steiner {

SteinerInstance SteinerInstance::ic(WeightedGraph g, std::vector<int> labels) {
    if (static_cast<int>(labels.size()) != g.n()) throw InvalidSpec("label vector size mismatch");
    SteinerInstance inst;
    inst.graph = std::move(g);
    inst.kind = InstanceKind::IC;
    inst.label = std::move(labels);
    return inst;
}

SteinerInstance SteinerInstance::cr(WeightedGraph g, std::vector<std::vector<int>> requests) {
    if (static_cast<int>(requests.size()) != g.n()) throw InvalidSpec("request vector size mismatch");
    SteinerInstance inst;
    inst.graph = std::move(g);
    inst.kind = InstanceKind::CR;
    for (auto& r : requests) {
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
    }
    inst.requests = std::move(requests);
    inst.label.assign(inst.graph.n(), kNoLabel);
    return inst;
}

std::vector<int> SteinerInstance::terminals() const {
    std::vector<char> term(n(), 0);
    if (kind == InstanceKind::IC) {
        for (int v = 0; v < n(); ++v) term[v] = label[v] != kNoLabel;
    } else {
        for (int v = 0; v < n(); ++v) {
            for (int w : requests[v]) {
                if (w == v) continue;
                term[v] = term[w] = 1;
            }
        }
    }
    std::vector<int> out;
    for (int v = 0; v < n(); ++v) if (term[v]) out.push_back(v);
    return out;
}

std::vector<int> SteinerInstance::label_set() const {
    std::set<int> s;
    for (int l : label) if (l != kNoLabel) s.insert(l);
    return {s.begin(), s.end()};
}

int SteinerInstance::k() const {
    return static_cast<int>(components().size());
}

std::vector<std::vector<int>> SteinerInstance::components() const {
    std::vector<std::vector<int>> out;
    if (kind == InstanceKind::IC) {
        std::map<int, std::vector<int>> by;
        for (int v = 0; v < n(); ++v) if (label[v] != kNoLabel) by[label[v]].push_back(v);
        for (auto& [l, vs] : by) out.push_back(vs);
        return out;
    }
    return cr_to_ic_reference(*this).components();
}

bool SteinerInstance::is_minimal() const {
    for (const auto& c : components()) if (c.size() == 1) return false;
    return true;
}

SteinerInstance cr_to_ic_reference(const SteinerInstance& inst) {
    if (inst.kind == InstanceKind::IC) return inst;
    const int n = inst.n();
    Dsu dsu(n);
    for (int v = 0; v < n; ++v) for (int w : inst.requests[v]) dsu.unite(v, w);
    auto terms = inst.terminals();
    std::vector<int> smallest(n, -1);
    for (int v : terms) {
        int r = dsu.find(v);
        if (smallest[r] < 0) smallest[r] = v;  // terms ascending
    }
    std::vector<int> labels(n, kNoLabel);
    for (int v : terms) labels[v] = smallest[dsu.find(v)];
    return SteinerInstance::ic(inst.graph, labels);
}

SteinerInstance minimalize_reference(const SteinerInstance& inst) {
    SteinerInstance ic = cr_to_ic_reference(inst);
    std::map<int, int> count;
    for (int l : ic.label) if (l != kNoLabel) ++count[l];
    for (auto& l : ic.label) if (l != kNoLabel && count[l] == 1) l = kNoLabel;
    return ic;
}

ForestSolution make_solution(const SteinerInstance& inst, std::vector<int> edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    ForestSolution sol;
    Dsu dsu(inst.n());
    for (int e : edges) {
        const auto& ed = inst.graph.edge(e);
        sol.weight += ed.w;
        if (!dsu.unite(ed.u, ed.v)) sol.acyclic = false;
    }
    sol.component.resize(inst.n());
    for (int v = 0; v < inst.n(); ++v) sol.component[v] = dsu.find(v);
    sol.feasible = true;
    for (const auto& comp : inst.components()) {
        for (int v : comp) {
            if (sol.component[v] != sol.component[comp.front()]) sol.feasible = false;
        }
    }
    sol.edges = std::move(edges);
    return sol;
}

SteinerInstance read_instance(std::istream& in) {
    WeightedGraph g = read_graph(in);
    std::string kind;
    if (!(in >> kind)) return SteinerInstance::ic(g, std::vector<int>(g.n(), kNoLabel));
    if (kind == "IC") {
        std::vector<int> labels(g.n(), kNoLabel);
        long long v, l;
        while (in >> v >> l) {
            if (v < 0 || v >= g.n() || l < 0) throw ParseError("bad IC line");
            labels[v] = static_cast<int>(l);
        }
        return SteinerInstance::ic(std::move(g), std::move(labels));
    }
    if (kind == "CR") {
        std::vector<std::vector<int>> req(g.n());
        long long v, w;
        while (in >> v >> w) {
            if (v < 0 || v >= g.n() || w < 0 || w >= g.n()) throw ParseError("bad CR line");
            req[v].push_back(static_cast<int>(w));
        }
        return SteinerInstance::cr(std::move(g), std::move(req));
    }
    throw ParseError("expected IC or CR section, got '" + kind + "'");
}

void write_instance(std::ostream& out, const SteinerInstance& inst) {
    write_graph(out, inst.graph);
    if (inst.kind == InstanceKind::IC) {
        out << "IC\n";
        for (int v = 0; v < inst.n(); ++v) {
            if (inst.label[v] != kNoLabel) out << v << ' ' << inst.label[v] << '\n';
        }
    } else {
        out << "CR\n";
        for (int v = 0; v < inst.n(); ++v) {
            for (int w : inst.requests[v]) out << v << ' ' << w << '\n';
        }
    }
}

}  // namespace steiner
