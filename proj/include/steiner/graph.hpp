#pragma once

#include "steiner/rational.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

namespace steiner {

using Weight = std::int64_t;
inline constexpr Weight kInfWeight = std::numeric_limits<Weight>::max() / 4;

struct Edge {
    int u = 0;
    int v = 0;
    Weight w = 1;
    int other(int x) const { return x == u ? v : u; }
};

struct Arc {
    int to;
    int edge;
    Weight w;
};

// Undirected simple graph on nodes 0..n-1 with positive integer weights.
// Node IDs are the indices; adjacency lists are kept sorted by neighbor.
class WeightedGraph {
public:
    WeightedGraph() = default;
    explicit WeightedGraph(int n);

    int add_edge(int u, int v, Weight w);

    int n() const { return static_cast<int>(adj_.size()); }
    int m() const { return static_cast<int>(edges_.size()); }
    const Edge& edge(int e) const { return edges_[e]; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<Arc>& adj(int v) const { return adj_[v]; }
    int degree(int v) const { return static_cast<int>(adj_[v].size()); }

    int edge_id(int u, int v) const;  // -1 if absent
    int port_of(int v, int neighbor) const;  // index into adj(v), -1 if absent
    bool connected() const;
    Weight total_weight() const;
    Weight weight_of(const std::vector<int>& edge_ids) const;

private:
    std::vector<Edge> edges_;
    std::vector<std::vector<Arc>> adj_;
};

struct GraphMetrics {
    int n = 0;
    int D = 0;
    Weight WD = 0;
    int s = 0;
    std::vector<std::vector<Weight>> wd;
    std::vector<std::vector<int>> hops;  // min hop count among least-weight paths

    Weight dist(int v, int w) const { return wd[v][w]; }
};

GraphMetrics all_pairs_shortest_paths(const WeightedGraph& g);

// Unweighted BFS distances from src.
std::vector<int> bfs_hops(const WeightedGraph& g, int src);

// Least-weight path from v to w whose node sequence is lexicographically
// smallest. Returned as node sequence v..w.
std::vector<int> canonical_path(const WeightedGraph& g, const GraphMetrics& m, int v, int w);
std::vector<int> path_edges(const WeightedGraph& g, const std::vector<int>& nodes);

struct BoundaryFraction {
    int edge;
    int inner;  // interior endpoint
    Q fraction;
};

struct BallView {
    int center = 0;
    Q radius;
    std::vector<int> interior;
    std::vector<BoundaryFraction> boundary;
};

BallView ball(const WeightedGraph& g, const GraphMetrics& m, int v, const Q& r);

Weight mst_weight(const WeightedGraph& g);
std::vector<int> mst_edges(const WeightedGraph& g);

// "n m" then m lines "u v w".
WeightedGraph read_graph(std::istream& in);
void write_graph(std::ostream& out, const WeightedGraph& g);

}  // namespace steiner
