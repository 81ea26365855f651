#include "steiner/generators.hpp"

#include "steiner/dsu.hpp"
#include "steiner/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace steiner {
namespace {

Weight rand_w(Rng& rng, Weight lo, Weight hi) { return uniform_int(rng, lo, hi); }

void check_weights(Weight wmin, Weight wmax) {
    if (wmin < 1 || wmax < wmin) throw InvalidSpec("weight range must satisfy 1 <= wmin <= wmax");
}

}  // namespace

WeightedGraph gen_random_connected(int n, int m, Weight wmin, Weight wmax, Rng& rng) {
    check_weights(wmin, wmax);
    if (n < 1) throw InvalidSpec("n must be positive");
    const long long max_m = static_cast<long long>(n) * (n - 1) / 2;
    if (m < n - 1 || m > max_m) throw InvalidSpec("edge count out of range for a connected simple graph");
    WeightedGraph g(n);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    shuffle_in_place(order, rng);
    for (int i = 1; i < n; ++i) {
        int parent = order[uniform_u64(rng, i)];
        g.add_edge(order[i], parent, rand_w(rng, wmin, wmax));
    }
    while (g.m() < m) {
        int u = static_cast<int>(uniform_u64(rng, n));
        int v = static_cast<int>(uniform_u64(rng, n));
        if (u == v || g.edge_id(u, v) >= 0) continue;
        g.add_edge(u, v, rand_w(rng, wmin, wmax));
    }
    return g;
}

WeightedGraph gen_random_geometric(int n, double radius, Weight scale, Rng& rng) {
    if (n < 1 || radius <= 0 || scale < 1) throw InvalidSpec("bad geometric parameters");
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = uniform_real(rng);
        y[i] = uniform_real(rng);
    }
    auto dist = [&](int a, int b) { return std::hypot(x[a] - x[b], y[a] - y[b]); };
    auto weight = [&](int a, int b) {
        return std::max<Weight>(1, static_cast<Weight>(std::ceil(dist(a, b) * scale)));
    };
    WeightedGraph g(n);
    Dsu dsu(n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (dist(a, b) <= radius) {
                g.add_edge(a, b, weight(a, b));
                dsu.unite(a, b);
            }
    // Patch connectivity with the closest cross-component pair, repeatedly.
    while (true) {
        double best = 1e18;
        int ba = -1, bb = -1;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (!dsu.same(a, b) && dist(a, b) < best) {
                    best = dist(a, b);
                    ba = a;
                    bb = b;
                }
        if (ba < 0) break;
        g.add_edge(ba, bb, weight(ba, bb));
        dsu.unite(ba, bb);
    }
    return g;
}

WeightedGraph gen_grid(int rows, int cols, Weight wmin, Weight wmax, Rng& rng) {
    check_weights(wmin, wmax);
    if (rows < 1 || cols < 1) throw InvalidSpec("grid needs positive dimensions");
    WeightedGraph g(rows * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            int v = r * cols + c;
            if (c + 1 < cols) g.add_edge(v, v + 1, rand_w(rng, wmin, wmax));
            if (r + 1 < rows) g.add_edge(v, v + cols, rand_w(rng, wmin, wmax));
        }
    return g;
}

WeightedGraph gen_weighted_path(int n, bool heavy_middle, Rng& rng) {
    if (n < 2) throw InvalidSpec("path needs at least 2 nodes");
    WeightedGraph g(n);
    Weight total = 0;
    for (int i = 0; i + 1 < n; ++i) {
        Weight w = rand_w(rng, 1, 3);
        if (heavy_middle && i == (n - 2) / 2) w = n;
        g.add_edge(i, i + 1, w);
        total += w;
    }
    if (heavy_middle) {
        for (int i = 0; i + 2 < n; i += 3) g.add_edge(i, i + 2, total + 1);
    }
    return g;
}

WeightedGraph gen_star_of_cliques(int cliques, int size, Weight wmin, Weight wmax, Rng& rng) {
    check_weights(wmin, wmax);
    if (cliques < 1 || size < 1) throw InvalidSpec("star of cliques needs positive sizes");
    WeightedGraph g(1 + cliques * size);
    for (int c = 0; c < cliques; ++c) {
        int base = 1 + c * size;
        for (int i = 0; i < size; ++i)
            for (int j = i + 1; j < size; ++j) g.add_edge(base + i, base + j, rand_w(rng, wmin, wmax));
        g.add_edge(0, base + static_cast<int>(uniform_u64(rng, size)), rand_w(rng, wmin, wmax));
    }
    return g;
}

std::vector<int> gen_labels(int n, int k, int per_component, Rng& rng) {
    if (k < 0 || per_component < 1 || static_cast<long long>(k) * per_component > n)
        throw InvalidSpec("not enough nodes for the requested terminals");
    std::vector<int> nodes(n);
    for (int i = 0; i < n; ++i) nodes[i] = i;
    shuffle_in_place(nodes, rng);
    std::vector<int> label(n, kNoLabel);
    for (int c = 0; c < k; ++c)
        for (int j = 0; j < per_component; ++j) label[nodes[c * per_component + j]] = c;
    return label;
}

namespace {
int a_node(int i) { return i + 1; }
int b_node(int n, int i) { return n + 2 + i + 1; }
bool has(const std::vector<int>& s, int i) { return std::find(s.begin(), s.end(), i) != s.end(); }
void check_sd(int n, const std::vector<int>& A, const std::vector<int>& B) {
    if (n < 1) throw InvalidSpec("gadget needs n >= 1");
    for (int i : A) if (i < 1 || i > n) throw InvalidSpec("A must be a subset of [n]");
    for (int i : B) if (i < 1 || i > n) throw InvalidSpec("B must be a subset of [n]");
}
}  // namespace

Weight sd_gadget_heavy_weight(int n, Weight rho) { return rho * (2 * n + 2) + 1; }

SteinerInstance gen_sd_gadget_cr(int n, const std::vector<int>& A, const std::vector<int>& B, Weight rho) {
    check_sd(n, A, B);
    if (rho < 1) throw InvalidSpec("rho must be >= 1");
    WeightedGraph g(2 * n + 4);
    for (int i = 1; i <= n; ++i) {
        g.add_edge(a_node(has(A, i) ? 0 : -1), a_node(i), 1);
        g.add_edge(b_node(n, has(B, i) ? 0 : -1), b_node(n, i), 1);
    }
    const Weight heavy = sd_gadget_heavy_weight(n, rho);
    g.add_edge(a_node(0), b_node(n, 0), heavy);
    g.add_edge(a_node(-1), b_node(n, -1), heavy);
    g.add_edge(a_node(0), b_node(n, -1), 1);
    g.add_edge(a_node(-1), b_node(n, 0), 1);
    std::vector<std::vector<int>> req(g.n());
    for (int i : A) req[a_node(i)].push_back(b_node(n, i));
    for (int i : B) req[b_node(n, i)].push_back(a_node(i));
    return SteinerInstance::cr(std::move(g), std::move(req));
}

std::vector<int> sd_gadget_heavy_edges(const SteinerInstance& gadget, int n) {
    return {gadget.graph.edge_id(a_node(0), b_node(n, 0)), gadget.graph.edge_id(a_node(-1), b_node(n, -1))};
}

SteinerInstance gen_sd_gadget_ic(int n, const std::vector<int>& A, const std::vector<int>& B) {
    check_sd(n, A, B);
    // a_0..a_n are 0..n, b_0..b_n are n+1..2n+1.
    WeightedGraph g(2 * n + 2);
    for (int i = 1; i <= n; ++i) {
        g.add_edge(0, i, 1);
        g.add_edge(n + 1, n + 1 + i, 1);
    }
    g.add_edge(0, n + 1, 1);
    std::vector<int> label(g.n(), kNoLabel);
    for (int i : A) label[i] = i;
    for (int i : B) label[n + 1 + i] = i;
    return SteinerInstance::ic(std::move(g), std::move(label));
}

SteinerInstance gen_instance(const GenSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    WeightedGraph g;
    const std::string& f = spec.family;
    if (f == "gnm" || f == "mst") {
        int m = spec.m > 0 ? spec.m : std::min<int>(spec.n * (spec.n - 1) / 2, spec.n + spec.n * 3 / 5);
        g = gen_random_connected(spec.n, m, spec.wmin, spec.wmax, rng);
    } else if (f == "geometric") {
        g = gen_random_geometric(spec.n, spec.radius, spec.wmax, rng);
    } else if (f == "grid") {
        int rows = spec.rows > 0 ? spec.rows : 4, cols = spec.cols > 0 ? spec.cols : 4;
        g = gen_grid(rows, cols, spec.wmin, spec.wmax, rng);
    } else if (f == "path") {
        g = gen_weighted_path(spec.n, spec.heavy_middle, rng);
    } else if (f == "cliques") {
        int size = std::max(1, spec.per_component + 1);
        int cl = std::max(1, (spec.n - 1) / size);
        g = gen_star_of_cliques(cl, size, spec.wmin, spec.wmax, rng);
    } else {
        throw InvalidSpec("unknown family '" + f + "'");
    }
    std::vector<int> labels;
    if (f == "mst") {
        labels.assign(g.n(), 0);
    } else {
        labels = gen_labels(g.n(), spec.k, spec.per_component, rng);
    }
    return SteinerInstance::ic(std::move(g), std::move(labels));
}

std::vector<SteinerInstance> gen_family(const GenSpec& spec) {
    if (spec.count < 0) throw InvalidSpec("count must be non-negative");
    std::vector<SteinerInstance> out;
    for (int i = 0; i < spec.count; ++i) out.push_back(gen_instance(spec, mix_seed(spec.seed, i)));
    return out;
}

}  // namespace steiner
