#include "elsim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "elsim/rng.hpp"

namespace elsim {

const char* to_string(GraphKind k) {
    switch (k) {
        case GraphKind::Ring: return "ring";
        case GraphKind::Torus2d: return "torus";
        case GraphKind::Complete: return "complete";
        case GraphKind::RandomConnected: return "random";
        case GraphKind::EdgeList: return "edge-list";
    }
    return "?";
}

GraphKind graph_kind_from_string(const std::string& s) {
    if (s == "ring") return GraphKind::Ring;
    if (s == "torus" || s == "torus-2d") return GraphKind::Torus2d;
    if (s == "complete") return GraphKind::Complete;
    if (s == "random" || s == "connected-uniform-random") return GraphKind::RandomConnected;
    if (s == "edge-list") return GraphKind::EdgeList;
    throw std::invalid_argument("unknown graph family: " + s);
}

namespace {

// BFS hop distances from src; also reports how many nodes were reached.
void bfs(const Graph& g, uint32_t src, std::vector<uint32_t>& dist, uint32_t& reached,
         std::vector<uint32_t>& queue) {
    std::fill(dist.begin(), dist.end(), UINT32_MAX);
    queue.clear();
    dist[src] = 0;
    queue.push_back(src);
    reached = 1;
    for (size_t head = 0; head < queue.size(); ++head) {
        uint32_t v = queue[head];
        for (auto it = g.incident_begin(v); it != g.incident_end(v); ++it) {
            if (dist[it->peer] == UINT32_MAX) {
                dist[it->peer] = dist[v] + 1;
                queue.push_back(it->peer);
                ++reached;
            }
        }
    }
}

uint32_t eccentricity(const Graph& g, uint32_t src, std::vector<uint32_t>& dist,
                      std::vector<uint32_t>& queue) {
    uint32_t reached = 0;
    bfs(g, src, dist, reached, queue);
    uint32_t ecc = 0;
    for (uint32_t d : dist) ecc = std::max(ecc, d);
    return ecc;
}

}  // namespace

Graph Graph::from_edges(uint32_t n, std::vector<std::pair<uint32_t, uint32_t>> edges) {
    if (n < 2) throw std::invalid_argument("graph: need at least 2 nodes");
    for (auto& e : edges) {
        if (e.first == e.second) throw std::invalid_argument("graph: self loop");
        if (e.first >= n || e.second >= n) throw std::invalid_argument("graph: node index out of range");
        if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
        throw std::invalid_argument("graph: duplicate edge");

    Graph g;
    g.n_ = n;
    g.edges_ = std::move(edges);
    g.offsets_.assign(n + 1, 0);
    for (const auto& e : g.edges_) {
        ++g.offsets_[e.first + 1];
        ++g.offsets_[e.second + 1];
    }
    std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
    g.inc_.resize(g.offsets_[n]);
    std::vector<uint32_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (uint32_t i = 0; i < g.edges_.size(); ++i) {
        auto [u, v] = g.edges_[i];
        g.inc_[cursor[u]++] = {v, i};
        g.inc_[cursor[v]++] = {u, i};
    }

    std::vector<uint32_t> dist(n), queue;
    uint32_t reached = 0;
    bfs(g, 0, dist, reached, queue);
    if (reached != n) throw std::invalid_argument("graph: not connected");
    return g;
}

namespace {

Graph make_ring(uint32_t n) {
    if (n < 3) throw std::invalid_argument("ring: need n >= 3");
    std::vector<std::pair<uint32_t, uint32_t>> e;
    e.reserve(n);
    for (uint32_t i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    return Graph::from_edges(n, std::move(e));
}

Graph make_torus(uint32_t n) {
    auto side = static_cast<uint32_t>(std::lround(std::sqrt(static_cast<double>(n))));
    if (side < 3 || side * side != n)
        throw std::invalid_argument("torus: n must be a perfect square with side >= 3");
    std::vector<std::pair<uint32_t, uint32_t>> e;
    e.reserve(2 * n);
    auto id = [side](uint32_t r, uint32_t c) { return r * side + c; };
    for (uint32_t r = 0; r < side; ++r)
        for (uint32_t c = 0; c < side; ++c) {
            e.emplace_back(id(r, c), id(r, (c + 1) % side));
            e.emplace_back(id(r, c), id((r + 1) % side, c));
        }
    return Graph::from_edges(n, std::move(e));
}

Graph make_complete(uint32_t n) {
    if (n < 2) throw std::invalid_argument("complete: need n >= 2");
    std::vector<std::pair<uint32_t, uint32_t>> e;
    e.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (uint32_t u = 0; u < n; ++u)
        for (uint32_t v = u + 1; v < n; ++v) e.emplace_back(u, v);
    return Graph::from_edges(n, std::move(e));
}

// Pair index over {0..n-1} choose 2, in (u,v) lexicographic order.
std::pair<uint32_t, uint32_t> decode_pair(uint32_t n, uint64_t index) {
    uint32_t u = 0;
    uint64_t row = n - 1;
    while (index >= row) {
        index -= row;
        ++u;
        --row;
    }
    return {u, u + 1 + static_cast<uint32_t>(index)};
}

Graph make_random_connected(uint32_t n, double p, uint32_t m, uint64_t seed, bool* augmented) {
    if (n < 2) throw std::invalid_argument("random: need n >= 2");
    const uint64_t all_pairs = static_cast<uint64_t>(n) * (n - 1) / 2;
    Rng rng(derive_seed(seed, 0xa11ce));
    std::vector<std::pair<uint32_t, uint32_t>> e;
    if (m > 0) {
        if (m > all_pairs) throw std::invalid_argument("random: edge count exceeds n(n-1)/2");
        // Floyd's sampling: m distinct pair indices, uniform.
        std::unordered_set<uint64_t> chosen;
        for (uint64_t j = all_pairs - m; j < all_pairs; ++j) {
            uint64_t r = rng.below(j + 1);
            if (!chosen.insert(r).second) chosen.insert(j);
        }
        std::vector<uint64_t> ordered(chosen.begin(), chosen.end());
        std::sort(ordered.begin(), ordered.end());
        for (uint64_t idx : ordered) e.push_back(decode_pair(n, idx));
    } else {
        if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("random: p must be in (0,1]");
        for (uint32_t u = 0; u < n; ++u)
            for (uint32_t v = u + 1; v < n; ++v)
                if (rng.chance(p)) e.emplace_back(u, v);
    }

    // Union-find over the sampled edges; join leftover components with
    // uniformly random cross edges so the sample is never rejected.
    std::vector<uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& [u, v] : e) parent[find(u)] = find(v);

    bool added = false;
    std::vector<uint32_t> roots;
    for (uint32_t v = 0; v < n; ++v)
        if (find(v) == v) roots.push_back(v);
    while (roots.size() > 1) {
        // Pick one node from the first component and one from a random other.
        std::vector<uint32_t> comp0, rest;
        for (uint32_t v = 0; v < n; ++v) (find(v) == find(roots[0]) ? comp0 : rest).push_back(v);
        uint32_t u = comp0[rng.below(comp0.size())];
        uint32_t w = rest[rng.below(rest.size())];
        e.emplace_back(std::min(u, w), std::max(u, w));
        parent[find(u)] = find(w);
        added = true;
        roots.clear();
        for (uint32_t v = 0; v < n; ++v)
            if (find(v) == v) roots.push_back(v);
    }
    if (augmented) *augmented = added;
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return Graph::from_edges(n, std::move(e));
}

}  // namespace

Graph generate(const GraphFamily& family, uint64_t seed, bool* augmented) {
    if (augmented) *augmented = false;
    switch (family.kind) {
        case GraphKind::Ring: return make_ring(family.n);
        case GraphKind::Torus2d: return make_torus(family.n);
        case GraphKind::Complete: return make_complete(family.n);
        case GraphKind::RandomConnected:
            return make_random_connected(family.n, family.edge_probability, family.edge_count,
                                         seed, augmented);
        case GraphKind::EdgeList: return read_edge_list_file(family.edge_list_path);
    }
    throw std::invalid_argument("generate: bad family");
}

uint32_t diameter_serial(const Graph& g) {
    std::vector<uint32_t> dist(g.node_count()), queue;
    uint32_t best = 0;
    for (uint32_t s = 0; s < g.node_count(); ++s)
        best = std::max(best, eccentricity(g, s, dist, queue));
    return best;
}

uint32_t diameter(const Graph& g) {
    const uint32_t n = g.node_count();
    uint32_t best = 0;
#pragma omp parallel
    {
        std::vector<uint32_t> dist(n), queue;
        uint32_t local = 0;
#pragma omp for schedule(dynamic, 16) nowait
        for (int s = 0; s < static_cast<int>(n); ++s)
            local = std::max(local, eccentricity(g, static_cast<uint32_t>(s), dist, queue));
#pragma omp critical
        best = std::max(best, local);
    }
    return best;
}

Graph read_edge_list(std::istream& in) {
    uint32_t n = 0;
    size_t m = 0;
    if (!(in >> n >> m)) throw std::invalid_argument("edge list: bad header");
    std::vector<std::pair<uint32_t, uint32_t>> e;
    e.reserve(m);
    for (size_t i = 0; i < m; ++i) {
        uint32_t u, v;
        if (!(in >> u >> v)) throw std::invalid_argument("edge list: truncated");
        e.emplace_back(u, v);
    }
    return Graph::from_edges(n, std::move(e));
}

Graph read_edge_list_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open edge list: " + path);
    return read_edge_list(f);
}

void write_edge_list(std::ostream& out, const Graph& g) {
    out << g.node_count() << ' ' << g.edge_count() << '\n';
    for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

}  // namespace elsim
