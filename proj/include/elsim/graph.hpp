#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace elsim {

/// Immutable undirected connected topology. Node indices 0..n-1 exist for
/// simulator bookkeeping only; the protocol itself never reads them.
class Graph {
  public:
    struct Incidence {
        uint32_t peer;
        uint32_t edge;
    };

    // Validates: n >= 2 when edges demand it, no self loops, no duplicate
    // edges, connected. Throws std::invalid_argument otherwise.
    static Graph from_edges(uint32_t n, std::vector<std::pair<uint32_t, uint32_t>> edges);

    uint32_t node_count() const { return n_; }
    uint32_t edge_count() const { return static_cast<uint32_t>(edges_.size()); }
    const std::vector<std::pair<uint32_t, uint32_t>>& edges() const { return edges_; }

    uint32_t degree(uint32_t v) const { return offsets_[v + 1] - offsets_[v]; }
    const Incidence* incident_begin(uint32_t v) const { return inc_.data() + offsets_[v]; }
    const Incidence* incident_end(uint32_t v) const { return inc_.data() + offsets_[v + 1]; }

    // Directed edge index: 2*edge + 0 for lo->hi, +1 for hi->lo.
    uint32_t direction(uint32_t edge, uint32_t src) const {
        return 2 * edge + (src == edges_[edge].first ? 0u : 1u);
    }
    uint32_t dir_src(uint32_t dir) const {
        const auto& e = edges_[dir / 2];
        return (dir & 1) ? e.second : e.first;
    }
    uint32_t dir_dst(uint32_t dir) const {
        const auto& e = edges_[dir / 2];
        return (dir & 1) ? e.first : e.second;
    }

  private:
    uint32_t n_ = 0;
    std::vector<std::pair<uint32_t, uint32_t>> edges_;  // normalized lo<hi, sorted
    std::vector<uint32_t> offsets_;
    std::vector<Incidence> inc_;
};

enum class GraphKind { Ring, Torus2d, Complete, RandomConnected, EdgeList };

const char* to_string(GraphKind k);
GraphKind graph_kind_from_string(const std::string& s);

/// Family tag plus parameters; generation is deterministic given a seed.
/// The random family takes either an edge probability or an exact edge
/// count (edge_count > 0 wins).
struct GraphFamily {
    GraphKind kind = GraphKind::Ring;
    uint32_t n = 0;
    double edge_probability = 0.0;  // RandomConnected only
    uint32_t edge_count = 0;        // RandomConnected only; 0 = use probability
    std::string edge_list_path;     // EdgeList only

    static GraphFamily ring(uint32_t n) { return {GraphKind::Ring, n, 0.0, 0, {}}; }
    static GraphFamily torus(uint32_t n) { return {GraphKind::Torus2d, n, 0.0, 0, {}}; }
    static GraphFamily complete(uint32_t n) { return {GraphKind::Complete, n, 0.0, 0, {}}; }
    static GraphFamily random(uint32_t n, double p) {
        return {GraphKind::RandomConnected, n, p, 0, {}};
    }
    static GraphFamily random_m(uint32_t n, uint32_t m) {
        return {GraphKind::RandomConnected, n, 0.0, m, {}};
    }
    static GraphFamily edge_list(std::string path) {
        return {GraphKind::EdgeList, 0, 0.0, 0, std::move(path)};
    }
};

/// Deterministic generation; identical (family, seed) yields identical
/// graphs. A disconnected random sample is repaired by adding uniformly
/// random edges between components; `augmented`, when non-null, records
/// whether that happened.
Graph generate(const GraphFamily& family, uint64_t seed, bool* augmented = nullptr);

/// Exact diameter via all-sources BFS, parallelized with OpenMP.
uint32_t diameter(const Graph& g);
/// Single-threaded reference used to cross-check the parallel kernel.
uint32_t diameter_serial(const Graph& g);

// Edge-list text format: first line "n m", then m lines "u v" (0-based).
Graph read_edge_list(std::istream& in);
Graph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const Graph& g);

}  // namespace elsim
