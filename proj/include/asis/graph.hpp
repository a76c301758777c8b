// graph.hpp -- static initial contact topology and spectral primitives.
//
// The graph is undirected, simple (no self-loops, no duplicates) and node
// ids are normalized to 0..n-1 on ingestion; original labels are kept in a
// side table. Everything downstream (simulator, mean-field matrices, the
// designers) indexes edges through EdgeIndexMap, which fixes the canonical
// ordering of the 2m ordered node pairs.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace asis {

struct graph_parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct self_loop_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct duplicate_edge_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct disconnected_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Graph {
public:
    // Build from 0-based endpoints. Validates and canonicalizes: each edge
    // is stored once as (a,b) with a < b, edge list sorted lexicographically.
    static Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges);

    // Parse whitespace-separated integer pairs, one per line; '#' starts a
    // comment. Arbitrary integer labels are normalized to 0..n-1 in sorted
    // label order.
    static Graph parse_edge_list(std::string_view text);
    static Graph load_edge_list(const std::string& path);

    // JSON object {"n": int, "edges": [[i,j], ...]} with 0-based endpoints.
    static Graph parse_json_text(std::string_view text);
    static Graph load_json(const std::string& path);

    int node_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    std::span<const int> neighbors(int i) const {
        return {adj_.data() + adj_offset_[i],
                static_cast<std::size_t>(adj_offset_[i + 1] - adj_offset_[i])};
    }
    int degree(int i) const { return adj_offset_[i + 1] - adj_offset_[i]; }
    bool has_edge(int i, int j) const;

    // Edges in canonical order; the per-edge parameter arrays (psi) and the
    // simulator's live-edge bits use this order.
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    // Index of the unordered edge {i,j} in edges(), or -1 if absent.
    int edge_id(int i, int j) const;

    std::int64_t original_label(int i) const { return labels_[i]; }
    const std::vector<std::int64_t>& original_labels() const { return labels_; }

    // True iff the undirected graph is connected (adjacency irreducible).
    bool connected() const;

private:
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;       // canonical (a<b), sorted
    std::vector<int> adj_;                         // CSR neighbor lists, sorted
    std::vector<int> adj_offset_;                  // size n+1
    std::vector<int> edge_of_pair_;                // parallel to adj_: edge id
    std::vector<std::int64_t> labels_;             // original node labels

    friend class EdgeIndexMap;
};

// Canonical ordering of the 2m ordered pairs (i,j), j in N_i(0): rows for
// node i occupy one contiguous block of length d_i, blocks ordered by i and
// pairs within a block ordered by j. This fixes the layout of the q-block
// of every mean-field matrix.
class EdgeIndexMap {
public:
    EdgeIndexMap() = default;  // empty map, to be replaced by assignment
    explicit EdgeIndexMap(const Graph& g);

    int pair_count() const { return static_cast<int>(pairs_.size()); }  // 2m
    int block_offset(int i) const { return offset_[i]; }

    // Row index of ordered pair (i,j); j must be a neighbor of i.
    int index_of(int i, int j) const;

    std::pair<int, int> pair_at(int idx) const { return pairs_[idx]; }

    // Unordered edge id behind the ordered pair at idx.
    int edge_id_at(int idx) const { return pair_edge_[idx]; }

private:
    const Graph* g_ = nullptr;
    std::vector<int> offset_;                  // size n+1, prefix sums of d_i
    std::vector<std::pair<int, int>> pairs_;   // idx -> (i,j)
    std::vector<int> pair_edge_;               // idx -> unordered edge id
};

struct SpectralResult {
    double rho = 0.0;          // largest adjacency eigenvalue
    std::vector<double> v;     // Perron vector, unit max entry, entrywise > 0
    int iterations = 0;
};

// Perron root and vector of the adjacency matrix. Power iteration on A+I
// (the shift makes bipartite graphs aperiodic) with Collatz-Wielandt
// bracketing as the stopping rule. Requires a connected graph.
SpectralResult spectral_radius(const Graph& g, double tol = 1e-10, int max_iter = 500000);

} // namespace asis
