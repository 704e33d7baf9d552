#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "aia/types.hpp"

namespace aia {

// Undirected, unweighted graph. Edges are stored once as (lo, hi) with lo < hi,
// sorted, no self-loops. Immutable after construction.
class SparseGraph {
  public:
    SparseGraph() = default;

    // Pairs may repeat or appear reversed; they are deduplicated. Self-loops are
    // dropped. Throws DataError when an endpoint is >= num_nodes.
    SparseGraph(std::size_t num_nodes, std::span<const std::pair<NodeId, NodeId>> edges);

    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }

    std::span<const NodeId> neighbors(NodeId v) const;
    std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
    bool has_edge(NodeId u, NodeId v) const;

    // Symmetric 0/1 matrix with zero diagonal.
    SparseMatrix adjacency() const;

    friend bool operator==(const SparseGraph& a, const SparseGraph& b) {
        return a.num_nodes_ == b.num_nodes_ && a.edges_ == b.edges_;
    }

  private:
    std::size_t num_nodes_ = 0;
    std::vector<std::pair<NodeId, NodeId>> edges_;
    std::vector<std::size_t> offsets_{0};
    std::vector<NodeId> adjacency_list_;
};

enum class OperatorKind { normalized_adjacency, combinatorial_laplacian };

struct PropagationOperator {
    SparseMatrix matrix;
    OperatorKind kind = OperatorKind::normalized_adjacency;
};

SparseMatrix degree_matrix(const SparseGraph& g);

// normalized_adjacency: D^{-1/2} A D^{-1/2}, zero rows for isolated nodes.
// combinatorial_laplacian: D - A.
PropagationOperator propagation_operator(const SparseGraph& g, OperatorKind kind);

// Renormalized GCN operator D~^{-1/2} (A + I) D~^{-1/2}.
SparseMatrix gcn_operator(const SparseGraph& g);

enum class KnnMetric { euclidean, cosine };

// Union-symmetrized k-nearest-neighbour graph over the rows of `features`.
// Distance ties go to the lower node id. Cosine distance is 1 - cos; a zero row
// has cosine similarity 0 to everything.
SparseGraph build_knn_graph(const Matrix& features, std::size_t k, KnnMetric metric);

// Subgraph on `ids`; node i of the result is ids[i].
SparseGraph induced_subgraph(const SparseGraph& g, std::span<const NodeId> ids);

// "u v" per line, 0-based. Without num_nodes the node count is max id + 1.
SparseGraph read_edge_list(const std::filesystem::path& path,
                           std::optional<std::size_t> num_nodes = std::nullopt);
void write_edge_list(const SparseGraph& g, const std::filesystem::path& path);

const char* to_string(OperatorKind kind);
const char* to_string(KnnMetric metric);
OperatorKind operator_kind_from_string(const std::string& s);
KnnMetric knn_metric_from_string(const std::string& s);

}  // namespace aia
