#include "aia/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

namespace aia {

SparseGraph::SparseGraph(std::size_t num_nodes, std::span<const std::pair<NodeId, NodeId>> edges)
    : num_nodes_(num_nodes) {
    edges_.reserve(edges.size());
    for (auto [u, v] : edges) {
        if (u >= num_nodes || v >= num_nodes) {
            throw DataError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") has an endpoint outside [0, " + std::to_string(num_nodes) + ")");
        }
        if (u == v) continue;
        edges_.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    std::vector<std::size_t> deg(num_nodes_, 0);
    for (auto [u, v] : edges_) {
        ++deg[u];
        ++deg[v];
    }
    offsets_.assign(num_nodes_ + 1, 0);
    for (std::size_t i = 0; i < num_nodes_; ++i) offsets_[i + 1] = offsets_[i] + deg[i];
    adjacency_list_.resize(offsets_.back());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (auto [u, v] : edges_) {
        adjacency_list_[cursor[u]++] = v;
        adjacency_list_[cursor[v]++] = u;
    }
    for (std::size_t i = 0; i < num_nodes_; ++i) {
        std::sort(adjacency_list_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
                  adjacency_list_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
    }
}

std::span<const NodeId> SparseGraph::neighbors(NodeId v) const {
    return {adjacency_list_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

bool SparseGraph::has_edge(NodeId u, NodeId v) const {
    if (u >= num_nodes_ || v >= num_nodes_) return false;
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

SparseMatrix SparseGraph::adjacency() const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * edges_.size());
    for (auto [u, v] : edges_) {
        trips.emplace_back(static_cast<int>(u), static_cast<int>(v), 1.0);
        trips.emplace_back(static_cast<int>(v), static_cast<int>(u), 1.0);
    }
    SparseMatrix a(static_cast<Eigen::Index>(num_nodes_), static_cast<Eigen::Index>(num_nodes_));
    a.setFromTriplets(trips.begin(), trips.end());
    return a;
}

SparseMatrix degree_matrix(const SparseGraph& g) {
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    SparseMatrix d(n, n);
    d.reserve(Eigen::VectorXi::Constant(n, 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        d.insert(i, i) = static_cast<double>(g.degree(static_cast<NodeId>(i)));
    }
    d.makeCompressed();
    return d;
}

namespace {

// D^{-1/2} M D^{-1/2} given per-node degrees; 0 where the degree is 0.
SparseMatrix symmetric_normalize(const SparseMatrix& m, const std::vector<double>& degree) {
    std::vector<double> inv_sqrt(degree.size());
    for (std::size_t i = 0; i < degree.size(); ++i) {
        inv_sqrt[i] = degree[i] > 0.0 ? 1.0 / std::sqrt(degree[i]) : 0.0;
    }
    SparseMatrix out = m;
    for (Eigen::Index r = 0; r < out.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(out, r); it; ++it) {
            it.valueRef() *= inv_sqrt[static_cast<std::size_t>(it.row())] *
                             inv_sqrt[static_cast<std::size_t>(it.col())];
        }
    }
    return out;
}

}  // namespace

PropagationOperator propagation_operator(const SparseGraph& g, OperatorKind kind) {
    SparseMatrix a = g.adjacency();
    if (kind == OperatorKind::combinatorial_laplacian) {
        SparseMatrix l = degree_matrix(g) - a;
        l.makeCompressed();
        return {std::move(l), kind};
    }
    std::vector<double> deg(g.num_nodes());
    for (std::size_t i = 0; i < deg.size(); ++i) deg[i] = static_cast<double>(g.degree(i));
    return {symmetric_normalize(a, deg), kind};
}

SparseMatrix gcn_operator(const SparseGraph& g) {
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * g.num_edges() + g.num_nodes());
    for (auto [u, v] : g.edges()) {
        trips.emplace_back(static_cast<int>(u), static_cast<int>(v), 1.0);
        trips.emplace_back(static_cast<int>(v), static_cast<int>(u), 1.0);
    }
    for (Eigen::Index i = 0; i < n; ++i) trips.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    SparseMatrix a_hat(n, n);
    a_hat.setFromTriplets(trips.begin(), trips.end());
    std::vector<double> deg(g.num_nodes());
    for (std::size_t i = 0; i < deg.size(); ++i) deg[i] = static_cast<double>(g.degree(i)) + 1.0;
    return symmetric_normalize(a_hat, deg);
}

SparseGraph build_knn_graph(const Matrix& features, std::size_t k, KnnMetric metric) {
    const auto n = static_cast<std::size_t>(features.rows());
    if (k < 1 || k >= n) {
        throw ParameterError("knn: k=" + std::to_string(k) + " must satisfy 1 <= k < " +
                             std::to_string(n));
    }
    if (!features.allFinite()) throw DataError("knn: features contain non-finite values");

    Matrix rows = features;
    if (metric == KnnMetric::cosine) {
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            const double norm = rows.row(i).norm();
            if (norm > 0.0) rows.row(i) /= norm;
        }
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(n * k);
    std::vector<std::pair<double, NodeId>> cand;
    cand.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        cand.clear();
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto jj = static_cast<Eigen::Index>(j);
            // Squared euclidean preserves the ordering.
            const double d = metric == KnnMetric::euclidean ? (rows.row(ii) - rows.row(jj)).squaredNorm()
                                                            : 1.0 - rows.row(ii).dot(rows.row(jj));
            cand.emplace_back(d, j);
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
        for (std::size_t r = 0; r < k; ++r) edges.emplace_back(i, cand[r].second);
    }
    return SparseGraph(n, edges);
}

SparseGraph induced_subgraph(const SparseGraph& g, std::span<const NodeId> ids) {
    std::vector<std::size_t> local(g.num_nodes(), static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= g.num_nodes()) throw ParameterError("induced_subgraph: node id out of range");
        local[ids[i]] = i;
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (NodeId nb : g.neighbors(ids[i])) {
            if (local[nb] != static_cast<std::size_t>(-1) && local[nb] > i) edges.emplace_back(i, local[nb]);
        }
    }
    return SparseGraph(ids.size(), edges);
}

SparseGraph read_edge_list(const std::filesystem::path& path, std::optional<std::size_t> num_nodes) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open edge list " + path.string());
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::string line;
    std::size_t lineno = 0;
    NodeId max_id = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ss(line);
        long long u = -1;
        long long v = -1;
        std::string extra;
        if (!(ss >> u >> v) || (ss >> extra) || u < 0 || v < 0) {
            throw LoadError(path.string() + ":" + std::to_string(lineno) + ": malformed edge '" + line + "'");
        }
        if (num_nodes && (static_cast<std::size_t>(u) >= *num_nodes || static_cast<std::size_t>(v) >= *num_nodes)) {
            throw LoadError(path.string() + ":" + std::to_string(lineno) + ": dangling endpoint in '" + line +
                            "' (num_nodes=" + std::to_string(*num_nodes) + ")");
        }
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        max_id = std::max({max_id, static_cast<NodeId>(u), static_cast<NodeId>(v)});
    }
    const std::size_t n = num_nodes.value_or(edges.empty() ? 0 : max_id + 1);
    return SparseGraph(n, edges);
}

void write_edge_list(const SparseGraph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write edge list " + path.string());
    for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

const char* to_string(OperatorKind kind) {
    return kind == OperatorKind::normalized_adjacency ? "normalized_adjacency" : "combinatorial_laplacian";
}

const char* to_string(KnnMetric metric) { return metric == KnnMetric::euclidean ? "euclidean" : "cosine"; }

OperatorKind operator_kind_from_string(const std::string& s) {
    if (s == "normalized_adjacency") return OperatorKind::normalized_adjacency;
    if (s == "combinatorial_laplacian") return OperatorKind::combinatorial_laplacian;
    throw ParameterError("unknown operator kind '" + s + "'");
}

KnnMetric knn_metric_from_string(const std::string& s) {
    if (s == "euclidean") return KnnMetric::euclidean;
    if (s == "cosine") return KnnMetric::cosine;
    throw ParameterError("unknown knn metric '" + s + "'");
}

}  // namespace aia
