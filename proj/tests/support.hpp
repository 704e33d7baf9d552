#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aia/dataset.hpp"
#include "aia/gcn.hpp"
#include "aia/random.hpp"
#include "oracles/oracles.hpp"

namespace testsupport {

inline oracle::Dense to_dense(const aia::Matrix& m) {
    oracle::Dense out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    }
    return out;
}

inline oracle::Dense to_dense(const aia::SparseMatrix& m) { return to_dense(aia::Matrix(m)); }

inline std::vector<std::vector<bool>> to_dense(const aia::Mask& m) {
    std::vector<std::vector<bool>> out(static_cast<std::size_t>(m.rows()),
                                       std::vector<bool>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    }
    return out;
}

inline oracle::Edges random_edges(std::size_t n, double p, aia::rng::Engine& e) {
    oracle::Edges edges;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (aia::rng::bernoulli(e, p)) edges.emplace_back(u, v);
        }
    }
    return edges;
}

inline aia::SparseGraph graph(std::size_t n, const oracle::Edges& edges) { return aia::SparseGraph(n, edges); }

inline aia::SparseGraph path_graph(std::size_t n) {
    oracle::Edges e;
    for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return aia::SparseGraph(n, e);
}

// Perfectly homophilous binary fixture: 200 nodes, 2 communities,
// community-constant sensitive column 0.
inline aia::Dataset homophilous(std::uint64_t seed = 7, std::size_t num_sensitive = 1,
                                aia::FeatureKind kind = aia::FeatureKind::binary) {
    aia::SyntheticSpec spec;
    spec.num_nodes = 200;
    spec.num_features = 16;
    spec.num_communities = 2;
    spec.num_sensitive = num_sensitive;
    spec.p_in = 0.3;
    spec.p_out = 0.0;
    spec.feature_kind = kind;
    return aia::generate_synthetic(spec, seed);
}

inline std::optional<std::filesystem::path> cora_dir() {
    const char* env = std::getenv("AIA_DATA_ROOT");
    const std::filesystem::path root = env && *env ? env : "data";
    const auto dir = root / "cora";
    if (std::filesystem::exists(dir / "cora.content")) return dir;
    return std::nullopt;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("aia_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Fixed-weight GCN: hidden = relu(S X W0), logits = S hidden W1.
inline aia::BlackBoxHandle sealed(const aia::Matrix& w0, const aia::Matrix& w1) {
    return aia::seal(aia::GcnModel(w0, w1));
}

}  // namespace testsupport
