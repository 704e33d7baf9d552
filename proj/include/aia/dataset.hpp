#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aia/graph.hpp"
#include "aia/types.hpp"

namespace aia {

struct Dataset {
    std::string name;
    SparseGraph graph;
    Matrix features;                  // num_nodes x d
    std::vector<std::int32_t> labels;  // class id per node
    std::size_t num_classes = 0;
    FeatureKind feature_kind = FeatureKind::binary;

    std::size_t num_nodes() const { return graph.num_nodes(); }
    std::size_t num_features() const { return static_cast<std::size_t>(features.cols()); }

    // Throws DataError naming the first violated invariant.
    void validate() const;

    friend bool operator==(const Dataset& a, const Dataset& b);
};

enum class DatasetFormat {
    // Directory holding <name>.content ("id f1 .. fd label", whitespace
    // separated) and <name>.cites ("cited citing" id pairs). An optional
    // manifest.sha256 in `sha256sum` format is verified when present.
    planetoid_like,
    // Directory holding edges.txt, features.csv (headerless, d columns),
    // labels.txt (one integer per line) and optionally meta.json.
    edge_list_plus_csv,
};

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

// Writes `ds` in edge_list_plus_csv layout; values are printed with enough
// digits to reload bit-identical.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

DatasetFormat dataset_format_from_string(const std::string& s);
const char* to_string(DatasetFormat f);
const char* to_string(FeatureKind k);
FeatureKind feature_kind_from_string(const std::string& s);

struct Split {
    std::vector<NodeId> train_ids;
    std::vector<NodeId> test_ids;
    std::vector<NodeId> candidate_ids;  // subset of train_ids
    std::optional<std::vector<NodeId>> shadow_train_ids;
    std::optional<std::vector<NodeId>> shadow_test_ids;
};

struct SplitSpec {
    // Exactly one of train_size / train_fraction is used; train_size wins.
    std::optional<std::size_t> train_size;
    std::optional<double> train_fraction;
    // Defaults to every pool node not used for training.
    std::optional<std::size_t> test_size;
    std::size_t candidate_count = 100;
    // Halve the nodes into a target pool and a disjoint shadow pool, each split
    // with the same train/test sizes.
    bool shadow = false;
};

// Deterministic in `seed`. Candidates are the first candidate_count entries of
// the seeded training order, so they stay fixed when only train_size changes.
Split make_split(const Dataset& ds, const SplitSpec& spec, std::uint64_t seed);

enum class Setting { setting1, setting2 };
const char* to_string(Setting s);
Setting setting_from_string(const std::string& s);

// Feature matrix with hidden cells. Hidden cells hold NaN in `values`, so a
// hidden truth can never leak through arithmetic unnoticed.
struct PartialFeatureMatrix {
    Matrix values;
    Mask missing_mask;  // true = hidden
    std::vector<std::size_t> sensitive_attrs;

    std::size_t masked_count() const { return static_cast<std::size_t>(missing_mask.count()); }
    // Rows with at least one hidden cell.
    std::vector<NodeId> masked_rows() const;
};

PartialFeatureMatrix mask_sensitive(const Dataset& ds, const Split& split,
                                    const std::vector<std::size_t>& sensitive_attrs, Setting setting,
                                    std::uint64_t seed);

// Rows `ids` of x, in order.
PartialFeatureMatrix restrict_rows(const PartialFeatureMatrix& x, const std::vector<NodeId>& ids);

// Sub-dataset on `ids` (node i of the result is ids[i]).
Dataset induced_dataset(const Dataset& ds, const std::vector<NodeId>& ids);

struct SyntheticSpec {
    std::size_t num_nodes = 200;
    std::size_t num_features = 16;
    std::size_t num_communities = 2;
    // Leading columns that carry the community-constant sensitive signal.
    std::size_t num_sensitive = 1;
    double p_in = 0.1;
    double p_out = 0.005;
    // Binary data: probability each sensitive cell is flipped.
    double flip_probability = 0.0;
    // Continuous data: std of the noise added to the community value.
    double noise_std = 0.1;
    FeatureKind feature_kind = FeatureKind::binary;
};

// Planted-partition graph; label = community. Sensitive column j holds
// (community + j) % 2 for binary data, or community + j + noise for continuous
// data. Non-sensitive columns are community-correlated noise.
Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace aia
