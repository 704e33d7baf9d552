#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aia/attack.hpp"
#include "aia/dataset.hpp"
#include "aia/hyper.hpp"
#include "aia/imputation.hpp"

namespace aia {

enum class StructureMode { true_graph, knn };
const char* to_string(StructureMode m);
StructureMode structure_mode_from_string(const std::string& s);

struct ExperimentConfig {
    // Directory name under the data root, or an absolute path. Ignored when
    // `synthetic` is set.
    std::string dataset = "cora";
    DatasetFormat format = DatasetFormat::planetoid_like;
    std::optional<SyntheticSpec> synthetic;
    std::uint64_t synthetic_seed = 0;

    std::vector<std::size_t> sensitive_attrs{0};
    Setting setting = Setting::setting1;
    StructureMode structure = StructureMode::true_graph;
    KnnSpec knn;
    AttackKind attack = AttackKind::fp;

    std::size_t train_size = 1000;
    std::optional<std::size_t> test_size;
    std::size_t candidate_count = 100;

    ImputerConfig imputer;  // rounding follows the dataset's feature kind
    double base_threshold = 0.9;
    double decay = 0.95;
    GcnHyper gcn;
    MlpHyper mlp;
    std::size_t shadow_rounds = 1;

    std::vector<std::uint64_t> seeds = default_seeds(0);
    // Where run_experiment writes its record (one JSON line); empty = nowhere.
    std::string output;

    static std::vector<std::uint64_t> default_seeds(std::uint64_t base, std::size_t count = 10);
    void validate() const;
};

struct SeedResult {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double metric = 0.0;
    double mean_confidence = 0.0;
    std::size_t queries_used = 0;
    double target_train_accuracy = 0.0;
    double target_test_accuracy = 0.0;
    std::optional<double> attack_model_holdout_accuracy;
};

struct ExperimentRecord {
    ExperimentConfig config;
    std::string metric_name;  // "hamming_pct" or "mse"
    std::vector<SeedResult> per_seed;
    // Aggregates over successful seeds; std is the population deviation.
    double mean = 0.0;
    double stddev = 0.0;
    double mean_confidence = 0.0;
    double queries_used = 0.0;
    bool partial = false;
    double wall_clock_seconds = 0.0;
};

// Root for relative dataset names: $AIA_DATA_ROOT if set, else ./data.
std::filesystem::path data_root();
Dataset load_experiment_dataset(const ExperimentConfig& cfg);

// Attacker graph over the candidate rows. knn mode works from
// `known_features` alone and never calls `true_graph`.
SparseGraph build_view_graph(const ExperimentConfig& cfg, const std::function<const SparseGraph&()>& true_graph,
                             const std::vector<NodeId>& candidate_ids, const Matrix& known_features);

using OutcomeHook = std::function<void(std::uint64_t seed, const AttackOutcome&)>;

// Per seed: split, mask, train target (and shadow for sa), build the
// attacker view, attack, score. Stage errors are stored on the seed and mark
// the record partial.
ExperimentRecord run_experiment(const ExperimentConfig& cfg, const OutcomeHook& hook = {});
ExperimentRecord run_experiment(const ExperimentConfig& cfg, const Dataset& ds, const OutcomeHook& hook = {});

struct SweepSpec {
    std::vector<std::size_t> train_sizes{100, 200, 500, 1000};
    std::vector<std::size_t> knn_ks;
    std::vector<Setting> settings;
    std::vector<StructureMode> structures;
    std::vector<std::vector<std::size_t>> sensitive_sets;
    std::vector<AttackKind> attacks;
};

// Cartesian product; an empty axis keeps the base value.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& base, const SweepSpec& sweep);

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
SweepSpec sweep_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentRecord& r);
ExperimentRecord experiment_record_from_json(const nlohmann::json& j);

// One CSV row per record.
struct TableRow {
    std::string dataset;
    std::string attack;
    std::string setting;
    std::string structure;
    std::size_t knn_k = 0;
    std::string sensitive_attrs;  // ';'-joined
    std::size_t train_size = 0;
    std::size_t candidate_count = 0;
    std::size_t num_seeds = 0;
    std::size_t failed_seeds = 0;
    std::string metric_name;
    double mean = 0.0;
    double stddev = 0.0;
    double mean_confidence = 0.0;
    double queries_used = 0.0;
    std::string per_seed;  // ';'-joined metric values

    friend bool operator==(const TableRow&, const TableRow&) = default;
};

TableRow table_row(const ExperimentRecord& r);
// Fixed column order, values printed to round-trip exactly, no timing data.
std::string emit_table(const std::vector<ExperimentRecord>& records);
std::vector<TableRow> parse_table(const std::string& csv);

// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace aia
