#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "aia/black_box.hpp"
#include "aia/dataset.hpp"
#include "aia/graph.hpp"
#include "aia/hyper.hpp"
#include "aia/imputation.hpp"
#include "aia/mlp.hpp"

namespace aia {

using ConfidenceVector = Vector;

// Per row: max(row) - mean(row without one copy of its max). In [0, 1] for
// any probability row. Throws InputError if a row is not a distribution
// (negative entry or sum off by more than 1e-6).
ConfidenceVector confidence_scores(const Matrix& posteriors);

enum class InitKind { feature_propagation, random };

struct AttackConfig {
    double base_threshold = 0.9;
    double decay = 0.95;
    ImputerConfig imputer;
    // Called with every feature matrix sent to the target, in order.
    std::function<void(const Matrix& queried)> on_query;
};

struct TraceRecord {
    std::size_t iteration = 0;
    double threshold = 0.0;  // value compared against in this iteration
    std::optional<NodeId> fixed_node;
    double max_confidence = 0.0;
    std::size_t query_count = 0;  // queries issued by this attack so far
};

struct AttackOutcome {
    Matrix reconstructed;
    // Mean confidence over the rows that were hidden at the start.
    double mean_confidence = 0.0;
    // Same final query, averaged over every row.
    double mean_confidence_all_rows = 0.0;
    std::size_t queries_used = 0;
    ConfidenceVector per_node_confidence;
    std::vector<TraceRecord> trace;
    // Shadow attack only: accuracy of the attack classifier on held-out
    // shadow posteriors.
    std::optional<double> attack_model_holdout_accuracy;
};

// Repeated impute/query loop. Each round re-runs the initialiser with fixed
// rows treated as known, queries the model, and fixes the most confident
// unfixed row if its score is strictly above the threshold (threshold back
// to base), otherwise multiplies the threshold by `decay`. One more query at
// the end scores the completed matrix.
AttackOutcome attack_iterative(const BlackBoxHandle& handle, const PartialFeatureMatrix& x, const SparseGraph& g,
                               InitKind init, const AttackConfig& cfg);

// Runs the initialiser once; the single query only measures confidence.
AttackOutcome attack_single_pass(const BlackBoxHandle& handle, const PartialFeatureMatrix& x, const SparseGraph& g,
                                 InitKind init, const AttackConfig& cfg);

struct KnnSpec {
    std::size_t k = 5;
    KnnMetric metric = KnnMetric::euclidean;
};

struct ShadowConfig {
    AttackConfig attack;
    GcnHyper shadow_gcn;
    MlpHyper mlp;
    // Graph for the shadow candidate view: induced subgraph when empty.
    std::optional<KnnSpec> knn;
    // Number of (true, random) labelling rounds over the shadow candidates.
    std::size_t rounds = 1;
    double holdout_fraction = 0.2;
    std::uint64_t seed = 0;
};

// Shadow attack for binary sensitive attributes. Trains a shadow GCN on
// shadow_split.shadow_{train,test}_ids of shadow_ds, labels its posteriors
// (true sensitive values -> 1, random values -> 0), fits an MLP, then for
// each hidden target row picks the value assignment whose target posterior
// the MLP rates most likely to be "true". Ties go to the lower assignment.
// Throws UnsupportedConfiguration for non-binary sensitive columns.
AttackOutcome attack_shadow(const BlackBoxHandle& target, const Dataset& shadow_ds, const Split& shadow_split,
                            const PartialFeatureMatrix& x, const SparseGraph& g, const ShadowConfig& cfg);

// Scores how likely `posterior` (the target's output for `row`) came from
// the row's true sensitive values.
using PosteriorScorer = std::function<double(NodeId row, const Vector& posterior)>;

// Target-side half of the shadow attack. Hidden cells start as coin flips;
// then each hidden row in turn tries every 0/1 assignment of its hidden cells
// against that fixed background (one query each) and keeps the best-scoring
// one, the lowest assignment on ties.
AttackOutcome shadow_select(const BlackBoxHandle& target, const PartialFeatureMatrix& x, const SparseGraph& g,
                            const PosteriorScorer& score, const ImputerConfig& imputer);

enum class AttackKind { fp, ri, fp_ma, ri_ma, sa };
const char* to_string(AttackKind k);
AttackKind attack_kind_from_string(const std::string& s);

// Joint inference over every sensitive column of x: imputers fill all m
// columns together and iterative attacks fix a row's whole m-vector at once.
// `sa` needs shadow data; use attack_shadow for it.
AttackOutcome infer_multi(const BlackBoxHandle& handle, const PartialFeatureMatrix& x, const SparseGraph& g,
                          AttackKind kind, const AttackConfig& cfg);

// One JSON object per line.
void write_trace_jsonl(const std::vector<TraceRecord>& trace, std::ostream& out);

}  // namespace aia
