#pragma once

#include <filesystem>
#include <span>

#include "aia/black_box.hpp"
#include "aia/dataset.hpp"
#include "aia/hyper.hpp"
#include "aia/types.hpp"

namespace aia {

// logits = S relu(S X W0) W1 for a renormalized operator S.
class GcnModel {
  public:
    GcnModel(Matrix w0, Matrix w1, GcnHyper hyper = {});

    const Matrix& w0() const { return w0_; }
    const Matrix& w1() const { return w1_; }
    const GcnHyper& hyper() const { return hyper_; }
    std::size_t input_dim() const { return static_cast<std::size_t>(w0_.rows()); }
    std::size_t num_classes() const { return static_cast<std::size_t>(w1_.cols()); }

    Matrix logits(const SparseMatrix& op, const Matrix& x) const;
    Matrix posteriors(const SparseMatrix& op, const Matrix& x) const;

    friend bool operator==(const GcnModel& a, const GcnModel& b);

  private:
    Matrix w0_;
    Matrix w1_;
    GcnHyper hyper_;
};

// Row-wise softmax, max-shifted.
Matrix softmax_rows(const Matrix& logits);

struct GcnGradients {
    double loss = 0.0;
    Matrix d_w0;
    Matrix d_w1;
};

// Mean cross-entropy over `ids` plus (weight_decay / 2) * (|W0|^2 + |W1|^2),
// with analytic gradients.
GcnGradients gcn_loss_and_gradients(const GcnModel& model, const SparseMatrix& op, const Matrix& x,
                                    std::span<const std::int32_t> labels, std::span<const NodeId> ids);

struct TrainedGcn {
    GcnModel model;
    TrainReport report;
};

// Inductive training: the model sees the subgraph induced by train_ids and is
// evaluated on the subgraph induced by test_ids. Glorot init from hyper.seed.
// Throws TrainingError if the loss becomes non-finite.
TrainedGcn train_gcn(const Dataset& ds, const Split& split, const GcnHyper& hyper);

// Fraction of `ids` whose argmax posterior equals the label.
double accuracy(const Matrix& posteriors, std::span<const std::int32_t> labels, std::span<const NodeId> ids);

// Text checkpoint; weights are written as hex floats so load(save(m)) == m.
void save_checkpoint(const GcnModel& model, const std::filesystem::path& path);
GcnModel load_checkpoint(const std::filesystem::path& path);

BlackBoxHandle seal(GcnModel model);

}  // namespace aia
