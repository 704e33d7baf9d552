#pragma once

#include <array>
#include <span>

#include "aia/hyper.hpp"
#include "aia/types.hpp"

namespace aia {

// Binary classifier: input -> ReLU(h1) -> ReLU(h2) -> softmax(2).
class MlpAttackModel {
  public:
    struct Layer {
        Matrix weight;  // in x out
        Vector bias;
    };

    explicit MlpAttackModel(std::array<Layer, 3> layers) : layers_(std::move(layers)) {}

    std::size_t input_dim() const { return static_cast<std::size_t>(layers_[0].weight.rows()); }
    const std::array<Layer, 3>& layers() const { return layers_; }

    // n x 2 class probabilities; column 1 is P(label = 1).
    Matrix predict_proba(const Matrix& x) const;
    double accuracy(const Matrix& x, std::span<const int> labels) const;

  private:
    std::array<Layer, 3> layers_;
};

// Throws TrainingError unless both labels 0 and 1 occur, InputError on a
// size mismatch or non-finite input.
MlpAttackModel train_mlp(const Matrix& inputs, std::span<const int> labels, const MlpHyper& hyper);

}  // namespace aia
