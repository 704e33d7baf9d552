#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace aia {

// 2-layer GCN trained by full-batch gradient descent.
struct GcnHyper {
    std::size_t hidden = 16;
    double learning_rate = 0.5;
    std::size_t epochs = 200;
    double weight_decay = 5e-4;
    std::uint64_t seed = 0;
};

struct TrainReport {
    double train_accuracy = std::numeric_limits<double>::quiet_NaN();
    double test_accuracy = std::numeric_limits<double>::quiet_NaN();
    double final_loss = std::numeric_limits<double>::quiet_NaN();
};

// 3-layer MLP (two hidden ReLU layers) trained with Adam, full batch.
struct MlpHyper {
    std::size_t hidden1 = 32;
    std::size_t hidden2 = 32;
    std::size_t epochs = 200;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
};

}  // namespace aia
