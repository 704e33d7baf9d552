#pragma once

#include <memory>

#include "aia/dataset.hpp"
#include "aia/graph.hpp"
#include "aia/hyper.hpp"
#include "aia/types.hpp"

namespace aia {

class GcnModel;

// Posterior-only access to a trained model. Nothing here reveals weights or
// hidden activations; the only observable side effect is the query counter.
class BlackBoxHandle {
  public:
    BlackBoxHandle(BlackBoxHandle&&) noexcept;
    BlackBoxHandle& operator=(BlackBoxHandle&&) noexcept;
    BlackBoxHandle(const BlackBoxHandle&) = delete;
    BlackBoxHandle& operator=(const BlackBoxHandle&) = delete;
    ~BlackBoxHandle();

    // Softmax posteriors for every row of `features` under `graph`. Thread-safe.
    // Throws QueryError on a shape mismatch or non-finite input.
    Matrix query(const Matrix& features, const SparseGraph& graph) const;

    // Successful query() calls so far.
    std::size_t query_count() const;

    std::size_t input_dim() const;
    std::size_t num_classes() const;

  private:
    struct Impl;
    explicit BlackBoxHandle(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;

    friend BlackBoxHandle seal(GcnModel model);
};

// Trains a GCN on (ds, split) and hands back only its black-box interface.
// Used for the target model and for an attacker's shadow model.
BlackBoxHandle train_black_box(const Dataset& ds, const Split& split, const GcnHyper& hyper,
                               TrainReport* report = nullptr);

}  // namespace aia
