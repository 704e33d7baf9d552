#pragma once

#include <cstdint>
#include <map>

#include "aia/dataset.hpp"
#include "aia/graph.hpp"
#include "aia/types.hpp"

namespace aia {

enum class Rounding { binary_round, none };

struct ColumnStats {
    double mean = 0.0;
    double stddev = 1.0;
};

struct ImputerConfig {
    std::size_t iterations = 40;
    // binary_round also selects the binary initialisation (fair coin per cell);
    // none selects the Gaussian initialisation.
    Rounding rounding = Rounding::binary_round;
    OperatorKind operator_kind = OperatorKind::normalized_adjacency;
    std::uint64_t seed = 0;
    // Per-column fallback used when a column has fewer than two known cells.
    std::map<std::size_t, ColumnStats> priors;
};

// Iterative diffusion of known values into hidden cells:
//   repeat `iterations` times: X <- L X; round (binary); reset known cells.
// Hidden cells start random. Known cells of the result equal the input bit
// for bit.
Matrix feature_propagate(const PartialFeatureMatrix& x, const SparseGraph& g, const ImputerConfig& cfg);

// Hidden binary cells <- Bernoulli(0.5); hidden continuous cells <- column
// mean + column std * N(0, 1).
Matrix random_impute(const PartialFeatureMatrix& x, const ImputerConfig& cfg);

// Mean/std used to initialise column `col`: known cells when there are at
// least two, else cfg.priors, else N(0, 1).
ColumnStats init_stats(const PartialFeatureMatrix& x, std::size_t col, const ImputerConfig& cfg);

}  // namespace aia
