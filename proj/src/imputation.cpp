#include "aia/imputation.hpp"

#include <cmath>

#include "aia/random.hpp"

namespace aia {

namespace {

// Sums that equal one half exactly can land an ulp below it after normalisation.
constexpr double kTieTolerance = 1e-9;

std::vector<Eigen::Index> masked_columns(const Mask& mask) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
        if (mask.col(j).any()) cols.push_back(j);
    }
    return cols;
}

void check_shapes(const PartialFeatureMatrix& x) {
    if (x.values.rows() != x.missing_mask.rows() || x.values.cols() != x.missing_mask.cols()) {
        throw ParameterError("imputation: values and missing_mask shapes differ");
    }
    for (Eigen::Index i = 0; i < x.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.values.cols(); ++j) {
            if (!x.missing_mask(i, j) && !std::isfinite(x.values(i, j))) {
                throw DataError("imputation: known cell (" + std::to_string(i) + ", " + std::to_string(j) +
                                ") is not finite");
            }
        }
    }
}

// Fills hidden cells of `cols` with initial random values; everything else is
// copied from x.values.
Matrix random_fill(const PartialFeatureMatrix& x, const std::vector<Eigen::Index>& cols, const ImputerConfig& cfg,
                   std::uint64_t stream) {
    Matrix out = x.values;
    auto engine = rng::make_engine(cfg.seed, stream);
    for (Eigen::Index j : cols) {
        const bool binary = cfg.rounding == Rounding::binary_round;
        const ColumnStats stats = binary ? ColumnStats{} : init_stats(x, static_cast<std::size_t>(j), cfg);
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            if (!x.missing_mask(i, j)) continue;
            out(i, j) = binary ? (rng::bernoulli(engine, 0.5) ? 1.0 : 0.0)
                               : stats.mean + stats.stddev * rng::normal(engine);
        }
    }
    return out;
}

}  // namespace

ColumnStats init_stats(const PartialFeatureMatrix& x, std::size_t col, const ImputerConfig& cfg) {
    const auto j = static_cast<Eigen::Index>(col);
    double sum = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < x.values.rows(); ++i) {
        if (!x.missing_mask(i, j)) {
            sum += x.values(i, j);
            ++count;
        }
    }
    if (count >= 2) {
        const double mean = sum / static_cast<double>(count);
        double ss = 0.0;
        for (Eigen::Index i = 0; i < x.values.rows(); ++i) {
            if (!x.missing_mask(i, j)) ss += (x.values(i, j) - mean) * (x.values(i, j) - mean);
        }
        return {mean, std::sqrt(ss / static_cast<double>(count))};
    }
    if (auto it = cfg.priors.find(col); it != cfg.priors.end()) return it->second;
    return {};
}

Matrix feature_propagate(const PartialFeatureMatrix& x, const SparseGraph& g, const ImputerConfig& cfg) {
    check_shapes(x);
    if (cfg.iterations < 1) throw ParameterError("feature_propagate: iterations must be >= 1");
    if (static_cast<std::size_t>(x.values.rows()) != g.num_nodes()) {
        throw ParameterError("feature_propagate: " + std::to_string(x.values.rows()) + " rows for a graph of " +
                             std::to_string(g.num_nodes()) + " nodes");
    }
    const auto cols = masked_columns(x.missing_mask);
    Matrix out = random_fill(x, cols, cfg, 0xf9);
    if (cols.empty()) return out;

    // Only columns with hidden cells can change; the rest are reset each round.
    const SparseMatrix op = propagation_operator(g, cfg.operator_kind).matrix;
    const auto n = out.rows();
    Matrix block(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) block.col(static_cast<Eigen::Index>(c)) = out.col(cols[c]);

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        block = op * block;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const Eigen::Index j = cols[c];
            const auto bc = static_cast<Eigen::Index>(c);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (x.missing_mask(i, j)) {
                    if (cfg.rounding == Rounding::binary_round) block(i, bc) = block(i, bc) >= 0.5 - kTieTolerance ? 1.0 : 0.0;
                } else {
                    block(i, bc) = x.values(i, j);
                }
            }
        }
    }
    for (std::size_t c = 0; c < cols.size(); ++c) out.col(cols[c]) = block.col(static_cast<Eigen::Index>(c));
    return out;
}

Matrix random_impute(const PartialFeatureMatrix& x, const ImputerConfig& cfg) {
    check_shapes(x);
    return random_fill(x, masked_columns(x.missing_mask), cfg, 0x41);
}

}  // namespace aia
