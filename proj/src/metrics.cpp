#include "aia/metrics.hpp"

#include <cmath>

namespace aia {

namespace {

void check_shapes(const Matrix& inferred, const Matrix& truth, const Mask& mask, const char* who) {
    if (inferred.rows() != truth.rows() || inferred.cols() != truth.cols() || mask.rows() != truth.rows() ||
        mask.cols() != truth.cols()) {
        throw ParameterError(std::string(who) + ": shape mismatch");
    }
    if (!mask.any()) throw ParameterError(std::string(who) + ": no hidden cells");
}

}  // namespace

double metric_hamming_pct(const Matrix& inferred, const Matrix& truth, const Mask& mask) {
    check_shapes(inferred, truth, mask, "metric_hamming_pct");
    std::size_t total = 0;
    std::size_t equal = 0;
    for (Eigen::Index i = 0; i < mask.rows(); ++i) {
        for (Eigen::Index j = 0; j < mask.cols(); ++j) {
            if (!mask(i, j)) continue;
            const double a = inferred(i, j);
            const double b = truth(i, j);
            if ((a != 0.0 && a != 1.0) || (b != 0.0 && b != 1.0)) {
                throw InputError("metric_hamming_pct: non-binary value at (" + std::to_string(i) + ", " +
                                 std::to_string(j) + ")");
            }
            ++total;
            if (a == b) ++equal;
        }
    }
    return 100.0 * static_cast<double>(equal) / static_cast<double>(total);
}

double metric_mse(const Matrix& inferred, const Matrix& truth, const Mask& mask) {
    check_shapes(inferred, truth, mask, "metric_mse");
    double sum = 0.0;
    std::size_t rows = 0;
    for (Eigen::Index i = 0; i < mask.rows(); ++i) {
        double row_sum = 0.0;
        std::size_t cells = 0;
        for (Eigen::Index j = 0; j < mask.cols(); ++j) {
            if (!mask(i, j)) continue;
            if (!std::isfinite(inferred(i, j)) || !std::isfinite(truth(i, j))) {
                throw InputError("metric_mse: non-finite value at (" + std::to_string(i) + ", " + std::to_string(j) +
                                 ")");
            }
            const double d = inferred(i, j) - truth(i, j);
            row_sum += d * d;
            ++cells;
        }
        if (cells == 0) continue;
        sum += row_sum / static_cast<double>(cells);
        ++rows;
    }
    return sum / static_cast<double>(rows);
}

}  // namespace aia
