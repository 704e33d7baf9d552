#pragma once

#include "aia/types.hpp"

namespace aia {

// 100 * (hidden cells where inferred == truth) / (hidden cells).
// Throws InputError if a hidden cell of either matrix is not 0/1, and
// ParameterError when nothing is hidden or shapes differ.
double metric_hamming_pct(const Matrix& inferred, const Matrix& truth, const Mask& mask);

// Mean over rows with hidden cells of that row's mean squared error over its
// hidden cells.
double metric_mse(const Matrix& inferred, const Matrix& truth, const Mask& mask);

}  // namespace aia
