#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace aia {

using NodeId = std::size_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Caller passed an out-of-range size, count or option.
class ParameterError : public Error {
  public:
    using Error::Error;
};

// Input values violate a data contract (non-finite, non-binary, ...).
class DataError : public Error {
  public:
    using Error::Error;
};

class LoadError : public Error {
  public:
    using Error::Error;
};

class QueryError : public Error {
  public:
    using Error::Error;
};

class TrainingError : public Error {
  public:
    using Error::Error;
};

class InputError : public Error {
  public:
    using Error::Error;
};

class UnsupportedConfiguration : public Error {
  public:
    using Error::Error;
};

// Broken internal invariant, never expected on valid input.
class InternalError : public Error {
  public:
    using Error::Error;
};

enum class FeatureKind { binary, continuous };

}  // namespace aia
