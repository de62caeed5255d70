#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dynpers {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Row a of the parameter matrix is the weight vector of action a.
using PolicyParams = MatrixX<double>;
using GradientVector = MatrixX<double>;
using ContextVector = VectorX<double>;
using ActionDistribution = VectorX<double>;

using ActionId = std::size_t;

// All stochastic components draw from this engine so runs are reproducible
// bit for bit on a given toolchain.
using Rng = std::mt19937_64;

// Raised for invalid configuration: dimension mismatches, out-of-range
// hyperparameters, unknown config keys.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace dynpers
