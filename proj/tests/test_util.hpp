#pragma once

#include <random>

#include "dynpers/types.hpp"

namespace dynpers::testing {

inline PolicyParams random_params(Eigen::Index rows, Eigen::Index cols,
                                  std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  PolicyParams p(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) p(i, j) = normal(rng);
  return p;
}

inline ContextVector random_ctx(Eigen::Index dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  ContextVector x(dim);
  for (Eigen::Index j = 0; j < dim; ++j) x(j) = unit(rng);
  return x;
}

inline Eigen::Index random_size(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace dynpers::testing
