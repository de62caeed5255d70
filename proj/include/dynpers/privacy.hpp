#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "dynpers/types.hpp"

namespace dynpers {

// Gaussian-mechanism settings for per-event gradient privacy.
struct PrivacyConfig {
  bool enabled = false;
  double epsilon = 1.0;
  double delta = 1e-5;
  double clip_norm = 1.0;      // L2 sensitivity bound
  std::int64_t horizon = 50000;

  void validate() const;
};

// Rescales grad onto the Frobenius ball of radius clip_norm. Gradients already
// inside the ball are returned untouched.
template <typename GradT>
MatrixX<typename GradT::Scalar> clip_gradient(
    const Eigen::MatrixBase<GradT>& grad, typename GradT::Scalar clip_norm) {
  using Scalar = typename GradT::Scalar;
  if (!(clip_norm > Scalar(0))) {
    throw ConfigError("clip_gradient: clip_norm must be > 0");
  }
  const Scalar norm = grad.norm();
  if (norm <= clip_norm) return grad;
  return grad * (clip_norm / norm);
}

// sigma = clip_norm * sqrt(2 T ln(1.25 / delta)) / epsilon
double noise_scale(const PrivacyConfig& config);

// Total epsilon implied by a given sigma; the inverse of noise_scale.
double privacy_epsilon(const PrivacyConfig& config, double sigma);

template <typename GradT, typename Urbg>
MatrixX<typename GradT::Scalar> add_noise(const Eigen::MatrixBase<GradT>& grad,
                                          typename GradT::Scalar sigma,
                                          Urbg& rng) {
  using Scalar = typename GradT::Scalar;
  MatrixX<Scalar> out = grad;
  if (sigma == Scalar(0)) return out;
  if (!(sigma > Scalar(0))) {
    throw ConfigError("add_noise: sigma must be >= 0");
  }
  std::normal_distribution<Scalar> normal(Scalar(0), sigma);
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) += normal(rng);
  }
  return out;
}

}  // namespace dynpers
