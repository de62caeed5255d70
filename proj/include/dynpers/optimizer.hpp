#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "dynpers/policy.hpp"
#include "dynpers/types.hpp"

namespace dynpers {

struct OptimizerConfig {
  double alpha0 = 0.01;   // initial learning rate
  double beta = 0.1;      // sensitivity of the rate to feedback variance
  double gamma = 0.9;     // first-moment decay
  double gamma_v = 0.999; // second-moment decay
  double eps_stab = 1e-8;
  // When false the second moment is ignored and the step is lr * m.
  bool normalize = true;

  void validate() const;
};

struct OptimizerState {
  GradientVector m;
  GradientVector v;
  std::int64_t step = 0;

  static OptimizerState zeros(Eigen::Index actions, Eigen::Index dim) {
    return {GradientVector::Zero(actions, dim), GradientVector::Zero(actions, dim),
            0};
  }
};

// Welford running mean / population variance of the feedback stream.
class VarianceTracker {
 public:
  void observe(double feedback) {
    ++count_;
    const double delta = feedback - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (feedback - mean_);
  }

  std::int64_t count() const { return count_; }
  double mean() const { return mean_; }
  double m2() const { return m2_; }
  double variance() const {
    return count_ == 0 ? 0.0 : m2_ / static_cast<double>(count_);
  }

 private:
  std::int64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline VarianceTracker observe_feedback(VarianceTracker tracker,
                                        double feedback) {
  tracker.observe(feedback);
  return tracker;
}

// alpha0 / (1 + beta * Var[f_{1:t}])
inline double adaptive_lr(const OptimizerConfig& config,
                          const VarianceTracker& tracker) {
  return config.alpha0 / (1.0 + config.beta * tracker.variance());
}

// Score-function gradient f * d/dtheta log pi(action | ctx).
template <typename WeightsT, typename CtxT>
MatrixX<typename WeightsT::Scalar> reinforce_gradient(
    const Eigen::MatrixBase<WeightsT>& weights,
    const Eigen::MatrixBase<CtxT>& ctx, ActionId action,
    typename WeightsT::Scalar feedback) {
  using Scalar = typename WeightsT::Scalar;
  if (!(feedback >= Scalar(0) && feedback <= Scalar(1))) {
    throw std::domain_error("reinforce_gradient: feedback " +
                            std::to_string(feedback) + " outside [0, 1]");
  }
  return feedback * log_prob_gradient(weights, ctx, action);
}

// One ascent step:
//   m <- gamma m + (1 - gamma) g
//   v <- gamma_v v + (1 - gamma_v) g^2
//   params <- params + lr * m / sqrt(v + eps)
// A non-finite gradient is rejected before any state is touched.
template <typename GradT>
void apply_update(const OptimizerConfig& config, OptimizerState& state,
                  PolicyParams& params, const Eigen::MatrixBase<GradT>& grad,
                  double lr) {
  if (grad.rows() != params.rows() || grad.cols() != params.cols() ||
      state.m.rows() != params.rows() || state.m.cols() != params.cols()) {
    throw ConfigError("apply_update: shape mismatch");
  }
  if (!grad.allFinite()) {
    throw std::domain_error("apply_update: non-finite gradient rejected");
  }
  if (!(lr > 0.0)) {
    throw std::domain_error("apply_update: learning rate must be positive");
  }
  const double g = config.gamma;
  state.m = g * state.m + (1.0 - g) * grad;
  if (config.normalize) {
    const double gv = config.gamma_v;
    state.v = gv * state.v + (1.0 - gv) * grad.cwiseProduct(grad);
    params.array() +=
        lr * state.m.array() / (state.v.array() + config.eps_stab).sqrt();
  } else {
    params += lr * state.m;
  }
  ++state.step;
}

}  // namespace dynpers
