#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "dynpers/types.hpp"

namespace dynpers {

// Softmax-linear contextual policy. Scores are score(a) = weights.row(a) . ctx
// and the action distribution is softmax(scores).

namespace detail {

template <typename WeightsT, typename CtxT>
void check_dims(const Eigen::MatrixBase<WeightsT>& weights,
                const Eigen::MatrixBase<CtxT>& ctx) {
  if (weights.cols() != ctx.size()) {
    throw ConfigError("policy: weights have " + std::to_string(weights.cols()) +
                      " columns but context has dimension " +
                      std::to_string(ctx.size()));
  }
  if (weights.rows() == 0) {
    throw ConfigError("policy: empty action space");
  }
}

}  // namespace detail

template <typename WeightsT, typename CtxT>
VectorX<typename WeightsT::Scalar> action_scores(
    const Eigen::MatrixBase<WeightsT>& weights,
    const Eigen::MatrixBase<CtxT>& ctx) {
  detail::check_dims(weights, ctx);
  return weights * ctx;
}

// Softmax over a score vector with max-subtraction.
template <typename ScoresT>
VectorX<typename ScoresT::Scalar> softmax(
    const Eigen::MatrixBase<ScoresT>& scores) {
  using Scalar = typename ScoresT::Scalar;
  const Scalar top = scores.maxCoeff();
  VectorX<Scalar> probs = (scores.array() - top).exp().matrix();
  probs /= probs.sum();
  return probs;
}

template <typename WeightsT, typename CtxT>
VectorX<typename WeightsT::Scalar> action_probabilities(
    const Eigen::MatrixBase<WeightsT>& weights,
    const Eigen::MatrixBase<CtxT>& ctx) {
  return softmax(action_scores(weights, ctx));
}

// Inverse-CDF draw. Consumes exactly one uniform variate per call.
template <typename ProbsT, typename Urbg>
ActionId sample_action(const Eigen::MatrixBase<ProbsT>& probs, Urbg& rng) {
  using Scalar = typename ProbsT::Scalar;
  std::uniform_real_distribution<Scalar> unit(Scalar(0), Scalar(1));
  const Scalar u = unit(rng);
  Scalar acc = 0;
  const Eigen::Index n = probs.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += probs(i);
    if (u < acc) return static_cast<ActionId>(i);
  }
  // u landed in the rounding slack above the cumulative sum: return the last
  // action carrying positive mass.
  for (Eigen::Index i = n - 1; i > 0; --i) {
    if (probs(i) > Scalar(0)) return static_cast<ActionId>(i);
  }
  return 0;
}

// d/dweights log pi(action | ctx). Row a' equals (1[a' = action] - pi(a')) ctx.
template <typename WeightsT, typename CtxT>
MatrixX<typename WeightsT::Scalar> log_prob_gradient(
    const Eigen::MatrixBase<WeightsT>& weights,
    const Eigen::MatrixBase<CtxT>& ctx, ActionId action) {
  using Scalar = typename WeightsT::Scalar;
  if (action >= static_cast<ActionId>(weights.rows())) {
    throw std::out_of_range("log_prob_gradient: action " +
                            std::to_string(action) + " outside [0, " +
                            std::to_string(weights.rows()) + ")");
  }
  VectorX<Scalar> coeff = -action_probabilities(weights, ctx);
  coeff(static_cast<Eigen::Index>(action)) += Scalar(1);
  return coeff * ctx.transpose();
}

// Shannon entropy in nats, with 0 log 0 taken as 0.
template <typename ProbsT>
typename ProbsT::Scalar entropy(const Eigen::MatrixBase<ProbsT>& probs) {
  using Scalar = typename ProbsT::Scalar;
  Scalar h = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const Scalar p = probs(i);
    if (p > Scalar(0)) h -= p * std::log(p);
  }
  return std::max(h, Scalar(0));
}

// The k highest-scoring actions, best first; equal scores are ordered by
// ascending action id.
template <typename WeightsT, typename CtxT>
std::vector<ActionId> top_k(const Eigen::MatrixBase<WeightsT>& weights,
                            const Eigen::MatrixBase<CtxT>& ctx, std::size_t k) {
  const auto scores = action_scores(weights, ctx);
  const auto n = static_cast<std::size_t>(scores.size());
  if (k < 1 || k > n) {
    throw std::out_of_range("top_k: k = " + std::to_string(k) +
                            " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<ActionId> order(n);
  std::iota(order.begin(), order.end(), ActionId{0});
  std::stable_sort(order.begin(), order.end(), [&](ActionId a, ActionId b) {
    return scores(static_cast<Eigen::Index>(a)) >
           scores(static_cast<Eigen::Index>(b));
  });
  order.resize(k);
  return order;
}

}  // namespace dynpers
