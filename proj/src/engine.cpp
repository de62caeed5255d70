#include "dynpers/engine.hpp"

#include <stdexcept>

namespace dynpers {

void OptimizerConfig::validate() const {
  if (!(alpha0 > 0.0)) throw ConfigError("optimizer.alpha0 must be > 0");
  if (!(beta >= 0.0)) throw ConfigError("optimizer.beta must be >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ConfigError("optimizer.gamma must lie in [0, 1)");
  }
  if (!(gamma_v >= 0.0 && gamma_v < 1.0)) {
    throw ConfigError("optimizer.gamma_v must lie in [0, 1)");
  }
  if (!(eps_stab > 0.0)) throw ConfigError("optimizer.eps_stab must be > 0");
}

AdaptiveEngine::AdaptiveEngine(Eigen::Index actions, Eigen::Index dim,
                               EngineConfig config)
    : config_(std::move(config)),
      params_(PolicyParams::Zero(actions, dim)),
      state_(OptimizerState::zeros(actions, dim)),
      noise_rng_(config_.noise_seed) {
  if (actions < 1 || dim < 1) {
    throw ConfigError("engine: action count and context dimension must be >= 1");
  }
  config_.optimizer.validate();
  config_.gate.validate();
  if (config_.privacy.enabled) sigma_ = noise_scale(config_.privacy);
}

StepResult AdaptiveEngine::step(const Observation& obs, Rng& rng) {
  const ActionDistribution probs = action_probabilities(params_, obs.ctx);
  StepResult result;
  result.action = sample_action(probs, rng);
  result.entropy = entropy(probs);
  result.requested_explicit =
      gate_decision(config_.gate, gate_, result.entropy, t_, obs.engagement);
  if (result.requested_explicit) gate_.record(t_);
  pending_.emplace(t_, Pending{obs.ctx, result.action});
  ++t_;
  return result;
}

void AdaptiveEngine::ingest(const FeedbackEvent& event) {
  const auto it = pending_.find(event.step);
  if (it == pending_.end()) {
    throw std::invalid_argument("engine: no pending step " +
                                std::to_string(event.step));
  }
  const double feedback = event.preferred();
  GradientVector grad =
      reinforce_gradient(params_, it->second.ctx, it->second.action, feedback);
  if (config_.privacy.enabled) {
    grad = add_noise(clip_gradient(grad, config_.privacy.clip_norm), sigma_,
                     noise_rng_);
  }
  tracker_.observe(feedback);
  apply_update(config_.optimizer, state_, params_, grad, current_lr());
  pending_.erase(it);
}

}  // namespace dynpers
