#pragma once

#include <cstdint>
#include <map>

#include "dynpers/environment.hpp"
#include "dynpers/gate.hpp"
#include "dynpers/optimizer.hpp"
#include "dynpers/privacy.hpp"
#include "dynpers/types.hpp"

namespace dynpers {

struct EngineConfig {
  OptimizerConfig optimizer;
  GateConfig gate;
  PrivacyConfig privacy;
  std::uint64_t noise_seed = 0;  // seeds the privacy noise stream
};

struct StepResult {
  ActionId action = 0;
  bool requested_explicit = false;
  double entropy = 0.0;
};

// Per-user online learner. Each step samples from the softmax policy and
// consults the feedback gate; each ingested event feeds the variance tracker,
// forms the score-function gradient (clipped and noised when privacy is on)
// and applies the moment-normalized ascent step at the variance-adapted rate.
//
// Feedback may arrive late: every step stays pending until its event is
// ingested, and the gradient is taken at the parameters current at ingestion.
class AdaptiveEngine {
 public:
  AdaptiveEngine(Eigen::Index actions, Eigen::Index dim, EngineConfig config);

  StepResult step(const Observation& obs, Rng& rng);

  // Throws std::invalid_argument for an event with no pending step.
  void ingest(const FeedbackEvent& event);

  const EngineConfig& config() const { return config_; }
  const PolicyParams& params() const { return params_; }
  const OptimizerState& optimizer_state() const { return state_; }
  const VarianceTracker& tracker() const { return tracker_; }
  const GateState& gate_state() const { return gate_; }
  double current_lr() const { return adaptive_lr(config_.optimizer, tracker_); }
  std::int64_t steps_taken() const { return t_; }
  std::size_t pending() const { return pending_.size(); }

  ActionDistribution policy(const ContextVector& ctx) const {
    return action_probabilities(params_, ctx);
  }

 private:
  struct Pending {
    ContextVector ctx;
    ActionId action;
  };

  EngineConfig config_;
  PolicyParams params_;
  OptimizerState state_;
  VarianceTracker tracker_;
  GateState gate_;
  Rng noise_rng_;
  double sigma_ = 0.0;
  std::int64_t t_ = 0;
  std::map<std::int64_t, Pending> pending_;
};

}  // namespace dynpers
