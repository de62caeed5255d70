#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dynpers/types.hpp"

namespace dynpers {

enum class EnvKind { kRecommendation, kAssistant, kLearning };

std::string to_string(EnvKind kind);
EnvKind parse_env_kind(const std::string& text);

// Compliance with an explicit request is clamp(c0 - c1 * recent / window, 0, 1)
// where recent counts requests in the preceding `window` steps.
struct FatigueModel {
  double c0 = 0.85;
  double c1 = 1.5;
  std::int64_t window = 50;
  double penalty = 0.02;    // engagement lost per request
  double recovery = 0.005;  // engagement regained per step without a request
};

struct EnvConfig {
  EnvKind kind = EnvKind::kRecommendation;
  std::int64_t num_actions = 50;
  std::int64_t ctx_dim = 16;
  double drift_rate = 0.0;
  std::vector<std::int64_t> change_points;
  double noise_implicit = 0.2;
  double noise_explicit = 0.05;
  FatigueModel fatigue;
  double initial_engagement = 0.8;
  double kernel_width = 0.25;  // learning kind only
  std::uint64_t seed = 1;

  void validate() const;
};

struct Observation {
  ContextVector ctx;
  double engagement = 0.0;
};

struct FeedbackEvent {
  std::int64_t step = 0;
  double implicit = 0.0;
  std::optional<double> explicit_value;
  bool requested = false;
  bool complied = false;

  // Explicit rating when present, otherwise the implicit signal.
  double preferred() const { return explicit_value.value_or(implicit); }
};

// Seeded synthetic user. Satisfaction is
//   recommendation / assistant: logistic(pref.row(a) . ctx)
//   learning: exp(-(difficulty(a) - knowledge(ctx))^2 / w^2) with
//             difficulty(a) = a / (|A| - 1), knowledge = logistic(pref.row(0) . ctx)
// Every step draws the same number of variates whatever the agent does, so
// different agents run against one seed see identical contexts and noise.
class Environment {
 public:
  explicit Environment(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  const PolicyParams& preferences() const { return pref_; }
  double engagement() const { return engagement_; }
  std::int64_t step() const { return step_; }
  std::int64_t recent_requests() const { return recent_count_; }

  Observation observe();

  double true_satisfaction(const ContextVector& ctx, ActionId action) const;
  Eigen::VectorXd oracle_all(const ContextVector& ctx) const;

  // Emits feedback for the current step and advances the user state.
  FeedbackEvent act(const ContextVector& ctx, ActionId action,
                    bool explicit_requested);

 private:
  void resample_preferences();

  EnvConfig config_;
  Rng rng_;
  PolicyParams pref_;
  double engagement_;
  std::int64_t step_ = 0;
  std::vector<char> request_ring_;
  std::int64_t recent_count_ = 0;
  std::size_t next_change_ = 0;
};

}  // namespace dynpers
