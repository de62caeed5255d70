#include "dynpers/environment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dynpers {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::kRecommendation: return "recommendation";
    case EnvKind::kAssistant: return "assistant";
    case EnvKind::kLearning: return "learning";
  }
  return "recommendation";
}

EnvKind parse_env_kind(const std::string& text) {
  if (text == "recommendation") return EnvKind::kRecommendation;
  if (text == "assistant") return EnvKind::kAssistant;
  if (text == "learning") return EnvKind::kLearning;
  throw ConfigError("unknown environment kind '" + text + "'");
}

void EnvConfig::validate() const {
  if (num_actions < 1) throw ConfigError("env.num_actions must be >= 1");
  if (ctx_dim < 1) throw ConfigError("env.ctx_dim must be >= 1");
  if (!(drift_rate >= 0.0)) throw ConfigError("env.drift_rate must be >= 0");
  if (!(noise_implicit >= 0.0) || !(noise_explicit >= 0.0)) {
    throw ConfigError("env.noise_implicit/env.noise_explicit must be >= 0");
  }
  if (noise_implicit > 0.0 && !(noise_explicit < noise_implicit)) {
    throw ConfigError("env.noise_explicit must be below env.noise_implicit");
  }
  for (std::size_t i = 0; i < change_points.size(); ++i) {
    if (change_points[i] <= 0 ||
        (i > 0 && change_points[i] <= change_points[i - 1])) {
      throw ConfigError(
          "env.change_points must be positive and strictly increasing");
    }
  }
  if (fatigue.window < 1) throw ConfigError("env.fatigue.window must be >= 1");
  if (!(fatigue.penalty >= 0.0) || !(fatigue.recovery >= 0.0)) {
    throw ConfigError("env.fatigue.penalty/recovery must be >= 0");
  }
  if (!(initial_engagement >= 0.0 && initial_engagement <= 1.0)) {
    throw ConfigError("env.initial_engagement must lie in [0, 1]");
  }
  if (!(kernel_width > 0.0)) throw ConfigError("env.kernel_width must be > 0");
}

Environment::Environment(EnvConfig config)
    : config_(std::move(config)),
      rng_(config_.seed),
      engagement_(config_.initial_engagement),
      request_ring_(static_cast<std::size_t>(std::max<std::int64_t>(
                        config_.fatigue.window, 1)),
                    0) {
  config_.validate();
  pref_.resize(config_.num_actions, config_.ctx_dim);
  resample_preferences();
}

void Environment::resample_preferences() {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < pref_.rows(); ++i) {
    for (Eigen::Index j = 0; j < pref_.cols(); ++j) pref_(i, j) = normal(rng_);
  }
  pref_.rowwise().normalize();
}

Observation Environment::observe() {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  ContextVector ctx(config_.ctx_dim);
  for (Eigen::Index j = 0; j < ctx.size(); ++j) ctx(j) = unit(rng_);
  return {std::move(ctx), engagement_};
}

double Environment::true_satisfaction(const ContextVector& ctx,
                                      ActionId action) const {
  if (action >= static_cast<ActionId>(pref_.rows())) {
    throw std::out_of_range("true_satisfaction: invalid action");
  }
  const auto a = static_cast<Eigen::Index>(action);
  if (config_.kind != EnvKind::kLearning) {
    return logistic(pref_.row(a).dot(ctx));
  }
  const double knowledge = logistic(pref_.row(0).dot(ctx));
  const double difficulty =
      pref_.rows() == 1 ? 0.5
                        : static_cast<double>(a) /
                              static_cast<double>(pref_.rows() - 1);
  const double gap = (difficulty - knowledge) / config_.kernel_width;
  return std::exp(-gap * gap);
}

Eigen::VectorXd Environment::oracle_all(const ContextVector& ctx) const {
  Eigen::VectorXd values(pref_.rows());
  for (Eigen::Index a = 0; a < values.size(); ++a) {
    values(a) = true_satisfaction(ctx, static_cast<ActionId>(a));
  }
  return values;
}

FeedbackEvent Environment::act(const ContextVector& ctx, ActionId action,
                               bool explicit_requested) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Fixed draw order: implicit noise, explicit noise, compliance.
  const double z_implicit = normal(rng_);
  const double z_explicit = normal(rng_);
  const double u_comply = unit(rng_);

  const double truth = true_satisfaction(ctx, action);
  FeedbackEvent event;
  event.step = step_;
  event.implicit = clamp01(truth + config_.noise_implicit * z_implicit);
  event.requested = explicit_requested;

  const auto& fatigue = config_.fatigue;
  if (explicit_requested) {
    const double comply_prob =
        clamp01(fatigue.c0 - fatigue.c1 * static_cast<double>(recent_count_) /
                                 static_cast<double>(fatigue.window));
    event.complied = u_comply < comply_prob;
    if (event.complied) {
      event.explicit_value =
          clamp01(truth + config_.noise_explicit * z_explicit);
    }
    engagement_ = clamp01(engagement_ - fatigue.penalty);
  } else {
    engagement_ = clamp01(engagement_ + fatigue.recovery);
  }

  const auto slot =
      static_cast<std::size_t>(step_ % static_cast<std::int64_t>(request_ring_.size()));
  recent_count_ += (explicit_requested ? 1 : 0) - request_ring_[slot];
  request_ring_[slot] = explicit_requested ? 1 : 0;

  if (config_.drift_rate > 0.0) {
    for (Eigen::Index i = 0; i < pref_.rows(); ++i) {
      for (Eigen::Index j = 0; j < pref_.cols(); ++j) {
        pref_(i, j) += config_.drift_rate * normal(rng_);
      }
    }
    pref_.rowwise().normalize();
  }

  ++step_;
  if (next_change_ < config_.change_points.size() &&
      config_.change_points[next_change_] == step_) {
    resample_preferences();
    ++next_change_;
  }
  return event;
}

}  // namespace dynpers
