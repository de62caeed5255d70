#include "dynpers/agents.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dynpers/optimizer.hpp"
#include "dynpers/policy.hpp"

namespace dynpers {

namespace {

template <typename Map>
auto take_pending(Map& pending, std::int64_t step, const char* who) {
  const auto it = pending.find(step);
  if (it == pending.end()) {
    throw std::invalid_argument(std::string(who) + ": no pending step " +
                                std::to_string(step));
  }
  auto value = std::move(it->second);
  pending.erase(it);
  return value;
}

ActionDistribution one_hot(Eigen::Index n, ActionId action) {
  ActionDistribution probs = ActionDistribution::Zero(n);
  probs(static_cast<Eigen::Index>(action)) = 1.0;
  return probs;
}

}  // namespace

// ---------------------------------------------------------------------------

DynamicAgent::DynamicAgent(Eigen::Index actions, Eigen::Index dim,
                           EngineConfig config)
    : engine_(actions, dim, std::move(config)) {}

Decision DynamicAgent::select(const Observation& obs, Rng& rng) {
  const StepResult r = engine_.step(obs, rng);
  return {r.action, r.requested_explicit};
}

// ---------------------------------------------------------------------------

BatchProfileAgent::BatchProfileAgent(std::string name, Eigen::Index actions,
                                     Eigen::Index dim, BatchSettings settings)
    : name_(std::move(name)),
      settings_(settings),
      params_(PolicyParams::Zero(actions, dim)) {
  if (settings_.warmup_steps <= 0) {
    throw ConfigError("agent.warmup_steps must be > 0");
  }
  if (settings_.refit_interval <= 0) {
    throw ConfigError("agent.refit_interval must be > 0");
  }
  if (settings_.passes < 1) throw ConfigError("agent.passes must be >= 1");
  if (!(settings_.lr > 0.0)) throw ConfigError("agent.batch_lr must be > 0");
}

bool BatchProfileAgent::is_refit_step(std::int64_t t) const {
  if (t < settings_.warmup_steps) return false;
  if (t == settings_.warmup_steps) return true;
  if (settings_.refit_interval == kNeverRefit) return false;
  return (t - settings_.warmup_steps) % settings_.refit_interval == 0;
}

void BatchProfileAgent::refit() {
  for (int pass = 0; pass < settings_.passes; ++pass) {
    for (const Sample& s : buffer_) {
      params_ += settings_.lr *
                 reinforce_gradient(params_, s.ctx, s.action, s.feedback);
    }
  }
  buffer_.clear();
}

Decision BatchProfileAgent::select(const Observation& obs, Rng& rng) {
  if (is_refit_step(t_)) refit();
  const ActionId action = sample_action(policy(obs.ctx), rng);
  pending_.emplace(t_, std::make_pair(obs.ctx, action));
  ++t_;
  return {action, false};
}

void BatchProfileAgent::ingest(const FeedbackEvent& event) {
  auto [ctx, action] = take_pending(pending_, event.step, "batch agent");
  buffer_.push_back({std::move(ctx), action, event.preferred()});
}

std::unique_ptr<BatchProfileAgent> make_static_profile(
    Eigen::Index actions, Eigen::Index dim, std::int64_t warmup_steps,
    std::int64_t refit_interval, double lr) {
  return std::make_unique<BatchProfileAgent>(
      "sp", actions, dim, BatchSettings{warmup_steps, refit_interval, 5, lr});
}

std::unique_ptr<BatchProfileAgent> make_periodic(Eigen::Index actions,
                                                 Eigen::Index dim,
                                                 std::int64_t refit_interval,
                                                 double lr) {
  return std::make_unique<BatchProfileAgent>(
      "pu", actions, dim,
      BatchSettings{refit_interval, refit_interval, 5, lr});
}

// ---------------------------------------------------------------------------

ContextAwareStaticAgent::ContextAwareStaticAgent(Eigen::Index actions,
                                                 Eigen::Index dim,
                                                 int buckets_per_dim,
                                                 int active_dims,
                                                 std::int64_t warmup_steps)
    : actions_(actions),
      buckets_(buckets_per_dim),
      active_dims_(active_dims),
      warmup_steps_(warmup_steps) {
  if (buckets_ < 1) throw ConfigError("agent.buckets_per_dim must be >= 1");
  if (active_dims_ < 0 || active_dims_ > dim) {
    throw ConfigError("agent.active_dims must lie in [0, ctx_dim]");
  }
  if (warmup_steps_ <= 0) throw ConfigError("agent.warmup_steps must be > 0");
  num_cells_ = 1;
  for (int i = 0; i < active_dims_; ++i) {
    num_cells_ *= static_cast<std::size_t>(buckets_);
  }
  const auto cells = static_cast<Eigen::Index>(num_cells_);
  sums_ = Eigen::MatrixXd::Zero(cells, actions_);
  counts_ = Eigen::MatrixXd::Zero(cells, actions_);
}

std::size_t ContextAwareStaticAgent::cell_of(const ContextVector& ctx) const {
  std::size_t cell = 0;
  for (int i = 0; i < active_dims_; ++i) {
    // Equal-width buckets over [-1, 1]; two buckets split on sign.
    const double u = (ctx(i) + 1.0) / 2.0;
    auto b = static_cast<int>(std::floor(u * buckets_));
    b = std::clamp(b, 0, buckets_ - 1);
    cell = cell * static_cast<std::size_t>(buckets_) + static_cast<std::size_t>(b);
  }
  return cell;
}

double ContextAwareStaticAgent::cell_mean(std::size_t cell,
                                          ActionId action) const {
  const auto c = static_cast<Eigen::Index>(cell);
  const auto a = static_cast<Eigen::Index>(action);
  if (counts_(c, a) == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sums_(c, a) / counts_(c, a);
}

double ContextAwareStaticAgent::global_mean(ActionId action) const {
  const auto a = static_cast<Eigen::Index>(action);
  const double n = counts_.col(a).sum();
  if (n == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sums_.col(a).sum() / n;
}

ActionId ContextAwareStaticAgent::greedy_action(const ContextVector& ctx) const {
  const std::size_t cell = cell_of(ctx);
  const auto c = static_cast<Eigen::Index>(cell);
  // An unseen cell falls back to global action means.
  const bool seen = counts_.row(c).sum() > 0.0;
  ActionId best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < actions_; ++a) {
    double value = seen ? cell_mean(cell, static_cast<ActionId>(a))
                        : global_mean(static_cast<ActionId>(a));
    if (std::isnan(value)) value = -std::numeric_limits<double>::infinity();
    if (value > best_value) {
      best_value = value;
      best = static_cast<ActionId>(a);
    }
  }
  return best;
}

Decision ContextAwareStaticAgent::select(const Observation& obs, Rng& rng) {
  ActionId action;
  if (t_ < warmup_steps_) {
    std::uniform_int_distribution<Eigen::Index> pick(0, actions_ - 1);
    action = static_cast<ActionId>(pick(rng));
  } else {
    action = greedy_action(obs.ctx);
  }
  pending_.emplace(t_, std::make_pair(cell_of(obs.ctx), action));
  ++t_;
  return {action, false};
}

void ContextAwareStaticAgent::ingest(const FeedbackEvent& event) {
  const auto [cell, action] = take_pending(pending_, event.step, "cas agent");
  if (event.step >= warmup_steps_) return;
  const auto c = static_cast<Eigen::Index>(cell);
  const auto a = static_cast<Eigen::Index>(action);
  sums_(c, a) += event.preferred();
  counts_(c, a) += 1.0;
}

ActionDistribution ContextAwareStaticAgent::policy(
    const ContextVector& ctx) const {
  if (t_ <= warmup_steps_) {
    return ActionDistribution::Constant(actions_,
                                        1.0 / static_cast<double>(actions_));
  }
  return one_hot(actions_, greedy_action(ctx));
}

std::unique_ptr<ContextAwareStaticAgent> make_context_aware_static(
    Eigen::Index actions, Eigen::Index dim, int buckets_per_dim,
    int active_dims, std::int64_t warmup_steps) {
  return std::make_unique<ContextAwareStaticAgent>(
      actions, dim, buckets_per_dim, active_dims, warmup_steps);
}

// ---------------------------------------------------------------------------

SimpleOnlineAgent::SimpleOnlineAgent(Eigen::Index actions, Eigen::Index dim,
                                     double fixed_lr,
                                     std::int64_t request_every)
    : lr_(fixed_lr),
      request_every_(request_every),
      params_(PolicyParams::Zero(actions, dim)) {
  if (!(lr_ > 0.0)) throw ConfigError("agent.fixed_lr must be > 0");
  if (request_every_ <= 0) throw ConfigError("agent.request_every must be > 0");
}

Decision SimpleOnlineAgent::select(const Observation& obs, Rng& rng) {
  const ActionId action = sample_action(policy(obs.ctx), rng);
  const bool request = t_ % request_every_ == 0;
  pending_.emplace(t_, std::make_pair(obs.ctx, action));
  ++t_;
  return {action, request};
}

void SimpleOnlineAgent::ingest(const FeedbackEvent& event) {
  const auto [ctx, action] = take_pending(pending_, event.step, "sol agent");
  params_ += lr_ * reinforce_gradient(params_, ctx, action, event.preferred());
}

std::unique_ptr<SimpleOnlineAgent> make_simple_online(Eigen::Index actions,
                                                      Eigen::Index dim,
                                                      double fixed_lr,
                                                      std::int64_t request_every) {
  return std::make_unique<SimpleOnlineAgent>(actions, dim, fixed_lr,
                                             request_every);
}

// ---------------------------------------------------------------------------

Decision OracleAgent::select(const Observation& obs, Rng&) {
  Eigen::Index best = 0;
  env_.oracle_all(obs.ctx).maxCoeff(&best);
  return {static_cast<ActionId>(best), false};
}

ActionDistribution OracleAgent::policy(const ContextVector& ctx) const {
  Eigen::Index best = 0;
  const Eigen::VectorXd values = env_.oracle_all(ctx);
  values.maxCoeff(&best);
  return one_hot(values.size(), static_cast<ActionId>(best));
}

}  // namespace dynpers
