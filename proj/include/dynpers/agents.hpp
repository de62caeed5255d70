#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dynpers/engine.hpp"
#include "dynpers/environment.hpp"
#include "dynpers/types.hpp"

namespace dynpers {

inline constexpr std::int64_t kNeverRefit =
    std::numeric_limits<std::int64_t>::max();

struct Decision {
  ActionId action = 0;
  bool request = false;
};

// Common surface for the adaptive engine and the baselines. Agents see only
// observations and feedback events.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string name() const = 0;
  virtual Decision select(const Observation& obs, Rng& rng) = 0;
  virtual void ingest(const FeedbackEvent& event) = 0;

  // Distribution the last select() was drawn from; evaluation only.
  virtual ActionDistribution policy(const ContextVector& ctx) const = 0;
  virtual double learning_rate() const { return 0.0; }
};

class DynamicAgent final : public Agent {
 public:
  DynamicAgent(Eigen::Index actions, Eigen::Index dim, EngineConfig config);

  std::string name() const override { return "dp"; }
  Decision select(const Observation& obs, Rng& rng) override;
  void ingest(const FeedbackEvent& event) override { engine_.ingest(event); }
  ActionDistribution policy(const ContextVector& ctx) const override {
    return engine_.policy(ctx);
  }
  double learning_rate() const override { return engine_.current_lr(); }

  const AdaptiveEngine& engine() const { return engine_; }

 private:
  AdaptiveEngine engine_;
};

struct BatchSettings {
  std::int64_t warmup_steps = 1000;
  std::int64_t refit_interval = 10000;
  int passes = 5;
  double lr = 0.01;
};

// Static profile / periodic update. The policy is frozen between refits; at a
// refit the buffered (ctx, action, feedback) triples are replayed `passes`
// times with plain fixed-rate score-function ascent and the buffer is cleared.
// Refits happen at warmup_steps + k * refit_interval.
class BatchProfileAgent final : public Agent {
 public:
  BatchProfileAgent(std::string name, Eigen::Index actions, Eigen::Index dim,
                    BatchSettings settings);

  std::string name() const override { return name_; }
  Decision select(const Observation& obs, Rng& rng) override;
  void ingest(const FeedbackEvent& event) override;
  ActionDistribution policy(const ContextVector& ctx) const override {
    return action_probabilities(params_, ctx);
  }
  double learning_rate() const override { return settings_.lr; }

  const PolicyParams& params() const { return params_; }
  std::size_t buffered() const { return buffer_.size(); }
  bool is_refit_step(std::int64_t t) const;

 private:
  struct Sample {
    ContextVector ctx;
    ActionId action;
    double feedback;
  };
  void refit();

  std::string name_;
  BatchSettings settings_;
  PolicyParams params_;
  std::int64_t t_ = 0;
  std::map<std::int64_t, std::pair<ContextVector, ActionId>> pending_;
  std::vector<Sample> buffer_;
};

std::unique_ptr<BatchProfileAgent> make_static_profile(
    Eigen::Index actions, Eigen::Index dim, std::int64_t warmup_steps,
    std::int64_t refit_interval = 10000, double lr = 0.01);

std::unique_ptr<BatchProfileAgent> make_periodic(Eigen::Index actions,
                                                 Eigen::Index dim,
                                                 std::int64_t refit_interval = 1000,
                                                 double lr = 0.01);

// Context-aware static profile: the leading `active_dims` context features
// are bucketed (sign split for two buckets) and per-cell mean feedback of
// each action is estimated during warm-up. Afterwards it plays the argmax of
// the cell means and never updates.
class ContextAwareStaticAgent final : public Agent {
 public:
  ContextAwareStaticAgent(Eigen::Index actions, Eigen::Index dim,
                          int buckets_per_dim, int active_dims,
                          std::int64_t warmup_steps);

  std::string name() const override { return "cas"; }
  Decision select(const Observation& obs, Rng& rng) override;
  void ingest(const FeedbackEvent& event) override;
  ActionDistribution policy(const ContextVector& ctx) const override;

  std::size_t num_cells() const { return num_cells_; }
  std::size_t cell_of(const ContextVector& ctx) const;
  // NaN when the (cell, action) pair has no warm-up data.
  double cell_mean(std::size_t cell, ActionId action) const;
  double global_mean(ActionId action) const;
  ActionId greedy_action(const ContextVector& ctx) const;

 private:
  Eigen::Index actions_;
  int buckets_;
  int active_dims_;
  std::int64_t warmup_steps_;
  std::size_t num_cells_;
  std::int64_t t_ = 0;
  std::map<std::int64_t, std::pair<std::size_t, ActionId>> pending_;
  Eigen::MatrixXd sums_;    // cells x actions
  Eigen::MatrixXd counts_;  // cells x actions
};

std::unique_ptr<ContextAwareStaticAgent> make_context_aware_static(
    Eigen::Index actions, Eigen::Index dim, int buckets_per_dim = 2,
    int active_dims = 2, std::int64_t warmup_steps = 1000);

// Plain online SGD at a constant rate with explicit requests on a fixed
// cadence (t = 0 mod request_every).
class SimpleOnlineAgent final : public Agent {
 public:
  SimpleOnlineAgent(Eigen::Index actions, Eigen::Index dim, double fixed_lr,
                    std::int64_t request_every);

  std::string name() const override { return "sol"; }
  Decision select(const Observation& obs, Rng& rng) override;
  void ingest(const FeedbackEvent& event) override;
  ActionDistribution policy(const ContextVector& ctx) const override {
    return action_probabilities(params_, ctx);
  }
  double learning_rate() const override { return lr_; }

  const PolicyParams& params() const { return params_; }

 private:
  double lr_;
  std::int64_t request_every_;
  PolicyParams params_;
  std::int64_t t_ = 0;
  std::map<std::int64_t, std::pair<ContextVector, ActionId>> pending_;
};

std::unique_ptr<SimpleOnlineAgent> make_simple_online(Eigen::Index actions,
                                                      Eigen::Index dim,
                                                      double fixed_lr = 0.01,
                                                      std::int64_t request_every = 5);

// Evaluation reference that plays the argmax of the environment's true
// satisfaction. It reads the environment directly, so it only exists for
// sanity checks of the regret bookkeeping.
class OracleAgent final : public Agent {
 public:
  explicit OracleAgent(const Environment& env) : env_(env) {}

  std::string name() const override { return "oracle"; }
  Decision select(const Observation& obs, Rng& rng) override;
  void ingest(const FeedbackEvent&) override {}
  ActionDistribution policy(const ContextVector& ctx) const override;

 private:
  const Environment& env_;
};

}  // namespace dynpers
