#include <gtest/gtest.h>

#include "dynpers/agents.hpp"
#include "dynpers/engine.hpp"
#include "dynpers/harness.hpp"
#include "test_util.hpp"

namespace dynpers {
namespace {

Observation unit_obs(double engagement = 1.0) {
  return {ContextVector::Ones(1), engagement};
}

FeedbackEvent event_for(std::int64_t step, double implicit) {
  FeedbackEvent e;
  e.step = step;
  e.implicit = implicit;
  return e;
}

TEST(Engine, StartsUniform) {
  AdaptiveEngine engine(4, 3, {});
  EXPECT_EQ(engine.params(), PolicyParams::Zero(4, 3));
  const auto p = engine.policy(ContextVector::Ones(3));
  EXPECT_NEAR(p(0), 0.25, 1e-15);
}

TEST(Engine, DeterministicPolicyReturnsItsAction) {
  EngineConfig cfg;
  cfg.optimizer.alpha0 = 50.0;
  cfg.optimizer.normalize = false;
  cfg.optimizer.gamma = 0.0;
  AdaptiveEngine engine(3, 1, cfg);
  Rng rng(1);
  // Push action 2 far ahead with a few large plain steps.
  for (int i = 0; i < 50; ++i) {
    const auto r = engine.step(unit_obs(), rng);
    engine.ingest(event_for(engine.steps_taken() - 1, r.action == 2 ? 1.0 : 0.0));
  }
  ASSERT_GT(engine.policy(ContextVector::Ones(1))(2), 1.0 - 1e-12);
  for (int i = 0; i < 100; ++i) {
    const auto r = engine.step(unit_obs(), rng);
    EXPECT_EQ(r.action, 2u);
    engine.ingest(event_for(engine.steps_taken() - 1, 1.0));
  }
}

TEST(Engine, GateDisabledNeverRequests) {
  EngineConfig cfg;
  cfg.gate.mode = GateMode::kNever;
  AdaptiveEngine engine(8, 2, cfg);
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const auto r = engine.step({ContextVector::Ones(2), 1.0}, rng);
    EXPECT_FALSE(r.requested_explicit);
  }
}

TEST(Engine, AdaptiveGateRespectsInterval) {
  AdaptiveEngine engine(8, 2, {});
  Rng rng(3);
  std::int64_t last = -1000;
  int requests = 0;
  for (std::int64_t t = 0; t < 1000; ++t) {
    const auto r = engine.step({ContextVector::Ones(2), 1.0}, rng);
    if (r.requested_explicit) {
      EXPECT_GT(t - last, engine.config().gate.delta_min);
      last = t;
      ++requests;
    }
    engine.ingest(event_for(t, 0.5));
  }
  EXPECT_GT(requests, 0);
}

TEST(Engine, SameSeedSameTrajectory) {
  auto run = [] {
    AdaptiveEngine engine(5, 3, {});
    Rng rng(77);
    std::mt19937_64 ctx_rng(5);
    std::vector<std::pair<ActionId, bool>> out;
    for (int t = 0; t < 2000; ++t) {
      const auto x = testing::random_ctx(3, ctx_rng);
      const auto r = engine.step({x, 0.9}, rng);
      out.emplace_back(r.action, r.requested_explicit);
      engine.ingest(event_for(t, r.action == 1 ? 0.8 : 0.3));
    }
    return std::make_pair(out, engine.params());
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(Engine, ZeroFeedbackLeavesParams) {
  AdaptiveEngine engine(3, 2, {});
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    engine.step({ContextVector::Ones(2), 1.0}, rng);
    engine.ingest(event_for(t, 0.0));
  }
  EXPECT_EQ(engine.params(), PolicyParams::Zero(3, 2));
  EXPECT_EQ(engine.tracker().count(), 100);
}

TEST(Engine, UnknownStepThrows) {
  AdaptiveEngine engine(3, 1, {});
  Rng rng(5);
  engine.step(unit_obs(), rng);
  EXPECT_THROW(engine.ingest(event_for(1, 0.5)), std::invalid_argument);
  engine.ingest(event_for(0, 0.5));
  EXPECT_THROW(engine.ingest(event_for(0, 0.5)), std::invalid_argument);
}

TEST(Engine, PrefersExplicitFeedback) {
  // Implicit says 0, explicit says 1: the update must move.
  AdaptiveEngine engine(2, 1, {});
  Rng rng(6);
  engine.step(unit_obs(), rng);
  FeedbackEvent e = event_for(0, 0.0);
  e.requested = e.complied = true;
  e.explicit_value = 1.0;
  engine.ingest(e);
  EXPECT_GT(engine.params().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Engine, LearnsBetterActionOnTwoArmEnvironment) {
  AdaptiveEngine engine(2, 1, {});
  Rng rng(7);
  for (std::int64_t t = 0; t < 10000; ++t) {
    const auto r = engine.step(unit_obs(), rng);
    engine.ingest(event_for(t, r.action == 1 ? 0.9 : 0.1));
  }
  // Exhaustive evaluation of both actions under the learned policy.
  const auto p = engine.policy(ContextVector::Ones(1));
  EXPECT_GT(p(1), 0.9);
  EXPECT_GT(0.9 * p(1) + 0.1 * p(0), 0.82);
}

TEST(Engine, OutOfOrderIngestion) {
  AdaptiveEngine engine(3, 1, {});
  Rng rng(8);
  for (int t = 0; t < 4; ++t) engine.step(unit_obs(), rng);
  EXPECT_EQ(engine.pending(), 4u);
  engine.ingest(event_for(2, 0.4));
  engine.ingest(event_for(0, 0.4));
  EXPECT_EQ(engine.pending(), 2u);
}

TEST(Engine, LearningRateFollowsVariance) {
  AdaptiveEngine engine(2, 1, {});
  Rng rng(9);
  engine.step(unit_obs(), rng);
  engine.ingest(event_for(0, 0.0));
  engine.step(unit_obs(), rng);
  engine.ingest(event_for(1, 1.0));
  EXPECT_NEAR(engine.current_lr(), 0.01 / (1 + 0.1 * 0.25), 1e-15);
}

// Second half of a 20k-step stationary run beats the first half on nearly
// every seed.
TEST(EngineProperty, ImprovesOnStationaryEnvironment) {
  ExperimentConfig cfg = preset_config("stationary");
  cfg.steps = 20000;
  cfg.write_steps = false;
  int improved = 0;
  for (std::int64_t r = 0; r < 20; ++r) {
    const auto result = run_replica(cfg, AgentKind::kDynamic, r);
    double first = 0, second = 0;
    for (const auto& rec : result.records) {
      (rec.step < cfg.steps / 2 ? first : second) += rec.expected_satisfaction;
    }
    improved += second > first;
  }
  EXPECT_GE(improved, 18);
}

}  // namespace
}  // namespace dynpers
