#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dynpers/environment.hpp"
#include "dynpers/gate.hpp"
#include "dynpers/optimizer.hpp"
#include "dynpers/privacy.hpp"

namespace dynpers {

enum class AgentKind { kDynamic, kStaticProfile, kPeriodic, kContextAware,
                       kSimpleOnline, kOracle };

std::string to_string(AgentKind kind);
AgentKind parse_agent_kind(const std::string& text);

struct AgentConfig {
  AgentKind kind = AgentKind::kDynamic;
  // Static profile.
  std::int64_t sp_warmup_steps = 1000;
  std::int64_t sp_refit_interval = 10000;
  // Periodic update.
  std::int64_t pu_refit_interval = 1000;
  // Learning rate and pass count of SP/PU batch refits.
  double batch_lr = 0.01;
  int batch_passes = 5;
  // Context-aware static.
  int cas_buckets_per_dim = 2;
  int cas_active_dims = 2;
  std::int64_t cas_warmup_steps = 1000;
  // Simple online learning.
  double sol_fixed_lr = 0.01;
  std::int64_t sol_request_every = 5;
};

enum class Ablation { kNone, kNoGate, kFixedLr, kNoMomentum, kNoPrioritization };

std::string to_string(Ablation ablation);
Ablation parse_ablation(const std::string& text);

struct ExperimentConfig {
  std::string preset = "stationary";
  EnvConfig env;
  AgentConfig agent;
  OptimizerConfig optimizer;
  GateConfig gate;
  PrivacyConfig privacy;
  // Unset means "same as steps".
  std::optional<std::int64_t> privacy_horizon;
  std::int64_t steps = 50000;
  std::int64_t replicas = 20;
  std::uint64_t seed = 1;
  std::int64_t delay = 0;
  std::string output = "results";
  bool write_steps = true;
  std::vector<AgentKind> compare_agents = {
      AgentKind::kDynamic, AgentKind::kStaticProfile, AgentKind::kPeriodic,
      AgentKind::kContextAware, AgentKind::kSimpleOnline};

  PrivacyConfig effective_privacy() const;
  void validate() const;
};

// Names accepted by apply_preset.
const std::vector<std::string>& preset_names();

// Resets the environment block to a named scenario. Throws ConfigError on an
// unknown name.
void apply_preset(ExperimentConfig& config, const std::string& name);

ExperimentConfig preset_config(const std::string& name);

// Sets one dotted key, e.g. "optimizer.alpha0" = "0.01". Unknown keys and
// malformed values raise ConfigError naming the key.
void apply_setting(ExperimentConfig& config, const std::string& key,
                   const std::string& value);

// Parses "key = value" lines; '#' starts a comment. The preset (the file's
// `preset` key, or preset_override when given) is applied before every other
// key regardless of position.
void apply_config_text(ExperimentConfig& config, const std::string& text,
                       const std::optional<std::string>& preset_override = {});
void apply_config_file(ExperimentConfig& config, const std::string& path,
                       const std::optional<std::string>& preset_override = {});

// Every key with its current value, in a form apply_config_text accepts.
std::string to_config_text(const ExperimentConfig& config);

// The single-field change each ablation makes to a base configuration.
ExperimentConfig apply_ablation(ExperimentConfig config, Ablation ablation);

}  // namespace dynpers
