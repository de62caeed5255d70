#include "dynpers/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "dynpers/agents.hpp"

namespace dynpers {

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kDynamic: return "dp";
    case AgentKind::kStaticProfile: return "sp";
    case AgentKind::kPeriodic: return "pu";
    case AgentKind::kContextAware: return "cas";
    case AgentKind::kSimpleOnline: return "sol";
    case AgentKind::kOracle: return "oracle";
  }
  return "dp";
}

AgentKind parse_agent_kind(const std::string& text) {
  if (text == "dp") return AgentKind::kDynamic;
  if (text == "sp") return AgentKind::kStaticProfile;
  if (text == "pu") return AgentKind::kPeriodic;
  if (text == "cas") return AgentKind::kContextAware;
  if (text == "sol") return AgentKind::kSimpleOnline;
  if (text == "oracle") return AgentKind::kOracle;
  throw ConfigError("unknown agent kind '" + text + "'");
}

std::string to_string(Ablation ablation) {
  switch (ablation) {
    case Ablation::kNone: return "none";
    case Ablation::kNoGate: return "no-gate";
    case Ablation::kFixedLr: return "fixed-lr";
    case Ablation::kNoMomentum: return "no-momentum";
    case Ablation::kNoPrioritization: return "no-prioritization";
  }
  return "none";
}

Ablation parse_ablation(const std::string& text) {
  if (text == "none") return Ablation::kNone;
  if (text == "no-gate") return Ablation::kNoGate;
  if (text == "fixed-lr") return Ablation::kFixedLr;
  if (text == "no-momentum") return Ablation::kNoMomentum;
  if (text == "no-prioritization") return Ablation::kNoPrioritization;
  throw ConfigError("unknown ablation '" + text + "'");
}

PrivacyConfig ExperimentConfig::effective_privacy() const {
  PrivacyConfig p = privacy;
  p.horizon = privacy_horizon.value_or(steps);
  return p;
}

void ExperimentConfig::validate() const {
  if (steps <= 0) throw ConfigError("steps must be > 0");
  if (replicas <= 0) throw ConfigError("replicas must be > 0");
  if (delay < 0) throw ConfigError("delay must be >= 0");
  if (compare_agents.empty()) {
    throw ConfigError("compare.agents must name at least one agent");
  }
  env.validate();
  optimizer.validate();
  gate.validate();
  effective_privacy().validate();
}

// ---------------------------------------------------------------------------
// Presets

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"stationary", "drift",
                                                 "changepoint", "fatigue-stress"};
  return names;
}

void apply_preset(ExperimentConfig& config, const std::string& name) {
  EnvConfig env;
  env.kind = EnvKind::kRecommendation;
  env.num_actions = 16;
  env.ctx_dim = 16;
  env.noise_implicit = 0.2;
  env.noise_explicit = 0.05;
  if (name == "stationary") {
  } else if (name == "drift") {
    env.drift_rate = 0.002;
  } else if (name == "changepoint") {
    env.change_points = {25000};
  } else if (name == "fatigue-stress") {
    env.fatigue.penalty = 0.05;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  env.seed = config.env.seed;
  config.env = env;
  config.preset = name;
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig config;
  apply_preset(config, name);
  return config;
}

// ---------------------------------------------------------------------------
// Key/value parsing

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& why) {
  throw ConfigError("invalid value '" + value + "' for key '" + key + "': " +
                    why);
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  std::int64_t out = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "expected integer");
  return out;
}

// Integer that also accepts "inf" for "never".
std::int64_t parse_interval(const std::string& key, const std::string& value) {
  if (value == "inf") return kNeverRefit;
  return parse_int(key, value);
}

double parse_real(const std::string& key, const std::string& value) {
  if (value.empty()) bad_value(key, value, "expected number");
  char* end = nullptr;
  const double out = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || std::isnan(out)) {
    bad_value(key, value, "expected number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "expected true or false");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string fmt_real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

std::string fmt_interval(std::int64_t x) {
  return x == kNeverRefit ? "inf" : std::to_string(x);
}

struct KeySpec {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)>
      set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename Field>
KeySpec int_key(Field field) {
  return {[field](ExperimentConfig& c, const std::string& k,
                  const std::string& v) { field(c) = parse_int(k, v); },
          [field](const ExperimentConfig& c) {
            return std::to_string(field(const_cast<ExperimentConfig&>(c)));
          }};
}

template <typename Field>
KeySpec interval_key(Field field) {
  return {[field](ExperimentConfig& c, const std::string& k,
                  const std::string& v) { field(c) = parse_interval(k, v); },
          [field](const ExperimentConfig& c) {
            return fmt_interval(field(const_cast<ExperimentConfig&>(c)));
          }};
}

template <typename Field>
KeySpec real_key(Field field) {
  return {[field](ExperimentConfig& c, const std::string& k,
                  const std::string& v) { field(c) = parse_real(k, v); },
          [field](const ExperimentConfig& c) {
            return fmt_real(field(const_cast<ExperimentConfig&>(c)));
          }};
}

template <typename Field>
KeySpec bool_key(Field field) {
  return {[field](ExperimentConfig& c, const std::string& k,
                  const std::string& v) { field(c) = parse_bool(k, v); },
          [field](const ExperimentConfig& c) {
            return std::string(field(const_cast<ExperimentConfig&>(c)) ? "true"
                                                                        : "false");
          }};
}

#define DYNPERS_FIELD(expr) [](ExperimentConfig& c) -> auto& { return expr; }

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = [] {
    std::map<std::string, KeySpec> t;
    t["preset"] = {[](ExperimentConfig& c, const std::string&,
                      const std::string& v) { apply_preset(c, v); },
                   [](const ExperimentConfig& c) { return c.preset; }};
    t["steps"] = int_key(DYNPERS_FIELD(c.steps));
    t["replicas"] = int_key(DYNPERS_FIELD(c.replicas));
    t["seed"] = {[](ExperimentConfig& c, const std::string& k,
                    const std::string& v) {
                   const auto s = parse_int(k, v);
                   if (s < 0) bad_value(k, v, "seed must be >= 0");
                   c.seed = static_cast<std::uint64_t>(s);
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); }};
    t["delay"] = int_key(DYNPERS_FIELD(c.delay));
    t["output"] = {[](ExperimentConfig& c, const std::string&,
                      const std::string& v) { c.output = v; },
                   [](const ExperimentConfig& c) { return c.output; }};
    t["output.steps"] = bool_key(DYNPERS_FIELD(c.write_steps));

    t["env.kind"] = {[](ExperimentConfig& c, const std::string&,
                        const std::string& v) { c.env.kind = parse_env_kind(v); },
                     [](const ExperimentConfig& c) { return to_string(c.env.kind); }};
    t["env.num_actions"] = int_key(DYNPERS_FIELD(c.env.num_actions));
    t["env.ctx_dim"] = int_key(DYNPERS_FIELD(c.env.ctx_dim));
    t["env.drift_rate"] = real_key(DYNPERS_FIELD(c.env.drift_rate));
    t["env.change_points"] = {
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          std::vector<std::int64_t> points;
          for (const auto& item : split_list(v)) points.push_back(parse_int(k, item));
          c.env.change_points = std::move(points);
        },
        [](const ExperimentConfig& c) {
          std::string out;
          for (std::size_t i = 0; i < c.env.change_points.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(c.env.change_points[i]);
          }
          return out;
        }};
    t["env.noise_implicit"] = real_key(DYNPERS_FIELD(c.env.noise_implicit));
    t["env.noise_explicit"] = real_key(DYNPERS_FIELD(c.env.noise_explicit));
    t["env.fatigue.c0"] = real_key(DYNPERS_FIELD(c.env.fatigue.c0));
    t["env.fatigue.c1"] = real_key(DYNPERS_FIELD(c.env.fatigue.c1));
    t["env.fatigue.window"] = int_key(DYNPERS_FIELD(c.env.fatigue.window));
    t["env.fatigue.penalty"] = real_key(DYNPERS_FIELD(c.env.fatigue.penalty));
    t["env.fatigue.recovery"] = real_key(DYNPERS_FIELD(c.env.fatigue.recovery));
    t["env.initial_engagement"] = real_key(DYNPERS_FIELD(c.env.initial_engagement));
    t["env.kernel_width"] = real_key(DYNPERS_FIELD(c.env.kernel_width));

    t["agent.kind"] = {
        [](ExperimentConfig& c, const std::string&, const std::string& v) {
          c.agent.kind = parse_agent_kind(v);
        },
        [](const ExperimentConfig& c) { return to_string(c.agent.kind); }};
    t["agent.sp.warmup_steps"] = int_key(DYNPERS_FIELD(c.agent.sp_warmup_steps));
    t["agent.sp.refit_interval"] =
        interval_key(DYNPERS_FIELD(c.agent.sp_refit_interval));
    t["agent.pu.refit_interval"] =
        interval_key(DYNPERS_FIELD(c.agent.pu_refit_interval));
    t["agent.batch_lr"] = real_key(DYNPERS_FIELD(c.agent.batch_lr));
    t["agent.batch_passes"] = {
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.agent.batch_passes = static_cast<int>(parse_int(k, v));
        },
        [](const ExperimentConfig& c) {
          return std::to_string(c.agent.batch_passes);
        }};
    t["agent.cas.buckets_per_dim"] = {
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.agent.cas_buckets_per_dim = static_cast<int>(parse_int(k, v));
        },
        [](const ExperimentConfig& c) {
          return std::to_string(c.agent.cas_buckets_per_dim);
        }};
    t["agent.cas.active_dims"] = {
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.agent.cas_active_dims = static_cast<int>(parse_int(k, v));
        },
        [](const ExperimentConfig& c) {
          return std::to_string(c.agent.cas_active_dims);
        }};
    t["agent.cas.warmup_steps"] = int_key(DYNPERS_FIELD(c.agent.cas_warmup_steps));
    t["agent.sol.fixed_lr"] = real_key(DYNPERS_FIELD(c.agent.sol_fixed_lr));
    t["agent.sol.request_every"] =
        int_key(DYNPERS_FIELD(c.agent.sol_request_every));

    t["optimizer.alpha0"] = real_key(DYNPERS_FIELD(c.optimizer.alpha0));
    t["optimizer.beta"] = real_key(DYNPERS_FIELD(c.optimizer.beta));
    t["optimizer.gamma"] = real_key(DYNPERS_FIELD(c.optimizer.gamma));
    t["optimizer.gamma_v"] = real_key(DYNPERS_FIELD(c.optimizer.gamma_v));
    t["optimizer.eps_stab"] = real_key(DYNPERS_FIELD(c.optimizer.eps_stab));
    t["optimizer.normalize"] = bool_key(DYNPERS_FIELD(c.optimizer.normalize));

    t["gate.mode"] = {
        [](ExperimentConfig& c, const std::string&, const std::string& v) {
          c.gate.mode = parse_gate_mode(v);
        },
        [](const ExperimentConfig& c) { return to_string(c.gate.mode); }};
    t["gate.enabled"] = {
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.gate.mode = parse_bool(k, v) ? GateMode::kAdaptive : GateMode::kNever;
        },
        [](const ExperimentConfig& c) {
          return std::string(c.gate.mode == GateMode::kNever ? "false" : "true");
        }};
    t["gate.tau_u"] = real_key(DYNPERS_FIELD(c.gate.tau_u));
    t["gate.delta_min"] = int_key(DYNPERS_FIELD(c.gate.delta_min));
    t["gate.tau_e"] = real_key(DYNPERS_FIELD(c.gate.tau_e));
    t["gate.cadence"] = int_key(DYNPERS_FIELD(c.gate.cadence));

    t["privacy.enabled"] = bool_key(DYNPERS_FIELD(c.privacy.enabled));
    t["privacy.epsilon"] = real_key(DYNPERS_FIELD(c.privacy.epsilon));
    t["privacy.delta"] = real_key(DYNPERS_FIELD(c.privacy.delta));
    t["privacy.clip_norm"] = real_key(DYNPERS_FIELD(c.privacy.clip_norm));
    t["privacy.horizon"] = {
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          if (v == "auto") {
            c.privacy_horizon.reset();
          } else {
            c.privacy_horizon = parse_int(k, v);
          }
        },
        [](const ExperimentConfig& c) {
          return c.privacy_horizon ? std::to_string(*c.privacy_horizon)
                                   : std::string("auto");
        }};

    t["compare.agents"] = {
        [](ExperimentConfig& c, const std::string&, const std::string& v) {
          std::vector<AgentKind> kinds;
          for (const auto& item : split_list(v)) kinds.push_back(parse_agent_kind(item));
          c.compare_agents = std::move(kinds);
        },
        [](const ExperimentConfig& c) {
          std::string out;
          for (std::size_t i = 0; i < c.compare_agents.size(); ++i) {
            if (i) out += ",";
            out += to_string(c.compare_agents[i]);
          }
          return out;
        }};
    return t;
  }();
  return table;
}

#undef DYNPERS_FIELD

}  // namespace

void apply_setting(ExperimentConfig& config, const std::string& key,
                   const std::string& value) {
  const auto& table = key_table();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  try {
    it->second.set(config, key, value);
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.find("'" + key + "'") != std::string::npos) throw;
    throw ConfigError("key '" + key + "': " + what);
  }
}

void apply_config_text(ExperimentConfig& config, const std::string& text,
                       const std::optional<std::string>& preset_override) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (preset_override) {
    apply_preset(config, *preset_override);
  } else {
    for (const auto& [key, value] : entries) {
      if (key == "preset") apply_setting(config, key, value);
    }
  }
  for (const auto& [key, value] : entries) {
    if (key != "preset") apply_setting(config, key, value);
  }
}

void apply_config_file(ExperimentConfig& config, const std::string& path,
                       const std::optional<std::string>& preset_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  apply_config_text(config, buffer.str(), preset_override);
}

std::string to_config_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [key, spec] : key_table()) {
    if (key == "gate.enabled") continue;  // gate.mode carries it
    out += key + " = " + spec.get(config) + "\n";
  }
  return out;
}

ExperimentConfig apply_ablation(ExperimentConfig config, Ablation ablation) {
  switch (ablation) {
    case Ablation::kNone: break;
    case Ablation::kNoGate: config.gate.mode = GateMode::kAlways; break;
    case Ablation::kFixedLr: config.optimizer.beta = 0.0; break;
    case Ablation::kNoMomentum: config.optimizer.gamma = 0.0; break;
    case Ablation::kNoPrioritization: config.gate.mode = GateMode::kInterval; break;
  }
  return config;
}

}  // namespace dynpers
