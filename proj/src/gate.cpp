#include "dynpers/gate.hpp"

#include <stdexcept>

#include "dynpers/types.hpp"

namespace dynpers {

std::string to_string(GateMode mode) {
  switch (mode) {
    case GateMode::kAdaptive: return "adaptive";
    case GateMode::kNever: return "never";
    case GateMode::kAlways: return "always";
    case GateMode::kInterval: return "interval";
    case GateMode::kCadence: return "cadence";
  }
  return "adaptive";
}

GateMode parse_gate_mode(const std::string& text) {
  if (text == "adaptive") return GateMode::kAdaptive;
  if (text == "never") return GateMode::kNever;
  if (text == "always") return GateMode::kAlways;
  if (text == "interval") return GateMode::kInterval;
  if (text == "cadence") return GateMode::kCadence;
  throw ConfigError("unknown gate mode '" + text + "'");
}

void GateConfig::validate() const {
  if (!(tau_u >= 0.0)) throw ConfigError("gate.tau_u must be >= 0");
  if (delta_min < 0) throw ConfigError("gate.delta_min must be >= 0");
  if (!(tau_e >= 0.0 && tau_e <= 1.0)) {
    throw ConfigError("gate.tau_e must lie in [0, 1]");
  }
  if (cadence <= 0) throw ConfigError("gate.cadence must be > 0");
}

void GateState::record(std::int64_t t) {
  if (t_last_ && t < *t_last_) {
    throw std::invalid_argument("record_request: step " + std::to_string(t) +
                                " precedes last request at " +
                                std::to_string(*t_last_));
  }
  t_last_ = t;
}

bool interval_elapsed(const GateConfig& config, const GateState& state,
                      std::int64_t t) {
  const auto last = state.t_last();
  return !last || t - *last > config.delta_min;
}

bool should_request(const GateConfig& config, const GateState& state,
                    double uncertainty, std::int64_t t, double engagement) {
  return uncertainty > config.tau_u && interval_elapsed(config, state, t) &&
         engagement > config.tau_e;
}

bool gate_decision(const GateConfig& config, const GateState& state,
                   double uncertainty, std::int64_t t, double engagement) {
  switch (config.mode) {
    case GateMode::kAdaptive:
      return should_request(config, state, uncertainty, t, engagement);
    case GateMode::kNever: return false;
    case GateMode::kAlways: return true;
    case GateMode::kInterval: return interval_elapsed(config, state, t);
    case GateMode::kCadence: return t % config.cadence == 0;
  }
  return false;
}

}  // namespace dynpers
