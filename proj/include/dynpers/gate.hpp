#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace dynpers {

// How an agent decides to ask for explicit feedback.
enum class GateMode {
  kAdaptive,  // uncertainty, interval and engagement conditions
  kNever,
  kAlways,    // every step
  kInterval,  // interval condition only
  kCadence,   // every `cadence` steps, at t = 0 mod cadence
};

std::string to_string(GateMode mode);
GateMode parse_gate_mode(const std::string& text);

struct GateConfig {
  GateMode mode = GateMode::kAdaptive;
  double tau_u = 0.3;             // entropy threshold, nats
  std::int64_t delta_min = 5;     // minimum steps between requests
  double tau_e = 0.6;             // engagement threshold
  std::int64_t cadence = 5;       // only used by kCadence

  void validate() const;
};

class GateState {
 public:
  std::optional<std::int64_t> t_last() const { return t_last_; }

  // Throws std::invalid_argument if t precedes the last recorded request.
  void record(std::int64_t t);

 private:
  std::optional<std::int64_t> t_last_;
};

inline GateState record_request(GateState state, std::int64_t t) {
  state.record(t);
  return state;
}

bool interval_elapsed(const GateConfig& config, const GateState& state,
                      std::int64_t t);

// Strict conjunction U > tau_u, t - t_last > delta_min, e > tau_e.
bool should_request(const GateConfig& config, const GateState& state,
                    double uncertainty, std::int64_t t, double engagement);

// Dispatches on config.mode; kAdaptive defers to should_request.
bool gate_decision(const GateConfig& config, const GateState& state,
                   double uncertainty, std::int64_t t, double engagement);

}  // namespace dynpers
