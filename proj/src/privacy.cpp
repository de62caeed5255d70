#include "dynpers/privacy.hpp"

namespace dynpers {

void PrivacyConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("privacy.epsilon must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("privacy.delta must lie in (0, 1)");
  }
  if (!(clip_norm > 0.0)) throw ConfigError("privacy.clip_norm must be > 0");
  if (horizon <= 0) throw ConfigError("privacy.horizon must be > 0");
}

double noise_scale(const PrivacyConfig& config) {
  config.validate();
  return config.clip_norm *
         std::sqrt(2.0 * static_cast<double>(config.horizon) *
                   std::log(1.25 / config.delta)) /
         config.epsilon;
}

double privacy_epsilon(const PrivacyConfig& config, double sigma) {
  return config.clip_norm *
         std::sqrt(2.0 * static_cast<double>(config.horizon) *
                   std::log(1.25 / config.delta)) /
         sigma;
}

}  // namespace dynpers
