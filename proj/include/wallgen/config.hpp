#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace wallgen {

/// Knobs for the mask-generation chain. Defaults reproduce the reference
/// configuration: 3 quantization colors and 11 filter orientations spanning
/// [-25, +25] degrees.
struct PipelineConfig {
  int color_count = 3;
  int orientation_count = 11;
  double theta_min_deg = -25.0;
  double theta_max_deg = 25.0;
  int connectivity = 8;  // 4 or 8
  std::uint64_t rng_seed = 0;
  int white_threshold = 245;  // background-substitution cutoff, 8-bit
  std::optional<int> fh_override;
  int downscale = 1;  // 1 = native resolution

  void validate() const {
    if (color_count < 2) throw std::invalid_argument("color_count must be >= 2");
    if (orientation_count < 1) throw std::invalid_argument("orientation_count must be >= 1");
    if (theta_min_deg > theta_max_deg)
      throw std::invalid_argument("theta_min_deg must not exceed theta_max_deg");
    if (connectivity != 4 && connectivity != 8)
      throw std::invalid_argument("connectivity must be 4 or 8");
    if (white_threshold < 0 || white_threshold > 255)
      throw std::invalid_argument("white_threshold must be an 8-bit level");
    if (fh_override && *fh_override < 1)
      throw std::invalid_argument("fh_override must be >= 1");
    if (downscale < 1) throw std::invalid_argument("downscale must be >= 1");
  }
};

inline nlohmann::json to_json(const PipelineConfig& cfg) {
  nlohmann::json j = {
      {"color_count", cfg.color_count},
      {"orientation_count", cfg.orientation_count},
      {"theta_min_deg", cfg.theta_min_deg},
      {"theta_max_deg", cfg.theta_max_deg},
      {"connectivity", cfg.connectivity},
      {"rng_seed", cfg.rng_seed},
      {"white_threshold", cfg.white_threshold},
      {"downscale", cfg.downscale},
  };
  if (cfg.fh_override)
    j["fh_override"] = *cfg.fh_override;
  else
    j["fh_override"] = nullptr;
  return j;
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  cfg.color_count = j.value("color_count", cfg.color_count);
  cfg.orientation_count = j.value("orientation_count", cfg.orientation_count);
  cfg.theta_min_deg = j.value("theta_min_deg", cfg.theta_min_deg);
  cfg.theta_max_deg = j.value("theta_max_deg", cfg.theta_max_deg);
  cfg.connectivity = j.value("connectivity", cfg.connectivity);
  cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
  cfg.white_threshold = j.value("white_threshold", cfg.white_threshold);
  cfg.downscale = j.value("downscale", cfg.downscale);
  if (j.contains("fh_override") && !j["fh_override"].is_null())
    cfg.fh_override = j["fh_override"].get<int>();
  cfg.validate();
  return cfg;
}

}  // namespace wallgen
