#pragma once

#include <filesystem>
#include <string_view>

#include "edudss/service/engine.hpp"

namespace edudss::service {

// Key-value text, one "key = value" per line, '#' starts a comment:
//
//   # training
//   learning_rate = 0.05
//   num_rounds = 100
//   goss = true
//   # service
//   at_risk_threshold = 60
//   auto_retrain = true
//   bind = 0.0.0.0
//   port = 8080
//   unseen_levels = mode        # or: error
//
// Training keys are those of TrainConfig::apply_setting. Throws UsageError
// naming the line on unknown keys or bad values.
void apply_config_text(std::string_view text, ApiConfig& config);
void apply_config_file(const std::filesystem::path& path, ApiConfig& config);

}  // namespace edudss::service
