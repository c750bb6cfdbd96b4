#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include <json.hpp>

namespace edudss::gbdt {

struct GossConfig {
  double top_rate = 0.2;    // a: share of largest-|gradient| rows kept
  double other_rate = 0.1;  // b: share sampled from the rest

  bool operator==(const GossConfig&) const = default;
};

struct TrainConfig {
  double learning_rate = 0.05;
  int num_rounds = 100;
  int max_leaves = 31;
  double lambda = 0.0;
  int min_samples_leaf = 20;
  int max_bins = 255;
  std::optional<GossConfig> goss;  // disabled unless set
  bool efb_enabled = true;
  int max_conflicts = 0;
  std::uint64_t seed = 42;

  // Throws UsageError naming the first invalid field.
  void validate() const;

  // Applies one "key = value" setting; keys match the JSON field names plus
  // goss_top_rate / goss_other_rate. Throws UsageError on unknown keys.
  void apply_setting(std::string_view key, std::string_view value);

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& document);

  bool operator==(const TrainConfig&) const = default;
};

// Selects the serial reference kernels or the OpenMP kernels. Both produce
// bit-identical results; the serial path exists for testing and benchmarking.
enum class Execution { kSerial, kParallel };

}  // namespace edudss::gbdt
