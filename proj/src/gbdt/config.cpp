#include "edudss/gbdt/config.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "edudss/common/error.hpp"

namespace edudss::gbdt {

using nlohmann::json;

namespace {

template <typename T>
T parse_value(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto result = std::from_chars(text.data(), end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw UsageError("config: invalid value '" + std::string(text) + "' for '" +
                     std::string(key) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw UsageError("config: invalid boolean '" + std::string(text) + "' for '" +
                   std::string(key) + "'");
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("config: learning_rate must be positive");
  }
  if (num_rounds < 1) throw UsageError("config: num_rounds must be positive");
  if (max_leaves < 1) throw UsageError("config: max_leaves must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw UsageError("config: lambda must be non-negative");
  }
  if (min_samples_leaf < 1) throw UsageError("config: min_samples_leaf must be positive");
  if (max_bins < 2 || max_bins > 255) throw UsageError("config: max_bins must lie in [2, 255]");
  if (max_conflicts < 0) throw UsageError("config: max_conflicts must be non-negative");
  if (goss) {
    const double a = goss->top_rate;
    const double b = goss->other_rate;
    if (!(a > 0.0 && a < 1.0) || !(b > 0.0 && b < 1.0) || a + b > 1.0) {
      throw UsageError("config: GOSS rates need 0 < a, 0 < b, a + b <= 1");
    }
  }
}

void TrainConfig::apply_setting(std::string_view key, std::string_view value) {
  if (key == "learning_rate") {
    learning_rate = parse_value<double>(key, value);
  } else if (key == "num_rounds") {
    num_rounds = parse_value<int>(key, value);
  } else if (key == "max_leaves") {
    max_leaves = parse_value<int>(key, value);
  } else if (key == "lambda") {
    lambda = parse_value<double>(key, value);
  } else if (key == "min_samples_leaf") {
    min_samples_leaf = parse_value<int>(key, value);
  } else if (key == "max_bins") {
    max_bins = parse_value<int>(key, value);
  } else if (key == "efb_enabled") {
    efb_enabled = parse_bool(key, value);
  } else if (key == "max_conflicts") {
    max_conflicts = parse_value<int>(key, value);
  } else if (key == "seed") {
    seed = parse_value<std::uint64_t>(key, value);
  } else if (key == "goss") {
    if (parse_bool(key, value)) {
      if (!goss) goss = GossConfig{};
    } else {
      goss.reset();
    }
  } else if (key == "goss_top_rate") {
    if (!goss) goss = GossConfig{};
    goss->top_rate = parse_value<double>(key, value);
  } else if (key == "goss_other_rate") {
    if (!goss) goss = GossConfig{};
    goss->other_rate = parse_value<double>(key, value);
  } else {
    throw UsageError("config: unknown training setting '" + std::string(key) + "'");
  }
}

json TrainConfig::to_json() const {
  json doc{
      {"learning_rate", learning_rate},
      {"num_rounds", num_rounds},
      {"max_leaves", max_leaves},
      {"lambda", lambda},
      {"min_samples_leaf", min_samples_leaf},
      {"max_bins", max_bins},
      {"efb_enabled", efb_enabled},
      {"max_conflicts", max_conflicts},
      {"seed", seed},
  };
  if (goss) {
    doc["goss"] = {{"top_rate", goss->top_rate}, {"other_rate", goss->other_rate}};
  } else {
    doc["goss"] = nullptr;
  }
  return doc;
}

TrainConfig TrainConfig::from_json(const json& doc) {
  TrainConfig config;
  config.learning_rate = doc.at("learning_rate").get<double>();
  config.num_rounds = doc.at("num_rounds").get<int>();
  config.max_leaves = doc.at("max_leaves").get<int>();
  config.lambda = doc.at("lambda").get<double>();
  config.min_samples_leaf = doc.at("min_samples_leaf").get<int>();
  config.max_bins = doc.at("max_bins").get<int>();
  config.efb_enabled = doc.at("efb_enabled").get<bool>();
  config.max_conflicts = doc.at("max_conflicts").get<int>();
  config.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("goss") && !doc.at("goss").is_null()) {
    config.goss = GossConfig{doc.at("goss").at("top_rate").get<double>(),
                             doc.at("goss").at("other_rate").get<double>()};
  }
  return config;
}

}  // namespace edudss::gbdt
