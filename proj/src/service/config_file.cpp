#include "edudss/service/config_file.hpp"

#include <charconv>

#include "edudss/common/checksum.hpp"
#include "edudss/common/error.hpp"

namespace edudss::service {

namespace {

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw UsageError(std::string(key) + ": expected a number, got '" + std::string(value) + "'");
  }
  return out;
}

bool parse_flag(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw UsageError(std::string(key) + ": expected true or false, got '" + std::string(value) +
                   "'");
}

void apply_setting(std::string_view key, std::string_view value, ApiConfig& config) {
  if (key == "at_risk_threshold") {
    config.at_risk_threshold = parse_number<double>(key, value);
  } else if (key == "auto_retrain") {
    config.auto_retrain = parse_flag(key, value);
  } else if (key == "bind") {
    config.host = std::string(value);
  } else if (key == "port") {
    config.port = parse_number<int>(key, value);
  } else if (key == "data_dir") {
    config.data_dir = std::string(value);
  } else if (key == "unseen_levels") {
    if (value == "mode") {
      config.unseen_level_fallback = true;
    } else if (value == "error") {
      config.unseen_level_fallback = false;
    } else {
      throw UsageError("unseen_levels: expected 'error' or 'mode'");
    }
  } else {
    config.train.apply_setting(key, value);
  }
}

}  // namespace

void apply_config_text(std::string_view text, ApiConfig& config) {
  std::size_t line_number = 0;
  while (!text.empty()) {
    const auto newline = text.find('\n');
    auto line = text.substr(0, newline);
    text = newline == std::string_view::npos ? std::string_view{} : text.substr(newline + 1);
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_number) + ": expected key = value");
    }
    try {
      apply_setting(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), config);
    } catch (const UsageError& e) {
      throw UsageError("config line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  config.validate();
}

void apply_config_file(const std::filesystem::path& path, ApiConfig& config) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError&) {
    throw UsageError("cannot read config file " + path.string());
  }
  apply_config_text(text, config);
}

}  // namespace edudss::service
