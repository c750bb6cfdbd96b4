#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "edudss/gbdt/model.hpp"

namespace edudss::gbdt {

inline constexpr int kModelFormatVersion = 1;

// Numbers are written in shortest round-trip decimal form, so a
// serialize/deserialize cycle reproduces every double bit for bit.
nlohmann::json model_to_json(const GBDTModel& model);
GBDTModel model_from_json(const nlohmann::json& document);

std::string serialize_model(const GBDTModel& model);

// Throws ModelError on malformed documents and unsupported versions.
GBDTModel deserialize_model(std::string_view document);

}  // namespace edudss::gbdt
