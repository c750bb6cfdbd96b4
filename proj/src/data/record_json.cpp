#include "edudss/data/record_json.hpp"

#include "edudss/common/error.hpp"

namespace edudss::data {

nlohmann::json cell_to_json(const Cell& cell) {
  if (const auto* number = std::get_if<double>(&cell)) return *number;
  if (const auto* level = std::get_if<std::string>(&cell)) return *level;
  return nullptr;
}

nlohmann::json record_to_json(const StudentRecord& record, const FeatureSchema& schema) {
  nlohmann::json out = nlohmann::json::object();
  if (!record.id.empty()) out["id"] = record.id;
  for (std::size_t c = 0; c < schema.size() && c < record.values.size(); ++c) {
    out[schema.column(c).name] = cell_to_json(record.values[c]);
  }
  if (record.target) out[schema.target_name()] = *record.target;
  return out;
}

StudentRecord record_from_json(const nlohmann::json& object, const FeatureSchema& schema,
                               bool require_target, const std::string& fallback_id) {
  if (!object.is_object()) throw DataError("record must be a JSON object");
  StudentRecord record;
  record.id = fallback_id;
  if (const auto it = object.find("id"); it != object.end() && !it->is_null()) {
    if (it->is_string()) {
      record.id = it->get<std::string>();
    } else if (it->is_number_integer()) {
      record.id = std::to_string(it->get<long long>());
    } else {
      throw DataError("record field 'id' must be a string or integer");
    }
  }
  const auto label = record.id.empty() ? std::string("record") : "record '" + record.id + "'";

  for (const auto& [key, value] : object.items()) {
    if (key == "id" || key == schema.target_name()) continue;
    if (!schema.index_of(key)) throw DataError(label + ": unknown field '" + key + "'");
  }

  record.values.resize(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& spec = schema.column(c);
    const auto it = object.find(spec.name);
    if (it == object.end() || it->is_null()) continue;
    if (spec.is_categorical()) {
      if (!it->is_string()) {
        throw DataError(label + ": field '" + spec.name + "' must be a string level");
      }
      record.values[c] = it->get<std::string>();
    } else {
      if (!it->is_number()) {
        throw DataError(label + ": field '" + spec.name + "' must be a number");
      }
      record.values[c] = it->get<double>();
    }
  }

  if (const auto it = object.find(schema.target_name());
      it != object.end() && !it->is_null()) {
    if (!it->is_number()) {
      throw DataError(label + ": field '" + schema.target_name() + "' must be a number");
    }
    record.target = it->get<double>();
  }
  validate_record(record, schema, require_target);
  return record;
}

}  // namespace edudss::data
