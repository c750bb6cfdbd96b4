#include "edudss/data/record.hpp"

#include <cmath>

#include "edudss/common/error.hpp"

namespace edudss::data {

std::string_view to_string(Provenance provenance) noexcept {
  return provenance == Provenance::kOriginal ? "original" : "feedback";
}

void Dataset::append(StudentRecord record, Provenance tag) {
  rows.push_back(std::move(record));
  provenance.push_back(tag);
}

Dataset Dataset::select(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.schema = schema;
  out.rows.reserve(indices.size());
  out.provenance.reserve(indices.size());
  for (const auto index : indices) {
    out.rows.push_back(rows.at(index));
    out.provenance.push_back(provenance.at(index));
  }
  return out;
}

void validate_record(const StudentRecord& record, const FeatureSchema& schema,
                     bool require_target) {
  const auto label = record.id.empty() ? std::string("record") : "record '" + record.id + "'";
  if (record.values.size() != schema.size()) {
    throw DataError(label + ": expected " + std::to_string(schema.size()) +
                    " values, got " + std::to_string(record.values.size()));
  }
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& spec = schema.column(c);
    const auto& cell = record.values[c];
    if (is_missing(cell)) continue;
    if (spec.is_categorical()) {
      const auto* level = std::get_if<std::string>(&cell);
      if (level == nullptr) {
        throw DataError(label + ": column '" + spec.name + "' expects a categorical level");
      }
      if (!spec.allows_level(*level)) {
        throw DataError(label + ": column '" + spec.name + "' has unknown level '" +
                        *level + "'");
      }
    } else {
      const auto* number = std::get_if<double>(&cell);
      if (number == nullptr) {
        throw DataError(label + ": column '" + spec.name + "' expects a number");
      }
      if (!std::isfinite(*number)) {
        throw DataError(label + ": column '" + spec.name + "' is not finite");
      }
    }
  }
  if (record.target) {
    const double y = *record.target;
    if (!std::isfinite(y) || y < kMinScore || y > kMaxScore) {
      throw DataError(label + ": " + schema.target_name() + " must lie in [0, 100]");
    }
  } else if (require_target) {
    throw DataError(label + ": missing " + schema.target_name());
  }
}

}  // namespace edudss::data
