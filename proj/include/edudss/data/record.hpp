#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "edudss/data/schema.hpp"

namespace edudss::data {

// A raw cell: missing, numeric, or a categorical level.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& cell) noexcept {
  return std::holds_alternative<std::monostate>(cell);
}

enum class Provenance { kOriginal, kFeedback };

std::string_view to_string(Provenance provenance) noexcept;

struct StudentRecord {
  std::string id;
  std::vector<Cell> values;  // one per schema column, target excluded
  std::optional<double> target;
};

inline constexpr double kMinScore = 0.0;
inline constexpr double kMaxScore = 100.0;

struct Dataset {
  FeatureSchema schema;
  std::vector<StudentRecord> rows;
  std::vector<Provenance> provenance;  // parallel to rows

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
  void append(StudentRecord record, Provenance tag = Provenance::kOriginal);

  // Subset in the given index order.
  Dataset select(const std::vector<std::size_t>& indices) const;
};

// Throws DataError if the record does not conform to the schema: wrong arity,
// numeric cell in a categorical column (or vice versa), level outside the
// allowed set, or target outside [0, 100].
void validate_record(const StudentRecord& record, const FeatureSchema& schema,
                     bool require_target);

}  // namespace edudss::data
