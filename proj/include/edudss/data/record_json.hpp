#pragma once

#include <string>

#include <json.hpp>

#include "edudss/data/record.hpp"
#include "edudss/data/schema.hpp"

namespace edudss::data {

// JSON form of a record: an object keyed by column name, plus an optional
// "id" and the target under the schema's target name. Numeric columns take
// numbers, categorical columns take strings; null or an absent key is a
// missing cell.
//
//   {"id": "S1", "Hours_Studied": 23, "Parental_Involvement": "Low", ...,
//    "Exam_Score": 67}
nlohmann::json record_to_json(const StudentRecord& record, const FeatureSchema& schema);

// Throws DataError on unknown keys, wrong value types, or (when
// require_target) a missing target. Schema levels are checked too.
StudentRecord record_from_json(const nlohmann::json& object, const FeatureSchema& schema,
                               bool require_target, const std::string& fallback_id = {});

// Display value of one cell: number, string, or null.
nlohmann::json cell_to_json(const Cell& cell);

}  // namespace edudss::data
