#include "edudss/data/record_json.hpp"

#include <gtest/gtest.h>

#include "edudss/common/error.hpp"
#include "edudss/data/synthetic.hpp"

namespace edudss::data {
namespace {

TEST(RecordJsonTest, RoundTrip) {
  const auto data = generate_student_data(30, 8);
  for (const auto& row : data.rows) {
    const auto back = record_from_json(record_to_json(row, data.schema), data.schema, true);
    EXPECT_EQ(back.id, row.id);
    EXPECT_EQ(back.values, row.values);
    EXPECT_EQ(back.target, row.target);
  }
}

TEST(RecordJsonTest, AbsentAndNullFieldsAreMissing) {
  const auto schema = FeatureSchema::student_default();
  const auto record = record_from_json({{"Hours_Studied", 20}, {"Gender", nullptr}}, schema, false);
  EXPECT_EQ(std::get<double>(record.values[0]), 20.0);
  EXPECT_TRUE(is_missing(record.values[1]));
  EXPECT_TRUE(is_missing(record.values[18]));
  EXPECT_FALSE(record.target.has_value());
}

TEST(RecordJsonTest, RejectsUnknownFieldsWrongTypesAndBadTargets) {
  const auto schema = FeatureSchema::student_default();
  EXPECT_THROW(record_from_json({{"Shoe_Size", 9}}, schema, false), DataError);
  EXPECT_THROW(record_from_json({{"Hours_Studied", "many"}}, schema, false), DataError);
  EXPECT_THROW(record_from_json({{"Gender", 1}}, schema, false), DataError);
  EXPECT_THROW(record_from_json({{"Gender", "Other"}}, schema, false), DataError);
  EXPECT_THROW(record_from_json({{"Exam_Score", 120}}, schema, false), DataError);
  EXPECT_THROW(record_from_json(nlohmann::json::object(), schema, true), DataError);
  EXPECT_THROW(record_from_json(nlohmann::json::array(), schema, false), DataError);
}

}  // namespace
}  // namespace edudss::data
