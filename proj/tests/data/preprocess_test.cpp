#include "edudss/data/preprocess.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "edudss/common/error.hpp"
#include "edudss/data/split.hpp"
#include "edudss/data/synthetic.hpp"

namespace edudss::data {
namespace {

// Two columns: a categorical with open level set and a numeric.
Dataset make_dataset(const std::vector<Cell>& levels, const std::vector<Cell>& numbers) {
  Dataset out;
  out.schema = FeatureSchema::parse("target = y\ncolumn = c categorical\ncolumn = x numeric\n");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    out.append({"r" + std::to_string(i), {levels[i], numbers[i]}, 50.0});
  }
  return out;
}

TEST(LevelEncoderTest, LexicographicCodes) {
  const LevelEncoder encoder({"Low", "Medium", "High"});
  EXPECT_EQ(encoder.encode("High"), 0);
  EXPECT_EQ(encoder.encode("Low"), 1);
  EXPECT_EQ(encoder.encode("Medium"), 2);
  EXPECT_FALSE(encoder.encode("Extreme").has_value());
}

TEST(LevelEncoderTest, RoundTripIsBijectionOntoPrefix) {
  const LevelEncoder encoder({"b", "a", "c", "a", "High School", "College"});
  ASSERT_EQ(encoder.size(), 5u);
  for (int code = 0; code < static_cast<int>(encoder.size()); ++code) {
    EXPECT_EQ(encoder.encode(encoder.decode(code)), code);
  }
  for (const auto& level : encoder.levels()) {
    EXPECT_EQ(encoder.decode(*encoder.encode(level)), level);
  }
}

TEST(PreprocessTest, MedianIgnoresMissing) {
  const auto data = make_dataset({"a", "a", "a", "a"}, {1.0, 2.0, 100.0, Cell{}});
  const auto state = fit_preprocessor(data);
  EXPECT_EQ(state.columns[1].median, 2.0);
}

TEST(PreprocessTest, EvenCountMedianAveragesMiddles) {
  const auto data = make_dataset({"a", "a", "a", "a"}, {4.0, 1.0, 3.0, 2.0});
  EXPECT_EQ(fit_preprocessor(data).columns[1].median, 2.5);
}

TEST(PreprocessTest, PopulationStandardDeviation) {
  const auto data = make_dataset({"a", "a", "a"}, {1.0, 2.0, 3.0});
  const auto state = fit_preprocessor(data);
  EXPECT_DOUBLE_EQ(state.columns[1].mean, 2.0);
  EXPECT_NEAR(state.columns[1].stddev, 0.8165, 1e-4);
  EXPECT_NEAR(state.columns[1].stddev, std::sqrt(2.0 / 3.0), 1e-15);
}

TEST(PreprocessTest, ScalesValueThree) {
  const auto data = make_dataset({"a", "a", "a"}, {1.0, 2.0, 3.0});
  const auto state = fit_preprocessor(data);
  const auto v = transform({"q", {std::string("a"), 3.0}, std::nullopt}, state);
  EXPECT_NEAR(v.values[1], 1.2247, 1e-4);
  EXPECT_EQ(v.record_id, "q");
}

TEST(PreprocessTest, RecordAtMeanScalesToZero) {
  const auto data = make_dataset({"a", "b", "a"}, {10.0, 20.0, 60.0});
  const auto state = fit_preprocessor(data);
  const auto v = transform({"m", {std::string("a"), state.columns[1].mean}, std::nullopt}, state);
  EXPECT_EQ(v.values[1], 0.0);
}

TEST(PreprocessTest, MissingCategoricalImputedWithMode) {
  Dataset data;
  data.schema = FeatureSchema::student_default();
  const auto source = generate_student_data(50, 3);
  data = source;
  const auto state = fit_preprocessor(data);
  const auto column = *data.schema.index_of("Parental_Involvement");
  auto record = data.rows[0];
  record.values[column] = Cell{};
  const auto v = transform(record, state);
  EXPECT_EQ(v.values[column], *state.columns[column].encoder.encode(state.columns[column].mode));
}

TEST(PreprocessTest, ModeTieGoesToSmallestLevel) {
  const auto data = make_dataset({"b", "a", "b", "a"}, {1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(fit_preprocessor(data).columns[0].mode, "a");
}

TEST(PreprocessTest, ConstantColumnScalesToZero) {
  const auto data = make_dataset({"a", "b"}, {5.0, 5.0});
  const auto state = fit_preprocessor(data);
  EXPECT_EQ(state.columns[1].stddev, 0.0);
  const auto v = transform({"z", {std::string("a"), 123.0}, std::nullopt}, state);
  EXPECT_EQ(v.values[1], 0.0);
}

TEST(PreprocessTest, EmptyAndAllMissingColumnsRejected) {
  EXPECT_THROW(fit_preprocessor(make_dataset({}, {})), DataError);
  EXPECT_THROW(fit_preprocessor(make_dataset({Cell{}, Cell{}}, {1.0, 2.0})), DataError);
  EXPECT_THROW(fit_preprocessor(make_dataset({"a", "a"}, {Cell{}, Cell{}})), DataError);
}

TEST(PreprocessTest, UnseenLevelErrorsByDefaultAndFallsBackOnRequest) {
  const auto data = make_dataset({"a", "a", "b"}, {1.0, 2.0, 3.0});
  const auto state = fit_preprocessor(data);
  const StudentRecord record{"u", {std::string("zzz"), 1.0}, std::nullopt};
  try {
    transform(record, state);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("zzz"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("'c'"), std::string::npos);
  }
  EXPECT_EQ(transform(record, state, UnseenLevelPolicy::kUseMode).values[0], 0.0);
}

TEST(PreprocessTest, TransformDatasetPreservesOrderAndCentersColumns) {
  const auto data = generate_student_data(500, 11);
  const auto state = fit_preprocessor(data);
  const auto out = transform_dataset(data, state);
  ASSERT_EQ(out.features.rows(), data.size());
  ASSERT_EQ(out.targets.size(), data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    EXPECT_EQ(out.ids[r], data.rows[r].id);
    EXPECT_EQ(out.targets[r], *data.rows[r].target);
  }
  for (std::size_t c = 0; c < state.size(); ++c) {
    if (state.columns[c].kind != ColumnKind::kNumeric || state.columns[c].stddev == 0.0) continue;
    double mean = 0.0;
    for (std::size_t r = 0; r < out.features.rows(); ++r) mean += out.features.at(r, c);
    mean /= static_cast<double>(out.features.rows());
    double var = 0.0;
    for (std::size_t r = 0; r < out.features.rows(); ++r) {
      var += (out.features.at(r, c) - mean) * (out.features.at(r, c) - mean);
    }
    const double sd = std::sqrt(var / static_cast<double>(out.features.rows()));
    EXPECT_LT(std::fabs(mean), 1e-9) << state.columns[c].name;
    EXPECT_LT(std::fabs(sd - 1.0), 1e-9) << state.columns[c].name;
  }
}

TEST(PreprocessTest, EmptyDatasetTransformsToEmpty) {
  const auto state = fit_preprocessor(generate_student_data(20, 1));
  Dataset empty;
  empty.schema = FeatureSchema::student_default();
  const auto out = transform_dataset(empty, state);
  EXPECT_EQ(out.features.rows(), 0u);
  EXPECT_TRUE(out.targets.empty());
}

TEST(PreprocessTest, CompleteRecordsOnlyChangeByEncodingAndScaling) {
  const auto data = make_dataset({"a", "b", "a"}, {1.0, 2.0, 4.0});
  const auto state = fit_preprocessor(data);
  for (const auto& row : data.rows) {
    const auto v = transform(row, state);
    EXPECT_EQ(v.values[0], *state.columns[0].encoder.encode(std::get<std::string>(row.values[0])));
    EXPECT_DOUBLE_EQ(v.values[1],
                     (std::get<double>(row.values[1]) - state.columns[1].mean) / state.columns[1].stddev);
  }
}

TEST(PreprocessTest, CorruptingTestRowsNeverChangesFittedState) {
  const auto data = generate_student_data(400, 5);
  const auto indices = split_indices(data.size(), 0.2, 42);
  const auto train = data.select(indices.train);
  const auto state = fit_preprocessor(train);

  auto corrupted = data;
  for (const auto i : indices.test) {
    corrupted.rows[i].values[0] = 1e6;
    corrupted.rows[i].values[2] = std::string("High");
  }
  EXPECT_EQ(fit_preprocessor(corrupted.select(indices.train)), state);
}

TEST(PreprocessTest, StateJsonRoundTrip) {
  const auto state = fit_preprocessor(generate_student_data(300, 2));
  const auto doc = state.to_json();
  for (const char* key : {"version", "encoders", "imputation", "scaler"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  EXPECT_EQ(PreprocessorState::from_json(nlohmann::json::parse(doc.dump())), state);
}

TEST(PreprocessTest, StateJsonVersionMismatchRejected) {
  auto doc = fit_preprocessor(generate_student_data(30, 2)).to_json();
  doc["version"] = 0;
  EXPECT_THROW(PreprocessorState::from_json(doc), ModelError);
}

}  // namespace
}  // namespace edudss::data
