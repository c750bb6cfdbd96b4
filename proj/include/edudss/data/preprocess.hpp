#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "edudss/common/matrix.hpp"
#include "edudss/data/record.hpp"

namespace edudss::data {

// Label encoder: code = position of the level in lexicographic order.
class LevelEncoder {
 public:
  LevelEncoder() = default;
  explicit LevelEncoder(std::vector<std::string> levels);  // sorts and dedups

  std::optional<int> encode(std::string_view level) const;
  const std::string& decode(int code) const;
  const std::vector<std::string>& levels() const noexcept { return levels_; }
  std::size_t size() const noexcept { return levels_.size(); }

  bool operator==(const LevelEncoder&) const = default;

 private:
  std::vector<std::string> levels_;
};

struct ColumnState {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  LevelEncoder encoder;        // categorical only
  std::string mode;            // categorical imputation value
  double median = 0.0;         // numeric imputation value
  double mean = 0.0;           // numeric scaler
  double stddev = 0.0;         // population std; 0 for constant columns

  bool operator==(const ColumnState&) const = default;
};

struct PreprocessorState {
  static constexpr int kFormatVersion = 1;

  std::vector<ColumnState> columns;

  std::size_t size() const noexcept { return columns.size(); }
  std::vector<std::string> feature_names() const;

  nlohmann::json to_json() const;
  static PreprocessorState from_json(const nlohmann::json& document);

  bool operator==(const PreprocessorState&) const = default;
};

enum class UnseenLevelPolicy {
  kError,
  kUseMode,  // fall back to the code of the training mode
};

struct FeatureVector {
  std::vector<double> values;
  std::string record_id;
};

PreprocessorState fit_preprocessor(const Dataset& train);

FeatureVector transform(const StudentRecord& record, const PreprocessorState& state,
                        UnseenLevelPolicy policy = UnseenLevelPolicy::kError);

struct TransformedData {
  FeatureMatrix features;
  std::vector<double> targets;  // empty when no row carries a target
  std::vector<std::string> ids;
};

TransformedData transform_dataset(const Dataset& data, const PreprocessorState& state,
                                  UnseenLevelPolicy policy = UnseenLevelPolicy::kError);

}  // namespace edudss::data
