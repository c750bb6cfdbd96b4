#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "edudss/data/record.hpp"
#include "edudss/evaluate/metrics.hpp"
#include "edudss/gbdt/config.hpp"
#include "edudss/store/dataset_store.hpp"
#include "edudss/store/model_version.hpp"

namespace edudss::loop {

inline constexpr const char* kInitialPhase = "Initial";
inline constexpr const char* kRetrainedPhase = "Retrained";

// Post-intervention observations. Every record needs a target in [0, 100].
struct FeedbackBatch {
  std::vector<data::StudentRecord> records;
  std::string submitted_at;  // empty: stamped at submission
  std::string note;

  // {"note": "...", "submitted_at": "...", "records": [{...}, ...]}
  static FeedbackBatch from_json(const nlohmann::json& document,
                                 const data::FeatureSchema& schema);
  nlohmann::json to_json(const data::FeatureSchema& schema) const;
};

struct SubmitResult {
  std::size_t accepted = 0;
  std::size_t store_size = 0;
  std::vector<std::string> row_ids;
};

// All-or-nothing append. Throws DataError on an empty or invalid batch.
SubmitResult submit_feedback(store::DatasetStore& store, const FeedbackBatch& batch,
                             std::string_view origin = "library");

// Fits preprocessor and model on the store's training rows as of
// `row_count` (default: everything committed) and evaluates on the frozen
// test set. Nothing is persisted.
store::ModelVersion fit_version(const store::DatasetStore& store, const gbdt::TrainConfig& config,
                                int version_id, std::optional<int> parent,
                                std::optional<std::size_t> row_count = std::nullopt);

// Trains and persists version 1. Throws ConflictError if a version exists.
store::ModelVersion train_initial(store::DatasetStore& store, const gbdt::TrainConfig& config,
                                  std::string_view origin = "library");

enum class Trend { kUp, kDown, kFlat };
inline constexpr double kFlatTolerance = 0.005;
std::string_view to_string(Trend trend) noexcept;
Trend classify_trend(double diff) noexcept;

struct PredictionComparison {
  std::string id;
  double initial_score = 0.0;
  double post_retrain_score = 0.0;
  double diff = 0.0;  // post - initial
  Trend trend = Trend::kFlat;
};

// Predicts every record with both versions, each through its own
// preprocessor.
std::vector<PredictionComparison> compare_predictions(
    const store::ModelVersion& old_version, const store::ModelVersion& new_version,
    const std::vector<data::StudentRecord>& records);

struct RetrainReport {
  int parent_version = 0;
  int version = 0;
  std::size_t trained_on_count = 0;
  std::size_t new_rows = 0;
  evaluate::MetricsReport before;
  evaluate::MetricsReport after;
  std::vector<PredictionComparison> students;  // feedback rows new to this version
};

// Full refit on original training rows plus all feedback. Throws
// ConflictError when nothing was added since the latest version and `force`
// is false, or when no version exists yet. A failure before the final
// rename leaves the deployed version untouched.
RetrainReport retrain(store::DatasetStore& store, const gbdt::TrainConfig& config, bool force,
                      std::string_view origin = "library");

// Feedback records committed after `watermark` store rows.
std::vector<data::StudentRecord> feedback_since(const store::DatasetStore& store,
                                                std::size_t watermark);

// Compares the latest version against its parent on the feedback rows the
// latest version added. Throws ConflictError with fewer than two versions.
std::vector<PredictionComparison> compare_latest(const store::DatasetStore& store);

// Retrains version `version_id` from the store using its own config and
// row count. Matches the persisted model byte for byte.
store::ModelVersion replay_version(const store::DatasetStore& store, int version_id);

// Metrics of every version, oldest first.
std::vector<evaluate::MetricsReport> evaluation_history(const store::DatasetStore& store);

nlohmann::json to_json(const PredictionComparison& row);
nlohmann::json to_json(const std::vector<PredictionComparison>& rows);
nlohmann::json to_json(const RetrainReport& report);
nlohmann::json to_json(const SubmitResult& result);
nlohmann::json history_to_json(const std::vector<evaluate::MetricsReport>& history,
                               const std::vector<store::VersionInfo>& versions);

}  // namespace edudss::loop
