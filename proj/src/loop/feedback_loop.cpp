#include "edudss/loop/feedback_loop.hpp"

#include <cmath>

#include "edudss/common/clock.hpp"
#include "edudss/common/error.hpp"
#include "edudss/data/preprocess.hpp"
#include "edudss/data/record_json.hpp"
#include "edudss/gbdt/booster.hpp"

namespace edudss::loop {

using nlohmann::json;

namespace {

void audit(store::DatasetStore& store, std::string_view event, std::string_view origin,
           json details) {
  details["timestamp"] = utc_timestamp();
  details["event"] = event;
  details["origin"] = origin;
  store.append_audit(std::move(details));
}

json optional_id(std::optional<int> id) { return id ? json(*id) : json(nullptr); }

double predict_record(const store::ModelVersion& version, const data::StudentRecord& record) {
  const auto features = data::transform(record, version.preprocessor);
  return version.model.predict(features.values);
}

}  // namespace

FeedbackBatch FeedbackBatch::from_json(const json& document, const data::FeatureSchema& schema) {
  if (!document.is_object()) throw DataError("feedback batch must be a JSON object");
  FeedbackBatch batch;
  if (const auto it = document.find("note"); it != document.end() && !it->is_null()) {
    if (!it->is_string()) throw DataError("feedback field 'note' must be a string");
    batch.note = it->get<std::string>();
  }
  if (const auto it = document.find("submitted_at"); it != document.end() && !it->is_null()) {
    if (!it->is_string()) throw DataError("feedback field 'submitted_at' must be a string");
    batch.submitted_at = it->get<std::string>();
  }
  const auto records = document.find("records");
  if (records == document.end() || !records->is_array()) {
    throw DataError("feedback batch needs a 'records' array");
  }
  for (std::size_t i = 0; i < records->size(); ++i) {
    try {
      batch.records.push_back(data::record_from_json((*records)[i], schema, true,
                                                     "feedback-" + std::to_string(i)));
    } catch (const DataError& e) {
      throw DataError("records[" + std::to_string(i) + "]: " + e.what());
    }
  }
  if (batch.records.empty()) throw DataError("feedback batch is empty");
  return batch;
}

json FeedbackBatch::to_json(const data::FeatureSchema& schema) const {
  json records_json = json::array();
  for (const auto& record : records) records_json.push_back(data::record_to_json(record, schema));
  json out = {{"note", note}, {"records", std::move(records_json)}};
  if (!submitted_at.empty()) out["submitted_at"] = submitted_at;
  return out;
}

SubmitResult submit_feedback(store::DatasetStore& store, const FeedbackBatch& batch,
                             std::string_view origin) {
  if (batch.records.empty()) throw DataError("feedback batch is empty");
  const auto submitted_at = batch.submitted_at.empty() ? utc_timestamp() : batch.submitted_at;
  SubmitResult result;
  result.row_ids = store.append_feedback(batch.records, batch.note, submitted_at);
  result.accepted = result.row_ids.size();
  result.store_size = store.row_count();
  audit(store, "feedback", origin,
        {{"accepted", result.accepted},
         {"store_size", result.store_size},
         {"row_ids", result.row_ids},
         {"version", optional_id(store.latest_version())}});
  return result;
}

store::ModelVersion fit_version(const store::DatasetStore& store, const gbdt::TrainConfig& config,
                                int version_id, std::optional<int> parent,
                                std::optional<std::size_t> row_count) {
  config.validate();
  const std::size_t rows = row_count.value_or(store.row_count());
  const auto train = store.training_set(rows);
  store::ModelVersion version;
  version.version_id = version_id;
  version.parent_version = parent;
  version.preprocessor = data::fit_preprocessor(train);
  const auto transformed = data::transform_dataset(train, version.preprocessor);
  version.model = gbdt::train(transformed.features, transformed.targets, config,
                              version.preprocessor.feature_names());
  version.trained_on_count = rows;
  version.fit_rows = train.size();
  version.metrics = evaluate::evaluate_model(version.model, store.test_set(), version.preprocessor,
                                             parent ? kRetrainedPhase : kInitialPhase);
  version.created_at = version.metrics.timestamp;
  return version;
}

store::ModelVersion train_initial(store::DatasetStore& store, const gbdt::TrainConfig& config,
                                  std::string_view origin) {
  if (const auto latest = store.latest_version()) {
    throw ConflictError("store already has version " + std::to_string(*latest) +
                        "; use retrain");
  }
  auto version = fit_version(store, config, 1, std::nullopt);
  store.put_version(version);
  audit(store, "train", origin,
        {{"version_before", nullptr},
         {"version_after", version.version_id},
         {"trained_on_count", version.trained_on_count}});
  return version;
}

std::string_view to_string(Trend trend) noexcept {
  switch (trend) {
    case Trend::kUp:
      return "up";
    case Trend::kDown:
      return "down";
    case Trend::kFlat:
      break;
  }
  return "flat";
}

Trend classify_trend(double diff) noexcept {
  if (std::fabs(diff) < kFlatTolerance) return Trend::kFlat;
  return diff > 0.0 ? Trend::kUp : Trend::kDown;
}

std::vector<PredictionComparison> compare_predictions(
    const store::ModelVersion& old_version, const store::ModelVersion& new_version,
    const std::vector<data::StudentRecord>& records) {
  std::vector<PredictionComparison> out;
  out.reserve(records.size());
  for (const auto& record : records) {
    PredictionComparison row;
    row.id = record.id;
    row.initial_score = predict_record(old_version, record);
    row.post_retrain_score = predict_record(new_version, record);
    row.diff = row.post_retrain_score - row.initial_score;
    row.trend = classify_trend(row.diff);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<data::StudentRecord> feedback_since(const store::DatasetStore& store,
                                                std::size_t watermark) {
  std::vector<data::StudentRecord> out;
  const auto& feedback = store.feedback();
  const std::size_t original = store.original().size();
  const std::size_t first = watermark > original ? watermark - original : 0;
  for (std::size_t i = first; i < feedback.size(); ++i) out.push_back(feedback[i].record);
  return out;
}

RetrainReport retrain(store::DatasetStore& store, const gbdt::TrainConfig& config, bool force,
                      std::string_view origin) {
  const auto versions = store.list_versions();
  if (versions.empty()) throw ConflictError("no trained version yet; run train first");
  const auto& parent_info = versions.back();
  const std::size_t rows = store.row_count();
  if (!force && rows <= parent_info.trained_on_count) {
    throw ConflictError("no new feedback since version " +
                        std::to_string(parent_info.version_id) +
                        "; retrain with force to refit anyway");
  }

  const auto parent = store.get_version(parent_info.version_id);
  auto next = fit_version(store, config, parent.version_id + 1, parent.version_id, rows);
  const auto new_records = feedback_since(store, parent.trained_on_count);

  RetrainReport report;
  report.parent_version = parent.version_id;
  report.version = next.version_id;
  report.trained_on_count = next.trained_on_count;
  report.new_rows = rows - parent.trained_on_count;
  report.before = parent.metrics;
  report.after = next.metrics;
  report.students = compare_predictions(parent, next, new_records);

  store.put_version(next);
  audit(store, "retrain", origin,
        {{"version_before", parent.version_id},
         {"version_after", next.version_id},
         {"trained_on_count", next.trained_on_count},
         {"forced", force}});
  return report;
}

std::vector<PredictionComparison> compare_latest(const store::DatasetStore& store) {
  const auto versions = store.list_versions();
  if (versions.size() < 2) {
    throw ConflictError("compare needs at least two versions; retrain first");
  }
  const auto& latest_info = versions.back();
  const int parent_id = latest_info.parent_version.value_or(versions[versions.size() - 2].version_id);
  const auto latest = store.get_version(latest_info.version_id);
  const auto parent = store.get_version(parent_id);
  auto records = feedback_since(store, parent.trained_on_count);
  const std::size_t original = store.original().size();
  const std::size_t limit = latest.trained_on_count - std::max(parent.trained_on_count, original);
  if (records.size() > limit) records.resize(limit);
  return compare_predictions(parent, latest, records);
}

store::ModelVersion replay_version(const store::DatasetStore& store, int version_id) {
  const auto persisted = store.get_version(version_id);
  return fit_version(store, persisted.model.config, persisted.version_id,
                     persisted.parent_version, persisted.trained_on_count);
}

std::vector<evaluate::MetricsReport> evaluation_history(const store::DatasetStore& store) {
  std::vector<evaluate::MetricsReport> out;
  for (const auto& info : store.list_versions()) {
    out.push_back(store.get_version(info.version_id).metrics);
  }
  return out;
}

json to_json(const PredictionComparison& row) {
  return {{"id", row.id},
          {"initial_score", row.initial_score},
          {"post_retrain_score", row.post_retrain_score},
          {"diff", row.diff},
          {"trend", to_string(row.trend)}};
}

json to_json(const std::vector<PredictionComparison>& rows) {
  json out = json::array();
  for (const auto& row : rows) out.push_back(to_json(row));
  return out;
}

json to_json(const RetrainReport& report) {
  return {{"parent_version", report.parent_version},
          {"version", report.version},
          {"trained_on_count", report.trained_on_count},
          {"new_rows", report.new_rows},
          {"before", report.before.to_json()},
          {"after", report.after.to_json()},
          {"students", to_json(report.students)}};
}

json to_json(const SubmitResult& result) {
  return {{"accepted", result.accepted},
          {"store_size", result.store_size},
          {"row_ids", result.row_ids}};
}

json history_to_json(const std::vector<evaluate::MetricsReport>& history,
                     const std::vector<store::VersionInfo>& versions) {
  json out = json::array();
  for (std::size_t i = 0; i < history.size(); ++i) {
    auto entry = history[i].to_json();
    if (i < versions.size()) {
      entry["version"] = versions[i].version_id;
      entry["trained_on_count"] = versions[i].trained_on_count;
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace edudss::loop
