#include "edudss/service/engine.hpp"

#include <cstdlib>

#include "edudss/common/error.hpp"
#include "edudss/data/preprocess.hpp"
#include "edudss/data/record_json.hpp"
#include "edudss/explain/tree_shap.hpp"
#include "edudss/loop/feedback_loop.hpp"

namespace edudss::service {

using nlohmann::json;

namespace {

std::optional<std::string> env(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') return std::nullopt;
  return std::string(value);
}

bool parse_bool(const std::string& text, const char* name) {
  if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "off" || text == "no") return false;
  throw UsageError(std::string(name) + ": expected a boolean, got '" + text + "'");
}

double parse_double(const std::string& text, const char* name) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw UsageError(std::string(name) + ": expected a number, got '" + text + "'");
  }
}

json version_id_json(const std::shared_ptr<const store::ModelVersion>& version) {
  return version ? json(version->version_id) : json(nullptr);
}

}  // namespace

void ApiConfig::validate() const {
  if (!(at_risk_threshold >= 0.0 && at_risk_threshold <= 100.0)) {
    throw UsageError("at_risk_threshold must lie in [0, 100]");
  }
  if (port < 0 || port > 65535) throw UsageError("port must lie in [0, 65535]");
  train.validate();
}

void ApiConfig::apply_environment() {
  if (auto v = env("EDUDSS_BIND")) host = *v;
  if (auto v = env("EDUDSS_PORT")) port = static_cast<int>(parse_double(*v, "EDUDSS_PORT"));
  if (auto v = env("EDUDSS_DATA_DIR")) data_dir = *v;
  if (auto v = env("EDUDSS_AT_RISK_THRESHOLD")) {
    at_risk_threshold = parse_double(*v, "EDUDSS_AT_RISK_THRESHOLD");
  }
  if (auto v = env("EDUDSS_AUTO_RETRAIN")) auto_retrain = parse_bool(*v, "EDUDSS_AUTO_RETRAIN");
  if (auto v = env("EDUDSS_TOKEN")) token = *v;
}

json ApiError::to_json() const {
  return {{"code", code_}, {"message", what()}, {"details", details_}};
}

ApiError to_api_error(const std::exception& error) {
  if (const auto* api = dynamic_cast<const ApiError*>(&error)) return *api;
  if (const auto* e = dynamic_cast<const Error*>(&error)) {
    switch (e->kind()) {
      case ErrorKind::kUsage:
      case ErrorKind::kData:
        return {400, "invalid_request", e->what()};
      case ErrorKind::kConflict:
        return {409, "conflict", e->what()};
      case ErrorKind::kModel:
        return {500, "model_error", e->what()};
      case ErrorKind::kIntegrity:
        return {500, "integrity_error", e->what()};
      case ErrorKind::kService:
        return {503, "unavailable", e->what()};
    }
  }
  if (dynamic_cast<const json::exception*>(&error) != nullptr) {
    return {400, "invalid_json", error.what()};
  }
  return {500, "internal", error.what()};
}

Engine::Engine(ApiConfig config, store::OpenMode mode)
    : config_(std::move(config)), store_(store::DatasetStore::open(config_.data_dir, mode)) {
  config_.validate();
  if (const auto latest = store_.latest_version()) {
    deploy(std::make_shared<const store::ModelVersion>(store_.get_version(*latest)));
  }
}

Engine::~Engine() { wait_idle(); }

void Engine::wait_idle() {
  std::lock_guard lock(worker_mutex_);
  if (worker_.joinable()) worker_.join();
}

std::shared_ptr<const store::ModelVersion> Engine::deployed() const {
  std::lock_guard lock(deploy_mutex_);
  return deployed_;
}

void Engine::deploy(std::shared_ptr<const store::ModelVersion> version) {
  std::lock_guard lock(deploy_mutex_);
  deployed_ = std::move(version);
}

std::shared_ptr<const store::ModelVersion> Engine::require_deployed() const {
  auto version = deployed();
  if (!version) throw ApiError(503, "untrained", "no model has been trained yet");
  return version;
}

json Engine::health() const {
  const auto version = deployed();
  std::size_t rows = 0;
  {
    std::lock_guard lock(store_mutex_);
    rows = store_.row_count();
  }
  json out = {{"status", version ? "ok" : "untrained"},
              {"version", version_id_json(version)},
              {"store_rows", rows},
              {"retrain_in_flight", retrain_in_flight_.load()}};
  std::lock_guard lock(deploy_mutex_);
  if (!last_background_result_.is_null()) out["last_auto_retrain"] = last_background_result_;
  return out;
}

json Engine::predict(const json& body) const {
  const json* records = &body;
  if (body.is_object() && body.contains("records")) records = &body.at("records");
  json list = records->is_array() ? *records : json::array({*records});
  if (list.empty() || (list.size() == 1 && list[0].is_object() && list[0].empty())) {
    throw ApiError(400, "invalid_request", "no records to predict");
  }

  const auto version = require_deployed();
  const auto& schema = store_.schema();
  const auto policy = config_.unseen_level_fallback ? data::UnseenLevelPolicy::kUseMode
                                                    : data::UnseenLevelPolicy::kError;
  std::vector<data::StudentRecord> parsed;
  json details = json::array();
  for (std::size_t i = 0; i < list.size(); ++i) {
    try {
      parsed.push_back(data::record_from_json(list[i], schema, false,
                                              "record-" + std::to_string(i)));
    } catch (const DataError& e) {
      details.push_back({{"index", i}, {"message", e.what()}});
    }
  }
  if (!details.empty()) {
    throw ApiError(400, "invalid_request", "one or more records failed validation", details);
  }

  json predictions = json::array();
  for (const auto& record : parsed) {
    const auto features = data::transform(record, version->preprocessor, policy);
    const double score = version->model.predict(features.values);
    predictions.push_back(
        {{"id", record.id}, {"score", score}, {"at_risk", score < config_.at_risk_threshold}});
  }
  return {{"version", version->version_id},
          {"threshold", config_.at_risk_threshold},
          {"predictions", std::move(predictions)}};
}

json Engine::feedback(const json& body) {
  const auto batch = loop::FeedbackBatch::from_json(body, store_.schema());
  if (config_.auto_retrain && retrain_in_flight_.load()) {
    throw ApiError(409, "retrain_in_progress",
                   "a retrain is in flight; resubmit feedback when it completes");
  }
  loop::SubmitResult result;
  {
    std::lock_guard lock(store_mutex_);
    result = loop::submit_feedback(store_, batch, origin_ + " /v1/feedback");
  }
  bool triggered = false;
  if (config_.auto_retrain && deployed()) {
    bool expected = false;
    if (retrain_in_flight_.compare_exchange_strong(expected, true)) {
      std::lock_guard lock(worker_mutex_);
      if (worker_.joinable()) worker_.join();
      worker_ = std::thread([this] {
        json outcome;
        try {
          outcome = run_retrain(false, origin_ + " /v1/feedback (auto-retrain)");
        } catch (const std::exception& e) {
          outcome = to_api_error(e).to_json();
        }
        {
          std::lock_guard lock(deploy_mutex_);
          last_background_result_ = std::move(outcome);
        }
        retrain_in_flight_ = false;
      });
      triggered = true;
    }
  }
  auto out = loop::to_json(result);
  out["retrain_triggered"] = triggered;
  return out;
}

json Engine::train(const json& body) {
  (void)body;
  bool expected = false;
  if (!retrain_in_flight_.compare_exchange_strong(expected, true)) {
    throw ApiError(409, "retrain_in_progress", "a training run is already in flight");
  }
  struct Reset {
    std::atomic<bool>& flag;
    ~Reset() { flag = false; }
  } reset{retrain_in_flight_};

  std::lock_guard lock(store_mutex_);
  auto version = std::make_shared<const store::ModelVersion>(
      loop::train_initial(store_, config_.train, origin_ + " /v1/train"));
  deploy(version);
  return {{"version", version->version_id},
          {"trained_on_count", version->trained_on_count},
          {"fit_rows", version->fit_rows},
          {"metrics", version->metrics.to_json()}};
}

json Engine::run_retrain(bool force, const std::string& origin) {
  std::lock_guard lock(store_mutex_);
  const auto report = loop::retrain(store_, config_.train, force, origin);
  deploy(std::make_shared<const store::ModelVersion>(store_.get_version(report.version)));
  return loop::to_json(report);
}

json Engine::retrain(const json& body) {
  bool force = false;
  if (body.is_object()) {
    if (const auto it = body.find("force"); it != body.end()) {
      if (!it->is_boolean()) throw ApiError(400, "invalid_request", "'force' must be a boolean");
      force = it->get<bool>();
    }
  }
  bool expected = false;
  if (!retrain_in_flight_.compare_exchange_strong(expected, true)) {
    throw ApiError(409, "retrain_in_progress", "a retrain is already in flight");
  }
  struct Reset {
    std::atomic<bool>& flag;
    ~Reset() { flag = false; }
  } reset{retrain_in_flight_};
  return run_retrain(force, origin_ + " /v1/retrain");
}

json Engine::explain_with(const data::StudentRecord& record,
                          const store::ModelVersion& version) const {
  const auto policy = config_.unseen_level_fallback ? data::UnseenLevelPolicy::kUseMode
                                                    : data::UnseenLevelPolicy::kError;
  const auto features = data::transform(record, version.preprocessor, policy);
  const auto explanation = explain::explain(version.model, features.values);
  std::vector<json> values;
  for (const auto& cell : record.values) values.push_back(data::cell_to_json(cell));
  return {{"version", version.version_id},
          {"id", record.id},
          {"base_value", explanation.base_value},
          {"prediction", explanation.prediction},
          {"at_risk", explanation.prediction < config_.at_risk_threshold},
          {"contributions",
           explain::contributions_to_json(explanation, version.model.feature_names, values)}};
}

json Engine::explain_id(std::string_view record_id) const {
  const auto version = require_deployed();
  std::optional<data::StudentRecord> record;
  {
    std::lock_guard lock(store_mutex_);
    record = store_.find_record(record_id);
  }
  if (!record) {
    throw ApiError(404, "not_found", "no record with id '" + std::string(record_id) + "'");
  }
  return explain_with(*record, *version);
}

json Engine::explain_record(const json& body) const {
  const auto version = require_deployed();
  const json& object = body.is_object() && body.contains("record") ? body.at("record") : body;
  const auto record = data::record_from_json(object, store_.schema(), false, "record");
  return explain_with(record, *version);
}

json Engine::history() const {
  std::lock_guard lock(store_mutex_);
  return {{"history",
           loop::history_to_json(loop::evaluation_history(store_), store_.list_versions())}};
}

json Engine::current_model() const {
  const auto version = require_deployed();
  return {{"version", version->version_id},
          {"parent_version",
           version->parent_version ? json(*version->parent_version) : json(nullptr)},
          {"trained_on_count", version->trained_on_count},
          {"fit_rows", version->fit_rows},
          {"created_at", version->created_at},
          {"num_trees", version->model.trees.size()},
          {"feature_names", version->model.feature_names},
          {"config", version->model.config.to_json()},
          {"metrics", version->metrics.to_json()}};
}

json Engine::compare() const {
  std::lock_guard lock(store_mutex_);
  const auto versions = store_.list_versions();
  const auto rows = loop::compare_latest(store_);
  const auto& latest = versions.back();
  return {{"parent_version",
           latest.parent_version.value_or(versions[versions.size() - 2].version_id)},
          {"version", latest.version_id},
          {"students", loop::to_json(rows)}};
}

json Engine::evaluate() const {
  const auto version = require_deployed();
  std::lock_guard lock(store_mutex_);
  const auto report = evaluate::evaluate_model(version->model, store_.test_set(),
                                               version->preprocessor, version->metrics.phase_label);
  auto out = report.to_json();
  out["version"] = version->version_id;
  return out;
}

}  // namespace edudss::service
