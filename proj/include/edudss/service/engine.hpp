#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>

#include <json.hpp>

#include "edudss/gbdt/config.hpp"
#include "edudss/store/dataset_store.hpp"
#include "edudss/store/model_version.hpp"

namespace edudss::service {

struct ApiConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "edudss-data";
  double at_risk_threshold = 65.0;
  bool auto_retrain = false;
  std::string token;                   // empty disables authentication
  bool unseen_level_fallback = false;  // map unseen levels to the training mode
  gbdt::TrainConfig train;

  // Throws UsageError on a threshold outside [0, 100] or a bad port.
  void validate() const;
  // Overrides fields from EDUDSS_BIND, EDUDSS_PORT, EDUDSS_DATA_DIR,
  // EDUDSS_AT_RISK_THRESHOLD, EDUDSS_AUTO_RETRAIN and EDUDSS_TOKEN when set.
  void apply_environment();
};

// Error carried to HTTP clients as {code, message, details[]}.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, const std::string& message,
           nlohmann::json details = nlohmann::json::array())
      : std::runtime_error(message),
        status_(status),
        code_(std::move(code)),
        details_(std::move(details)) {}
  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }
  nlohmann::json to_json() const;

 private:
  int status_;
  std::string code_;
  nlohmann::json details_;
};

// Maps library exceptions onto API errors (400 data/usage, 404 unknown
// record, 409 conflict, 500 model/integrity/other).
ApiError to_api_error(const std::exception& error);

// Request-level operations of the service, independent of the transport.
// Every method takes and returns JSON documents; failures throw ApiError or
// a library error that to_api_error translates.
//
// Reads run against an immutable deployed version obtained by one atomic
// pointer load, so a response never mixes two versions. Store mutations are
// serialized; at most one retrain runs at a time.
class Engine {
 public:
  explicit Engine(ApiConfig config,
                  store::OpenMode mode = store::OpenMode::kWriter);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  nlohmann::json health() const;
  // Body: {"records": [...]}, a bare array, or one record object.
  nlohmann::json predict(const nlohmann::json& body) const;
  nlohmann::json feedback(const nlohmann::json& body);
  // Trains the first version. Body may be empty.
  nlohmann::json train(const nlohmann::json& body);
  // Body: {"force": bool}.
  nlohmann::json retrain(const nlohmann::json& body);
  nlohmann::json explain_id(std::string_view record_id) const;
  // Body: one record object.
  nlohmann::json explain_record(const nlohmann::json& body) const;
  nlohmann::json history() const;
  nlohmann::json current_model() const;
  nlohmann::json compare() const;
  nlohmann::json evaluate() const;

  // Blocks until a background retrain, if any, has finished.
  void wait_idle();

  std::shared_ptr<const store::ModelVersion> deployed() const;
  const ApiConfig& config() const noexcept { return config_; }
  const data::FeatureSchema& schema() const noexcept { return store_.schema(); }
  // Prefix for audit-log origins, e.g. "http" or "cli".
  void set_origin(std::string origin) { origin_ = std::move(origin); }

 private:
  std::shared_ptr<const store::ModelVersion> require_deployed() const;
  void deploy(std::shared_ptr<const store::ModelVersion> version);
  nlohmann::json run_retrain(bool force, const std::string& origin);
  nlohmann::json explain_with(const data::StudentRecord& record,
                              const store::ModelVersion& version) const;

  ApiConfig config_;
  std::string origin_ = "http";
  mutable std::mutex store_mutex_;
  store::DatasetStore store_;
  mutable std::mutex deploy_mutex_;
  std::shared_ptr<const store::ModelVersion> deployed_;
  std::atomic<bool> retrain_in_flight_{false};
  std::mutex worker_mutex_;
  std::thread worker_;
  nlohmann::json last_background_result_;
};

}  // namespace edudss::service
