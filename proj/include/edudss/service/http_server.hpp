#pragma once

#include <memory>
#include <string>

#include "edudss/service/engine.hpp"

namespace edudss::service {

// Routes under /v1:
//   GET  /health             liveness, deployed version or "untrained"
//   POST /predict            scores with version id and at-risk flags
//   POST /feedback           append a feedback batch
//   POST /train              train the first version
//   POST /retrain            refit and deploy; {"force": bool}
//   GET  /explain?record_id  SHAP explanation of a stored row
//   POST /explain            SHAP explanation of a posted record
//   GET  /metrics/history    metrics of every version
//   GET  /model/current      deployed version metadata
//   GET  /compare            latest version vs its parent on new feedback rows
// Every route but /health requires "Authorization: Bearer <token>" when the
// engine has a token configured.
class HttpServer {
 public:
  explicit HttpServer(Engine& engine);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws ServiceError.
  int bind(const std::string& host, int port);
  // Serves until stop(). Requires bind().
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace edudss::service
