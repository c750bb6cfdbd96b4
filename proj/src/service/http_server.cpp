#include "edudss/service/http_server.hpp"

#include <httplib.h>

#include "edudss/common/error.hpp"

namespace edudss::service {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req, bool allow_empty) {
  if (req.body.empty()) {
    if (allow_empty) return json::object();
    throw ApiError(400, "invalid_request", "request body is empty");
  }
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw ApiError(400, "invalid_json", "request body is not valid JSON",
                   json::array({e.what()}));
  }
}

}  // namespace

struct HttpServer::Impl {
  Engine& engine;
  httplib::Server server;

  explicit Impl(Engine& e) : engine(e) {}

  using Handler = std::function<json(const httplib::Request&)>;

  httplib::Server::Handler wrap(Handler handler, int success_status = 200) {
    return [this, handler = std::move(handler), success_status](const httplib::Request& req,
                                                                httplib::Response& res) {
      try {
        send_json(res, success_status, handler(req));
      } catch (const std::exception& e) {
        const auto error = to_api_error(e);
        send_json(res, error.status(), error.to_json());
      }
    };
  }

  bool authorized(const httplib::Request& req) const {
    const auto& token = engine.config().token;
    if (token.empty() || req.path == "/v1/health") return true;
    return req.get_header_value("Authorization") == "Bearer " + token;
  }

  void install_routes() {
    server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (authorized(req)) return httplib::Server::HandlerResponse::Unhandled;
      send_json(res, 401,
                ApiError(401, "unauthorized", "missing or invalid bearer token").to_json());
      return httplib::Server::HandlerResponse::Handled;
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        send_json(res, res.status,
                  ApiError(res.status, res.status == 404 ? "not_found" : "http_error",
                           "no such route")
                      .to_json());
      }
    });

    server.Get("/v1/health", wrap([this](const auto&) { return engine.health(); }));
    server.Post("/v1/predict",
                wrap([this](const auto& req) { return engine.predict(parse_body(req, false)); }));
    server.Post("/v1/feedback",
                wrap([this](const auto& req) { return engine.feedback(parse_body(req, false)); }));
    server.Post("/v1/train",
                wrap([this](const auto& req) { return engine.train(parse_body(req, true)); }));
    server.Post("/v1/retrain",
                wrap([this](const auto& req) { return engine.retrain(parse_body(req, true)); }));
    server.Get("/v1/explain", wrap([this](const httplib::Request& req) {
                 if (!req.has_param("record_id")) {
                   throw ApiError(400, "invalid_request", "query parameter record_id is required");
                 }
                 return engine.explain_id(req.get_param_value("record_id"));
               }));
    server.Post("/v1/explain", wrap([this](const auto& req) {
                  return engine.explain_record(parse_body(req, false));
                }));
    server.Get("/v1/metrics/history", wrap([this](const auto&) { return engine.history(); }));
    server.Get("/v1/model/current", wrap([this](const auto&) { return engine.current_model(); }));
    server.Get("/v1/compare", wrap([this](const auto&) { return engine.compare(); }));
  }
};

HttpServer::HttpServer(Engine& engine) : impl_(std::make_unique<Impl>(engine)) {
  impl_->install_routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw ServiceError("could not bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw ServiceError("could not bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() {
  if (!impl_->server.listen_after_bind()) throw ServiceError("server stopped with an error");
}

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace edudss::service
