#include "edudss/service/http_server.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <fstream>
#include <map>
#include <thread>

#include "datasets.hpp"
#include "edudss/data/record_json.hpp"
#include "edudss/data/synthetic.hpp"
#include "temp_dir.hpp"

namespace edudss::service {
namespace {

using nlohmann::json;
using testing::TempDir;

json fixture_document() {
  std::ifstream in(testing::feedback_fixture_path());
  return json::parse(in);
}

class HttpTest : public ::testing::Test {
 protected:
  void start(const std::string& token = "") {
    store::DatasetStore::initialize(dir_.path() / "s", data::generate_student_data(800, 4), 0.2,
                                    42);
    ApiConfig config;
    config.data_dir = dir_.path() / "s";
    config.token = token;
    config.train.num_rounds = 30;
    engine_ = std::make_unique<Engine>(config);
    server_ = std::make_unique<HttpServer>(*engine_);
    port_ = server_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_->listen(); });
    server_->wait_until_ready();
  }

  void TearDown() override {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
    server_.reset();
    engine_.reset();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(60, 0);
    return c;
  }

  json predict_body(std::size_t first, std::size_t n) const {
    auto store = store::DatasetStore::open(dir_.path() / "s", store::OpenMode::kReadOnly);
    json records = json::array();
    for (std::size_t i = first; i < first + n; ++i) {
      auto record = store.original().rows[i];
      record.target.reset();
      record.id = "p" + std::to_string(i);
      records.push_back(data::record_to_json(record, store.schema()));
    }
    return {{"records", records}};
  }

  TempDir dir_;
  std::unique_ptr<Engine> engine_;
  std::unique_ptr<HttpServer> server_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(HttpTest, EndToEndLoop) {
  start();
  auto c = client();
  auto res = c.Get("/v1/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["status"], "untrained");

  res = c.Post("/v1/predict", predict_body(0, 2).dump(), "application/json");
  EXPECT_EQ(res->status, 503);
  EXPECT_EQ(json::parse(res->body)["code"], "untrained");

  res = c.Post("/v1/train", "", "application/json");
  ASSERT_EQ(res->status, 200);
  res = c.Post("/v1/predict", predict_body(0, 3).dump(), "application/json");
  ASSERT_EQ(res->status, 200);
  const auto before = json::parse(res->body);
  EXPECT_EQ(before["version"], 1);
  EXPECT_EQ(before["predictions"].size(), 3u);

  res = c.Post("/v1/feedback", fixture_document().dump(), "application/json");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["accepted"], 5);

  res = c.Post("/v1/retrain", "{}", "application/json");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["version"], 2);

  res = c.Get("/v1/explain?record_id=row-3");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["version"], 2);
  res = c.Post("/v1/explain", predict_body(4, 1)["records"][0].dump(), "application/json");
  ASSERT_EQ(res->status, 200);

  res = c.Get("/v1/metrics/history");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["history"].size(), 2u);
  res = c.Get("/v1/model/current");
  EXPECT_EQ(json::parse(res->body)["version"], 2);
  res = c.Get("/v1/compare");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["students"].size(), 5u);
}

TEST_F(HttpTest, ErrorShapes) {
  start();
  auto c = client();
  c.Post("/v1/train", "", "application/json");
  auto res = c.Post("/v1/predict", "{not json", "application/json");
  EXPECT_EQ(res->status, 400);
  auto body = json::parse(res->body);
  EXPECT_EQ(body["code"], "invalid_json");
  EXPECT_TRUE(body["details"].is_array());

  res = c.Get("/v1/explain?record_id=ghost");
  EXPECT_EQ(res->status, 404);
  res = c.Get("/v1/explain");
  EXPECT_EQ(res->status, 400);
  res = c.Get("/v1/no-such-route");
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(json::parse(res->body)["code"], "not_found");
  res = c.Post("/v1/retrain", "{}", "application/json");
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(json::parse(res->body)["code"], "conflict");
}

TEST_F(HttpTest, BearerTokenGuardsEverythingButHealth) {
  start("s3cret");
  auto c = client();
  EXPECT_EQ(c.Get("/v1/health")->status, 200);
  auto res = c.Post("/v1/train", "", "application/json");
  EXPECT_EQ(res->status, 401);
  EXPECT_EQ(json::parse(res->body)["code"], "unauthorized");
  c.set_bearer_token_auth("wrong");
  EXPECT_EQ(c.Post("/v1/train", "", "application/json")->status, 401);
  c.set_bearer_token_auth("s3cret");
  EXPECT_EQ(c.Post("/v1/train", "", "application/json")->status, 200);
}

TEST_F(HttpTest, ConcurrentPredictionsNeverMixVersions) {
  start();
  auto c = client();
  ASSERT_EQ(c.Post("/v1/train", "", "application/json")->status, 200);
  const auto body = predict_body(0, 40).dump();

  // Reference answers per version, taken while the service is quiescent.
  std::map<int, json> expected;
  expected[1] = json::parse(c.Post("/v1/predict", body, "application/json")->body);

  std::atomic<bool> stop{false};
  std::atomic<int> torn{0};
  std::atomic<int> seen{0};
  std::vector<json> responses;
  std::mutex responses_mutex;
  std::vector<std::thread> readers;
  for (int t = 0; t < 3; ++t) {
    readers.emplace_back([&] {
      auto rc = client();
      while (!stop.load()) {
        auto res = rc.Post("/v1/predict", body, "application/json");
        if (!res || res->status != 200) {
          ++torn;
          continue;
        }
        std::lock_guard lock(responses_mutex);
        responses.push_back(json::parse(res->body));
        ++seen;
      }
    });
  }
  ASSERT_EQ(c.Post("/v1/feedback", fixture_document().dump(), "application/json")->status, 200);
  ASSERT_EQ(c.Post("/v1/retrain", "{}", "application/json")->status, 200);
  // Keep reading until responses after the swap have also been collected.
  const int target = seen.load() + 20;
  while (seen.load() < target) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  stop = true;
  for (auto& t : readers) t.join();
  expected[2] = json::parse(c.Post("/v1/predict", body, "application/json")->body);

  EXPECT_EQ(torn.load(), 0);
  int newer = 0;
  for (const auto& response : responses) newer += response["version"] == 2 ? 1 : 0;
  EXPECT_GE(newer, 20);
  for (const auto& response : responses) {
    const int version = response["version"].get<int>();
    ASSERT_TRUE(expected.count(version)) << "unknown version " << version;
    EXPECT_EQ(response["predictions"], expected[version]["predictions"]);
  }
}

}  // namespace
}  // namespace edudss::service
