// Acceptance run: one PASS/FAIL line per headline criterion. Exits non-zero
// when any criterion fails. Uses the public student-performance CSV when it
// is available and the seeded surrogate otherwise; the first line says which.

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "datasets.hpp"
#include "edudss/common/rng.hpp"
#include "edudss/data/csv.hpp"
#include "edudss/data/preprocess.hpp"
#include "edudss/data/record_json.hpp"
#include "edudss/evaluate/metrics.hpp"
#include "edudss/explain/tree_shap.hpp"
#include "edudss/gbdt/booster.hpp"
#include "edudss/gbdt/model_io.hpp"
#include "edudss/loop/feedback_loop.hpp"
#include "edudss/service/http_server.hpp"
#include "edudss/store/dataset_store.hpp"
#include "oracles.hpp"
#include "process.hpp"
#include "temp_dir.hpp"

namespace {

using namespace edudss;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

// Shared fixture: the reference data split, preprocessed and fitted once
// with the default configuration.
struct Reference {
  testing::ReferenceData data;
  data::Dataset train;
  data::Dataset test;
  data::PreprocessorState state;
  data::TransformedData train_x;
  data::TransformedData test_x;
  gbdt::GBDTModel model;
  double fit_seconds = 0.0;
};

const Reference& reference() {
  static const Reference ref = [] {
    Reference r;
    r.data = testing::reference_student_data();
    testing::TempDir dir("edudss-accept");
    auto store = store::DatasetStore::initialize(dir / "store", r.data.dataset, 0.2, 42);
    r.train = store.training_set();
    r.test = store.test_set();
    const auto start = Clock::now();
    r.state = data::fit_preprocessor(r.train);
    r.train_x = data::transform_dataset(r.train, r.state);
    r.test_x = data::transform_dataset(r.test, r.state);
    r.model = gbdt::train(r.train_x.features, r.train_x.targets, gbdt::TrainConfig{},
                          r.state.feature_names());
    r.fit_seconds = seconds_since(start);
    return r;
  }();
  return ref;
}

Outcome metric_oracle_equivalence() {
  const auto start = Clock::now();
  Rng rng(1);
  double worst = 0.0;
  for (int pair = 0; pair < 1000; ++pair) {
    const std::size_t n = 2 + rng.uniform_below(200);
    std::vector<double> y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = 1.0 + rng.uniform01() * 99.0;
      p[i] = y[i] + rng.normal(0.0, 1.0 + rng.uniform01() * 5.0);
    }
    namespace oracle = testing::metric_oracle;
    const std::pair<double, double> values[] = {
        {evaluate::rmse(y, p), oracle::rmse(y, p)},
        {evaluate::mae(y, p), oracle::mae(y, p)},
        {evaluate::r2(y, p), oracle::r2(y, p)},
        {evaluate::mape(y, p), oracle::mape(y, p)},
        {evaluate::explained_variance(y, p), oracle::explained_variance(y, p)},
    };
    for (const auto& [got, want] : values) {
      const double rel = std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
      worst = std::max(worst, want == 0.0 ? std::fabs(got) : rel);
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-9 && elapsed < 5.0,
          fmt("worst relative error %.2e over 1000 pairs, %.2f s", worst, elapsed)};
}

Outcome shap_local_accuracy() {
  const auto& ref = reference();
  const auto start = Clock::now();
  const std::size_t rows = std::min<std::size_t>(200, ref.test_x.features.rows());
  double worst = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto x = ref.test_x.features.row(r);
    const auto e = explain::explain(ref.model, x);
    double sum = e.base_value;
    for (const double phi : e.contributions) sum += phi;
    worst = std::max(worst, std::fabs(sum - ref.model.predict(x)));
  }
  const double elapsed = seconds_since(start);
  return {rows == 200 && worst < 1e-6 && elapsed < 30.0,
          fmt("%zu rows, max |base + sum(phi) - prediction| = %.2e, %.2f s", rows, worst,
              elapsed)};
}

Outcome shap_oracle_equivalence() {
  Rng rng(99);
  double worst = 0.0;
  int trees = 0;
  // A hand-written stump plus random complete trees over 1..4 features.
  std::vector<gbdt::RegressionTree> cases;
  {
    gbdt::RegressionTree stump;
    const auto [l, r] = stump.split_leaf(0, 1, 0.25);
    stump.set_leaf(l, -3.0, 5.0);
    stump.set_leaf(r, 4.0, 2.0);
    stump.recompute_internal_covers();
    cases.push_back(stump);
  }
  for (std::size_t d = 1; d <= 4; ++d) {
    for (int depth = 1; depth <= 4; ++depth) cases.push_back(testing::random_tree(d, depth, rng));
  }
  for (const auto& tree : cases) {
    ++trees;
    const auto d =
        std::max<std::size_t>(2, static_cast<std::size_t>(tree.max_feature_index() + 1));
    for (int input = 0; input < 20; ++input) {
      std::vector<double> x(d);
      for (auto& v : x) v = rng.uniform01() * 2.4 - 1.2;
      std::vector<double> phi(d, 0.0);
      explain::tree_shap(tree, x, phi);
      const auto oracle = testing::brute_force_shapley(tree, x);
      for (std::size_t j = 0; j < d; ++j) worst = std::max(worst, std::fabs(phi[j] - oracle[j]));
    }
  }
  return {worst < 1e-9, fmt("%d trees x 20 inputs, max |phi - oracle| = %.2e", trees, worst)};
}

Outcome boosting_monotonicity() {
  int violations = 0;
  double worst_step = -std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto data = testing::random_regression(1000, 10, seed * 101);
    const auto model = gbdt::train(data.features, data.targets, gbdt::TrainConfig{});
    for (std::size_t k = 1; k < model.train_rmse.size(); ++k) {
      const double step = model.train_rmse[k] - model.train_rmse[k - 1];
      worst_step = std::max(worst_step, step);
      if (step > 0.0) ++violations;
    }
  }
  return {violations == 0,
          fmt("10 datasets x 100 rounds, %d increases, largest step %+.3e", violations,
              worst_step)};
}

Outcome efb_losslessness() {
  const auto data = testing::one_hot_blocks(2000, 20, 5, 77);
  gbdt::TrainConfig bundled;
  bundled.max_conflicts = 0;
  gbdt::TrainConfig plain = bundled;
  plain.efb_enabled = false;
  const auto a = gbdt::train(data.features, data.targets, bundled);
  const auto b = gbdt::train(data.features, data.targets, plain);
  const bool same_trees = a.trees == b.trees && a.base_score == b.base_score;
  const bool same_predictions = a.predict_batch(data.features) == b.predict_batch(data.features);
  std::size_t leaves = 0;
  for (const auto& t : a.trees) leaves += t.num_leaves();
  return {same_trees && same_predictions,
          fmt("20 one-hot blocks (100 columns), %zu trees / %zu leaves: trees %s, predictions %s",
              a.trees.size(), leaves, same_trees ? "identical" : "DIFFER",
              same_predictions ? "identical" : "DIFFER")};
}

Outcome goss_fidelity() {
  const auto& ref = reference();
  const auto full =
      evaluate::rmse(ref.test_x.targets, ref.model.predict_batch(ref.test_x.features));
  double total = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    gbdt::TrainConfig config;
    config.goss = gbdt::GossConfig{0.2, 0.1};
    config.seed = seed;
    const auto model = gbdt::train(ref.train_x.features, ref.train_x.targets, config);
    const double rmse = evaluate::rmse(ref.test_x.targets, model.predict_batch(ref.test_x.features));
    const double rel = std::fabs(rmse - full) / full;
    total += rel;
    per_seed += fmt(" %.4f", rmse);
  }
  const double mean = total / 5.0;
  return {mean < 0.05, fmt("full %.4f, GOSS%s, mean relative gap %.4f", full, per_seed.c_str(),
                           mean)};
}

Outcome headline_ballpark() {
  const auto& ref = reference();
  const auto start = Clock::now();
  const auto report =
      evaluate::compute_report(ref.test_x.targets, ref.model.predict_batch(ref.test_x.features),
                               "Initial");
  const double elapsed = ref.fit_seconds + seconds_since(start);
  const bool ok = report.rmse >= 1.5 && report.rmse <= 2.6 && report.r2 >= 0.6 &&
                  report.r2 <= 0.85 && elapsed < 60.0;
  return {ok, fmt("test RMSE %.4f (want [1.5, 2.6]), R2 %.4f (want [0.6, 0.85]), n=%zu, %.2f s",
                  report.rmse, report.r2, report.n, elapsed)};
}

json fixture() {
  std::ifstream in(testing::feedback_fixture_path());
  return json::parse(in);
}

Outcome closed_loop_direction() {
  const auto& ref = reference();
  testing::TempDir dir("edudss-accept");
  auto store = store::DatasetStore::initialize(dir / "store", ref.data.dataset, 0.2, 42);
  loop::train_initial(store, gbdt::TrainConfig{});
  loop::submit_feedback(store, loop::FeedbackBatch::from_json(fixture(), store.schema()));
  const auto report = loop::retrain(store, gbdt::TrainConfig{}, false);
  bool all_up = report.students.size() == 5;
  std::string diffs;
  for (const auto& s : report.students) {
    all_up = all_up && s.post_retrain_score > s.initial_score;
    diffs += fmt(" %s%+.2f", s.id.c_str(), s.diff);
  }
  const double rel = (report.after.rmse - report.before.rmse) / report.before.rmse;
  return {all_up && rel <= 0.02,
          fmt("diffs%s; test RMSE %.4f -> %.4f (%+.2f%%)", diffs.c_str(), report.before.rmse,
              report.after.rmse, 100.0 * rel)};
}

Outcome determinism_round_trip() {
  const auto& ref = reference();
  std::vector<std::string> models;
  for (int run = 0; run < 2; ++run) {
    testing::TempDir dir("edudss-accept");
    auto store = store::DatasetStore::initialize(dir / "store", ref.data.dataset, 0.2, 42);
    loop::train_initial(store, gbdt::TrainConfig{});
    loop::submit_feedback(store, loop::FeedbackBatch::from_json(fixture(), store.schema()));
    loop::retrain(store, gbdt::TrainConfig{}, false);
    models.push_back(gbdt::serialize_model(store.get_version(2).model));
  }
  const bool same_bytes = models[0] == models[1];

  const auto restored = gbdt::deserialize_model(gbdt::serialize_model(ref.model));
  Rng rng(5);
  int mismatches = 0;
  std::vector<double> x(ref.model.num_features());
  for (int i = 0; i < 1000; ++i) {
    for (auto& v : x) v = rng.normal(0.0, 1.5);
    const double a = ref.model.predict(x);
    const double b = restored.predict(x);
    if (std::memcmp(&a, &b, sizeof a) != 0) ++mismatches;
  }
  return {same_bytes && mismatches == 0,
          fmt("retrain twice: %s (%zu bytes); round-trip: %d of 1000 predictions differ",
              same_bytes ? "byte-identical" : "DIFFERENT", models[0].size(), mismatches)};
}

// Drops wall-clock fields so documents from separate runs compare equal.
void strip_clock(json& doc) {
  if (doc.is_object()) {
    for (const char* key : {"timestamp", "created_at"}) doc.erase(key);
    for (auto& [key, value] : doc.items()) strip_clock(value);
  } else if (doc.is_array()) {
    for (auto& value : doc) strip_clock(value);
  }
}

Outcome service_contract() {
  const auto& ref = reference();
  testing::TempDir dir("edudss-accept");
  const auto feedback_doc = fixture();

  json query = json::array();
  for (std::size_t i = 0; i < 25; ++i) {
    auto record = ref.test.rows[i];
    record.target.reset();
    query.push_back(data::record_to_json(record, ref.data.dataset.schema));
  }
  const json query_body = {{"records", query}};

  // Library run.
  std::map<std::string, json> lib;
  {
    auto store = store::DatasetStore::initialize(dir / "lib", ref.data.dataset, 0.2, 42);
    const auto v1 = loop::train_initial(store, gbdt::TrainConfig{});
    lib["train"] = v1.metrics.to_json();
    json scores = json::array();
    for (const auto& record : query) {
      const auto parsed = data::record_from_json(record, store.schema(), false);
      scores.push_back(v1.model.predict(data::transform(parsed, v1.preprocessor).values));
    }
    lib["predict"] = scores;
    lib["feedback"] = loop::to_json(
        loop::submit_feedback(store, loop::FeedbackBatch::from_json(feedback_doc, store.schema())));
    lib["retrain"] = loop::to_json(loop::retrain(store, gbdt::TrainConfig{}, false));
    lib["compare"] = loop::to_json(loop::compare_latest(store));
    lib["history"] =
        loop::history_to_json(loop::evaluation_history(store), store.list_versions());
  }

  // CLI run.
  std::map<std::string, json> cli;
  bool cli_ok = true;
  {
    const auto csv_path = dir / "reference.csv";
    std::ofstream(csv_path) << data::to_csv(ref.data.dataset);
    std::ofstream(dir / "query.json") << query_body.dump();
    std::ofstream(dir / "feedback.json") << feedback_doc.dump();
    const auto base = std::string(EDUDSS_CLI_PATH) + " --json --data-dir " +
                      testing::shell_quote((dir / "cli").string()) + " ";
    const auto run = [&](const std::string& args) {
      const auto result = testing::run_command(base + args + " 2>&1");
      if (result.exit_code != 0) {
        cli_ok = false;
        std::cerr << "cli " << args << " failed: " << result.out << "\n";
        return json();
      }
      return json::parse(result.out);
    };
    run("ingest " + testing::shell_quote(csv_path.string()));
    cli["train"] = run("train")["metrics"];
    cli["predict"] = json::array();
    const auto predicted = run("predict " + testing::shell_quote((dir / "query.json").string()));
    for (const auto& p : predicted["predictions"]) cli["predict"].push_back(p["score"]);
    cli["feedback"] = run("feedback " + testing::shell_quote((dir / "feedback.json").string()));
    cli["feedback"].erase("retrain_triggered");
    cli["retrain"] = run("retrain");
    cli["compare"] = run("compare")["students"];
    cli["history"] = run("history")["history"];
  }

  // HTTP run, with readers hammering /v1/predict during the retrain.
  std::map<std::string, json> http;
  int torn = 0;
  int responses_seen = 0;
  bool http_ok = true;
  {
    store::DatasetStore::initialize(dir / "http", ref.data.dataset, 0.2, 42);
    service::ApiConfig config;
    config.data_dir = dir / "http";
    service::Engine engine(config);
    service::HttpServer server(engine);
    const int port = server.bind("127.0.0.1", 0);
    std::thread serving([&] { server.listen(); });
    server.wait_until_ready();
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(300, 0);
    const auto call = [&](const char* method, const std::string& path, const json& body) {
      auto res = std::string(method) == "GET"
                     ? client.Get(path)
                     : client.Post(path, body.is_null() ? "" : body.dump(), "application/json");
      if (!res || res->status != 200) {
        http_ok = false;
        std::cerr << "http " << path << " failed"
                  << (res ? ": " + std::to_string(res->status) + " " + res->body : "") << "\n";
        return json();
      }
      return json::parse(res->body);
    };
    http["train"] = call("POST", "/v1/train", nullptr)["metrics"];
    const auto v1_predict = call("POST", "/v1/predict", query_body);
    http["predict"] = json::array();
    for (const auto& p : v1_predict["predictions"]) http["predict"].push_back(p["score"]);
    http["feedback"] = call("POST", "/v1/feedback", feedback_doc);
    http["feedback"].erase("retrain_triggered");

    std::atomic<bool> stop{false};
    std::mutex mutex;
    std::vector<json> observed;
    std::vector<std::thread> readers;
    for (int t = 0; t < 3; ++t) {
      readers.emplace_back([&] {
        httplib::Client reader("127.0.0.1", port);
        reader.set_read_timeout(60, 0);
        while (!stop.load()) {
          auto res = reader.Post("/v1/predict", query_body.dump(), "application/json");
          std::lock_guard lock(mutex);
          if (!res || res->status != 200) {
            ++torn;
            continue;
          }
          observed.push_back(json::parse(res->body));
        }
      });
    }
    http["retrain"] = call("POST", "/v1/retrain", json::object());
    stop = true;
    for (auto& t : readers) t.join();
    const auto v2_predict = call("POST", "/v1/predict", query_body);
    http["compare"] = call("GET", "/v1/compare", nullptr)["students"];
    http["history"] = call("GET", "/v1/metrics/history", nullptr)["history"];
    server.stop();
    serving.join();

    // Every response must equal the full answer of exactly one version.
    for (const auto& response : observed) {
      ++responses_seen;
      const auto version = response["version"];
      const auto& expected = version == 1 ? v1_predict : v2_predict;
      if ((version != 1 && version != 2) || response["predictions"] != expected["predictions"]) {
        ++torn;
      }
    }
  }

  std::vector<std::string> mismatched;
  for (auto& [key, value] : lib) {
    strip_clock(value);
    strip_clock(cli[key]);
    strip_clock(http[key]);
    if (value != cli[key] || value != http[key]) {
      mismatched.push_back(key);
      std::cerr << key << "\n  library " << value.dump().substr(0, 300) << "\n  cli     "
                << cli[key].dump().substr(0, 300) << "\n  http    "
                << http[key].dump().substr(0, 300) << "\n";
    }
  }
  std::string detail = "train/predict/feedback/retrain/compare/history ";
  if (mismatched.empty()) {
    detail += "identical across HTTP, CLI and library";
  } else {
    detail += "differ on:";
    for (const auto& key : mismatched) detail += " " + key;
  }
  detail += fmt("; %d concurrent predicts during retrain, %d torn", responses_seen, torn);
  return {cli_ok && http_ok && mismatched.empty() && torn == 0, detail};
}

Outcome driver_check() {
  const auto& ref = reference();
  const auto importance = explain::global_importance(ref.model, ref.train_x.features);
  const auto top = importance.top(5);
  const std::set<std::string> drivers = {"Attendance", "Hours_Studied", "Previous_Scores",
                                         "Tutoring_Sessions"};
  int hits = 0;
  std::string listed;
  for (const auto& name : top) {
    hits += drivers.count(name) ? 1 : 0;
    listed += (listed.empty() ? "" : ", ") + name;
  }
  return {hits >= 2, fmt("top five: %s (%d known drivers)", listed.c_str(), hits)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"metric oracle equivalence", metric_oracle_equivalence},
      {"SHAP local accuracy", shap_local_accuracy},
      {"SHAP oracle equivalence", shap_oracle_equivalence},
      {"boosting monotonicity", boosting_monotonicity},
      {"EFB losslessness", efb_losslessness},
      {"GOSS fidelity", goss_fidelity},
      {"headline ballpark", headline_ballpark},
      {"closed-loop direction", closed_loop_direction},
      {"determinism and round-trip", determinism_round_trip},
      {"service contract", service_contract},
      {"driver check", driver_check},
  };
  std::cout << "data source: " << reference().data.source << " ("
            << reference().data.dataset.size() << " rows)\n";
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += outcome.pass ? 0 : 1;
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << ": " << outcome.detail << "\n"
              << std::flush;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << "\n";
  return failures == 0 ? 0 : 1;
}
