// Operator command line: ingest, train, evaluate, predict, feedback, retrain,
// compare, explain, history, serve. Each subcommand is a thin shell over the
// library; with --json it prints the same documents the HTTP API returns.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "edudss/common/checksum.hpp"
#include "edudss/common/error.hpp"
#include "edudss/data/csv.hpp"
#include "edudss/data/record_json.hpp"
#include "edudss/data/schema.hpp"
#include "edudss/data/split.hpp"
#include "edudss/explain/chart.hpp"
#include "edudss/service/config_file.hpp"
#include "edudss/service/engine.hpp"
#include "edudss/service/http_server.hpp"
#include "edudss/store/dataset_store.hpp"

namespace {

using nlohmann::json;
using namespace edudss;

struct GlobalOptions {
  std::string data_dir;
  std::string config_path;
  bool json_output = false;
};

service::ApiConfig load_config(const GlobalOptions& global) {
  service::ApiConfig config;
  config.apply_environment();
  if (!global.config_path.empty()) service::apply_config_file(global.config_path, config);
  if (!global.data_dir.empty()) config.data_dir = global.data_dir;
  config.validate();
  return config;
}

std::unique_ptr<service::Engine> open_engine(const GlobalOptions& global, store::OpenMode mode) {
  auto engine = std::make_unique<service::Engine>(load_config(global), mode);
  engine->set_origin("cli");
  return engine;
}

std::string fixed(double value, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
  return buffer;
}

std::string pad(std::string text, std::size_t width) {
  if (text.size() < width) text.resize(width, ' ');
  return text;
}

void print_metrics_table(const json& rows) {
  std::cout << pad("Version", 9) << pad("Phase", 11) << pad("RMSE", 9) << pad("MAE", 9)
            << pad("R2", 9) << pad("MAPE(%)", 9) << pad("Expl.Var", 10) << "N\n";
  for (const auto& row : rows) {
    const auto version = row.contains("version") ? std::to_string(row["version"].get<int>()) : "-";
    std::cout << pad(version, 9) << pad(row["phase"].get<std::string>(), 11)
              << pad(fixed(row["rmse"], 3), 9) << pad(fixed(row["mae"], 3), 9)
              << pad(fixed(row["r2"], 3), 9) << pad(fixed(row["mape_percent"], 3), 9)
              << pad(fixed(row["explained_variance"], 3), 10) << row["n"].get<std::size_t>()
              << "\n";
  }
}

void print_comparison_table(const json& students) {
  std::cout << pad("Student", 14) << pad("Initial", 10) << pad("Retrained", 11) << pad("Diff", 9)
            << "Trend\n";
  for (const auto& row : students) {
    const double diff = row["diff"];
    std::cout << pad(row["id"].get<std::string>(), 14) << pad(fixed(row["initial_score"], 2), 10)
              << pad(fixed(row["post_retrain_score"], 2), 11)
              << pad((diff >= 0 ? "+" : "") + fixed(diff, 2), 9) << row["trend"].get<std::string>()
              << "\n";
  }
}

void emit(const GlobalOptions& global, const json& document,
          const std::function<void(const json&)>& human) {
  if (global.json_output) {
    std::cout << document.dump(2) << "\n";
  } else {
    human(document);
  }
}

json read_json_file(const std::string& path) {
  const auto text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": not valid JSON (" + e.what() + ")");
  }
}

bool looks_like_json(const std::string& path) {
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

// --- subcommands -----------------------------------------------------------

struct IngestOptions {
  std::string csv_path;
  std::string schema_path;
  bool clamp_targets = false;
  double test_fraction = data::kDefaultTestFraction;
  std::uint64_t split_seed = data::kDefaultSplitSeed;
};

int run_ingest(const GlobalOptions& global, const IngestOptions& options) {
  const auto config = load_config(global);
  const auto schema = options.schema_path.empty() ? data::FeatureSchema::student_default()
                                                  : data::FeatureSchema::load(options.schema_path);
  data::CsvOptions csv;
  if (options.clamp_targets) csv.out_of_range = data::OutOfRangeTarget::kClamp;
  const auto dataset = data::load_csv(options.csv_path, schema, csv);
  const auto store = store::DatasetStore::initialize(config.data_dir, dataset,
                                                     options.test_fraction, options.split_seed);
  const json out = {{"data_dir", config.data_dir.string()},
                    {"rows", store.original().size()},
                    {"train_rows", store.train_indices().size()},
                    {"test_rows", store.test_indices().size()}};
  emit(global, out, [](const json& d) {
    std::cout << "ingested " << d["rows"] << " rows into " << d["data_dir"].get<std::string>()
              << " (" << d["train_rows"] << " train, " << d["test_rows"] << " frozen test)\n";
  });
  return 0;
}

int run_train(const GlobalOptions& global) {
  auto engine = open_engine(global, store::OpenMode::kWriter);
  const auto out = engine->train(json::object());
  emit(global, out, [](const json& d) {
    std::cout << "trained version " << d["version"] << " on " << d["fit_rows"] << " rows\n";
    auto row = d["metrics"];
    row["version"] = d["version"];
    print_metrics_table(json::array({row}));
  });
  return 0;
}

int run_evaluate(const GlobalOptions& global) {
  auto engine = open_engine(global, store::OpenMode::kReadOnly);
  emit(global, engine->evaluate(), [](const json& d) { print_metrics_table(json::array({d})); });
  return 0;
}

int run_history(const GlobalOptions& global) {
  auto engine = open_engine(global, store::OpenMode::kReadOnly);
  emit(global, engine->history(), [](const json& d) { print_metrics_table(d["history"]); });
  return 0;
}

int run_predict(const GlobalOptions& global, const std::string& input) {
  auto engine = open_engine(global, store::OpenMode::kReadOnly);
  json body;
  if (looks_like_json(input)) {
    body = read_json_file(input);
  } else {
    data::CsvOptions csv;
    csv.target = data::TargetColumn::kOptional;
    const auto dataset = data::load_csv(input, engine->schema(), csv);
    body = json::array();
    for (const auto& row : dataset.rows) body.push_back(data::record_to_json(row, dataset.schema));
  }
  emit(global, engine->predict(body), [](const json& d) {
    std::cout << "version " << d["version"] << ", at-risk threshold " << fixed(d["threshold"], 1)
              << "\n"
              << pad("Student", 14) << pad("Score", 9) << "At risk\n";
    for (const auto& p : d["predictions"]) {
      std::cout << pad(p["id"].get<std::string>(), 14) << pad(fixed(p["score"], 2), 9)
                << (p["at_risk"].get<bool>() ? "yes" : "no") << "\n";
    }
  });
  return 0;
}

int run_feedback(const GlobalOptions& global, const std::string& path) {
  auto engine = open_engine(global, store::OpenMode::kWriter);
  const auto out = engine->feedback(read_json_file(path));
  engine->wait_idle();
  emit(global, out, [](const json& d) {
    std::cout << "accepted " << d["accepted"] << " feedback rows; store now holds "
              << d["store_size"] << " rows"
              << (d["retrain_triggered"].get<bool>() ? " (retrain triggered)" : "") << "\n";
  });
  return 0;
}

int run_retrain(const GlobalOptions& global, bool force) {
  auto engine = open_engine(global, store::OpenMode::kWriter);
  emit(global, engine->retrain({{"force", force}}), [](const json& d) {
    std::cout << "version " << d["parent_version"] << " -> " << d["version"] << " ("
              << d["new_rows"] << " new rows, trained on " << d["trained_on_count"] << ")\n";
    auto before = d["before"];
    auto after = d["after"];
    before["version"] = d["parent_version"];
    after["version"] = d["version"];
    print_metrics_table(json::array({before, after}));
    if (!d["students"].empty()) {
      std::cout << "\n";
      print_comparison_table(d["students"]);
    }
  });
  return 0;
}

int run_compare(const GlobalOptions& global) {
  auto engine = open_engine(global, store::OpenMode::kReadOnly);
  emit(global, engine->compare(), [](const json& d) {
    std::cout << "version " << d["parent_version"] << " vs " << d["version"] << "\n";
    print_comparison_table(d["students"]);
  });
  return 0;
}

int run_explain(const GlobalOptions& global, const std::string& record, std::size_t top,
                const std::string& svg_path) {
  auto engine = open_engine(global, store::OpenMode::kReadOnly);
  const auto out = looks_like_json(record) ? engine->explain_record(read_json_file(record))
                                           : engine->explain_id(record);
  if (!svg_path.empty()) {
    std::ofstream svg(svg_path);
    svg << explain::render_svg_chart(out["contributions"], out["base_value"], out["prediction"],
                                     top);
    if (!svg) throw DataError("cannot write " + svg_path);
  }
  emit(global, out, [top](const json& d) {
    std::cout << "record " << d["id"].get<std::string>() << " (version " << d["version"] << ")\n"
              << explain::render_text_chart(d["contributions"], d["base_value"], d["prediction"],
                                            top);
  });
  return 0;
}

int run_serve(const GlobalOptions& global, std::optional<std::string> bind,
              std::optional<int> port, std::optional<double> threshold, bool auto_retrain) {
  auto config = load_config(global);
  if (bind) config.host = *bind;
  if (port) config.port = *port;
  if (threshold) config.at_risk_threshold = *threshold;
  if (auto_retrain) config.auto_retrain = true;
  config.validate();

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::Engine engine(config, store::OpenMode::kWriter);
  service::HttpServer server(engine);
  const int bound = server.bind(config.host, config.port);
  std::cerr << "listening on http://" << config.host << ":" << bound << "/v1"
            << (config.token.empty() ? " (no token configured)" : "") << "\n";

  std::thread waiter([&server, signals] {
    int received = 0;
    sigwait(&signals, &received);
    server.stop();
  });
  server.listen();
  // listen() returns after stop(); wake the waiter if it is still blocked.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  engine.wait_idle();
  return 0;
}

int exit_code_for_api(const service::ApiError& error) {
  switch (error.status()) {
    case 400:
    case 404:
      return exit_code_for(ErrorKind::kData);
    case 409:
    case 401:
    case 503:
      return exit_code_for(ErrorKind::kService);
    default:
      return error.code() == "integrity_error" ? exit_code_for(ErrorKind::kIntegrity)
                                               : exit_code_for(ErrorKind::kModel);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Student exam-score decision support: predict, explain, absorb feedback, retrain"};
  app.require_subcommand(1);
  // Global flags may also follow the subcommand.
  app.fallthrough();
  GlobalOptions global;
  app.add_option("--data-dir", global.data_dir,
                 "Store directory (default: $EDUDSS_DATA_DIR or ./edudss-data)");
  app.add_option("--config", global.config_path, "Key-value config file")->check(CLI::ExistingFile);
  app.add_flag("--json", global.json_output, "Print machine-readable JSON");

  IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Load a CSV and create the store");
  ingest_cmd->add_option("csv", ingest.csv_path, "Input CSV")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--schema", ingest.schema_path, "Schema file (default: built-in layout)")
      ->check(CLI::ExistingFile);
  ingest_cmd->add_flag("--clamp-targets", ingest.clamp_targets,
                       "Clamp out-of-range Exam_Score values into [0, 100]");
  ingest_cmd->add_option("--test-fraction", ingest.test_fraction, "Held-out share")
      ->capture_default_str();
  ingest_cmd->add_option("--split-seed", ingest.split_seed, "Split seed")->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "Train the initial model version");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score the deployed version on the test set");
  auto* history_cmd = app.add_subcommand("history", "Metrics of every version");

  std::string predict_input;
  auto* predict_cmd = app.add_subcommand("predict", "Predict scores for a CSV or JSON file");
  predict_cmd->add_option("input", predict_input, "Records (.csv or .json)")
      ->required()
      ->check(CLI::ExistingFile);

  std::string feedback_path;
  auto* feedback_cmd = app.add_subcommand("feedback", "Append a feedback batch (JSON)");
  feedback_cmd->add_option("batch", feedback_path, "Feedback batch file")
      ->required()
      ->check(CLI::ExistingFile);

  bool force = false;
  auto* retrain_cmd = app.add_subcommand("retrain", "Refit on original + feedback rows");
  retrain_cmd->add_flag("--force", force, "Retrain even without new feedback");

  auto* compare_cmd =
      app.add_subcommand("compare", "Latest version vs its parent on the new feedback rows");

  std::string explain_target;
  std::size_t explain_top = 0;
  std::string svg_path;
  auto* explain_cmd = app.add_subcommand("explain", "SHAP explanation of one record");
  explain_cmd->add_option("record", explain_target, "Record id (row-12, fb-1-0, S1) or .json file")
      ->required();
  explain_cmd->add_option("--top", explain_top, "Show only the top N features");
  explain_cmd->add_option("--svg", svg_path, "Also write an SVG bar chart");

  std::optional<std::string> bind;
  std::optional<int> port;
  std::optional<double> threshold;
  bool auto_retrain = false;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API (token: $EDUDSS_TOKEN)");
  serve_cmd->add_option("--bind", bind, "Bind address");
  serve_cmd->add_option("--port", port, "Port (0 picks a free port)");
  serve_cmd->add_option("--threshold", threshold, "At-risk threshold");
  serve_cmd->add_flag("--auto-retrain", auto_retrain, "Retrain after each feedback batch");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code_for(ErrorKind::kUsage);
  }

  try {
    if (*ingest_cmd) return run_ingest(global, ingest);
    if (*train_cmd) return run_train(global);
    if (*evaluate_cmd) return run_evaluate(global);
    if (*history_cmd) return run_history(global);
    if (*predict_cmd) return run_predict(global, predict_input);
    if (*feedback_cmd) return run_feedback(global, feedback_path);
    if (*retrain_cmd) return run_retrain(global, force);
    if (*compare_cmd) return run_compare(global);
    if (*explain_cmd) return run_explain(global, explain_target, explain_top, svg_path);
    if (*serve_cmd) return run_serve(global, bind, port, threshold, auto_retrain);
  } catch (const service::ApiError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& detail : e.details()) std::cerr << "  " << detail.dump() << "\n";
    return exit_code_for_api(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(ErrorKind::kModel);
  }
  return exit_code_for(ErrorKind::kUsage);
}
