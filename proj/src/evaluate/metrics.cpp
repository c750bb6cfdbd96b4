#include "edudss/evaluate/metrics.hpp"

#include <cmath>

#include "edudss/common/clock.hpp"
#include "edudss/common/error.hpp"

namespace edudss::evaluate {

namespace {

void check_pair(std::span<const double> y, std::span<const double> yhat, const char* name) {
  if (y.empty()) throw DataError(std::string(name) + ": empty input");
  if (y.size() != yhat.size()) {
    throw DataError(std::string(name) + ": length mismatch (" + std::to_string(y.size()) +
                    " vs " + std::to_string(yhat.size()) + ")");
  }
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (const double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double population_variance(std::span<const double> v) {
  const double mean = mean_of(v);
  double sum = 0.0;
  for (const double x : v) sum += (x - mean) * (x - mean);
  return sum / static_cast<double>(v.size());
}

void require_variance(double variance, const char* name) {
  if (!(variance > 0.0)) {
    throw DataError(std::string(name) + ": true values have zero variance; metric undefined");
  }
}

}  // namespace

double rmse(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat, "rmse");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  return std::sqrt(sum / static_cast<double>(y.size()));
}

double mae(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat, "mae");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += std::fabs(y[i] - yhat[i]);
  return sum / static_cast<double>(y.size());
}

double r2(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat, "r2");
  const double mean = mean_of(y);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  require_variance(ss_tot, "r2");
  return 1.0 - ss_res / ss_tot;
}

double mape(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat, "mape");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) {
      throw DataError("mape: true value at index " + std::to_string(i) +
                      " is zero; percentage error undefined");
    }
    sum += std::fabs((y[i] - yhat[i]) / y[i]);
  }
  return 100.0 * sum / static_cast<double>(y.size());
}

double explained_variance(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat, "explained_variance");
  const double var_y = population_variance(y);
  require_variance(var_y, "explained_variance");
  std::vector<double> residuals(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) residuals[i] = y[i] - yhat[i];
  return 1.0 - population_variance(residuals) / var_y;
}

nlohmann::json MetricsReport::to_json() const {
  return {{"phase", phase_label},   {"timestamp", timestamp}, {"n", n},
          {"rmse", rmse},           {"mae", mae},             {"r2", r2},
          {"mape_percent", mape_percent}, {"explained_variance", explained_variance}};
}

MetricsReport MetricsReport::from_json(const nlohmann::json& document) {
  try {
    MetricsReport out;
    out.phase_label = document.at("phase").get<std::string>();
    out.timestamp = document.at("timestamp").get<std::string>();
    out.n = document.at("n").get<std::size_t>();
    out.rmse = document.at("rmse").get<double>();
    out.mae = document.at("mae").get<double>();
    out.r2 = document.at("r2").get<double>();
    out.mape_percent = document.at("mape_percent").get<double>();
    out.explained_variance = document.at("explained_variance").get<double>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metrics document: ") + e.what());
  }
}

MetricsReport compute_report(std::span<const double> y, std::span<const double> yhat,
                             std::string phase_label) {
  MetricsReport out;
  out.rmse = rmse(y, yhat);
  out.mae = mae(y, yhat);
  out.r2 = r2(y, yhat);
  out.mape_percent = mape(y, yhat);
  out.explained_variance = explained_variance(y, yhat);
  out.n = y.size();
  out.phase_label = std::move(phase_label);
  out.timestamp = utc_timestamp();
  return out;
}

MetricsReport evaluate_model(const gbdt::GBDTModel& model, const data::Dataset& test,
                             const data::PreprocessorState& state, std::string phase_label) {
  if (test.empty()) throw DataError("evaluate_model: test set is empty");
  const auto transformed = data::transform_dataset(test, state);
  if (transformed.targets.size() != test.size()) {
    throw DataError("evaluate_model: every test row needs an Exam_Score");
  }
  const auto predictions = model.predict_batch(transformed.features);
  return compute_report(transformed.targets, predictions, std::move(phase_label));
}

}  // namespace edudss::evaluate
