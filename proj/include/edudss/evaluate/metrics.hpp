#pragma once

#include <cstddef>
#include <span>
#include <string>

#include <json.hpp>

#include "edudss/data/preprocess.hpp"
#include "edudss/data/record.hpp"
#include "edudss/gbdt/model.hpp"

namespace edudss::evaluate {

// All metrics take (true, predicted) and throw DataError on empty or
// mismatched inputs.
double rmse(std::span<const double> y, std::span<const double> yhat);
double mae(std::span<const double> y, std::span<const double> yhat);
// Throws DataError when y has zero variance.
double r2(std::span<const double> y, std::span<const double> yhat);
// Percent. Throws DataError when any y is zero.
double mape(std::span<const double> y, std::span<const double> yhat);
// 1 - Var(y - yhat) / Var(y), population variances. Throws DataError when y
// has zero variance.
double explained_variance(std::span<const double> y, std::span<const double> yhat);

struct MetricsReport {
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
  double mape_percent = 0.0;
  double explained_variance = 0.0;
  std::size_t n = 0;
  std::string phase_label;
  std::string timestamp;

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& document);
  bool operator==(const MetricsReport&) const = default;
};

MetricsReport compute_report(std::span<const double> y, std::span<const double> yhat,
                             std::string phase_label);

// Transforms `test` with `state`, predicts and scores. Every test row needs a
// target.
MetricsReport evaluate_model(const gbdt::GBDTModel& model, const data::Dataset& test,
                             const data::PreprocessorState& state, std::string phase_label);

}  // namespace edudss::evaluate
