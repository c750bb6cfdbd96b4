#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "edudss/common/matrix.hpp"
#include "edudss/gbdt/model.hpp"

namespace edudss::explain {

struct ShapExplanation {
  double base_value = 0.0;            // expected model output under node covers
  std::vector<double> contributions;  // one phi per feature
  double prediction = 0.0;
};

// Cover-weighted mean of the tree's leaf values.
double tree_expected_value(const gbdt::RegressionTree& tree);

// base_score + learning_rate * sum of tree expected values.
double expected_value(const gbdt::GBDTModel& model);

// Path-dependent TreeSHAP for one tree, unscaled. Adds phi into `phi`, which
// must have one slot per feature. O(leaves * depth^2).
void tree_shap(const gbdt::RegressionTree& tree, std::span<const double> x,
               std::span<double> phi);

// Throws ModelError on dimension mismatch.
ShapExplanation explain(const gbdt::GBDTModel& model, std::span<const double> x);

std::vector<ShapExplanation> explain_batch(const gbdt::GBDTModel& model,
                                           const FeatureMatrix& data,
                                           gbdt::Execution exec = gbdt::Execution::kParallel);

struct GlobalImportance {
  std::vector<std::string> features;
  std::vector<double> mean_abs_phi;  // parallel to features
  std::vector<std::size_t> ranking;  // feature indices, most important first

  std::vector<std::string> top(std::size_t k) const;
};

// Mean |phi_j| over the rows of `data`. Throws DataError on empty data.
GlobalImportance global_importance(const gbdt::GBDTModel& model, const FeatureMatrix& data,
                                   gbdt::Execution exec = gbdt::Execution::kParallel);

// [{feature, value, phi}, ...] ordered by |phi| descending (ties: lower feature
// index first). `values` supplies the per-feature display value.
nlohmann::json contributions_to_json(const ShapExplanation& explanation,
                                     const std::vector<std::string>& feature_names,
                                     const std::vector<nlohmann::json>& values);

}  // namespace edudss::explain
