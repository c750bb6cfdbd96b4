#pragma once

#include <span>
#include <string>
#include <vector>

#include "edudss/common/matrix.hpp"
#include "edudss/gbdt/config.hpp"
#include "edudss/gbdt/tree.hpp"

namespace edudss::gbdt {

// prediction = base_score + learning_rate * sum_k tree_k(x)
struct GBDTModel {
  double base_score = 0.0;
  std::vector<RegressionTree> trees;
  TrainConfig config;
  std::vector<std::string> feature_names;
  std::vector<double> train_rmse;  // after each boosting round

  std::size_t num_features() const noexcept { return feature_names.size(); }

  // Throws ModelError on dimension mismatch.
  double predict(std::span<const double> x) const;

  std::vector<double> predict_batch(const FeatureMatrix& features,
                                    Execution exec = Execution::kParallel) const;

  bool operator==(const GBDTModel&) const = default;
};

}  // namespace edudss::gbdt
