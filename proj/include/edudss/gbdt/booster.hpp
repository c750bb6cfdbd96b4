#pragma once

#include <span>
#include <string>
#include <vector>

#include "edudss/common/matrix.hpp"
#include "edudss/gbdt/config.hpp"
#include "edudss/gbdt/model.hpp"

namespace edudss::gbdt {

// Residuals y - y_hat: the negative gradient of half squared error.
std::vector<double> compute_gradients(std::span<const double> targets,
                                      std::span<const double> predictions);

// Runs num_rounds boosting rounds of squared-error regression. Feature names
// default to f0..f{d-1}. Throws ModelError on NaN/inf features or targets,
// fewer than two rows, or mismatched lengths; UsageError on invalid config.
GBDTModel train(const FeatureMatrix& features, std::span<const double> targets,
                const TrainConfig& config, std::vector<std::string> feature_names = {},
                Execution exec = Execution::kParallel);

}  // namespace edudss::gbdt
