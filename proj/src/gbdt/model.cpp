#include "edudss/gbdt/model.hpp"

#include "edudss/common/error.hpp"

namespace edudss::gbdt {

double GBDTModel::predict(std::span<const double> x) const {
  if (x.size() != feature_names.size()) {
    throw ModelError("predict: expected " + std::to_string(feature_names.size()) +
                     " features, got " + std::to_string(x.size()));
  }
  double out = base_score;
  for (const auto& tree : trees) out += config.learning_rate * tree.predict(x);
  return out;
}

std::vector<double> GBDTModel::predict_batch(const FeatureMatrix& features,
                                             Execution exec) const {
  if (features.cols() != feature_names.size() && features.rows() > 0) {
    throw ModelError("predict: expected " + std::to_string(feature_names.size()) +
                     " features, got " + std::to_string(features.cols()));
  }
  std::vector<double> out(features.rows());
  const auto n = static_cast<std::ptrdiff_t>(features.rows());
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] = predict(features.row(static_cast<std::size_t>(i)));
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] = predict(features.row(static_cast<std::size_t>(i)));
    }
  }
  return out;
}

}  // namespace edudss::gbdt
