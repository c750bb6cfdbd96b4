#include "edudss/gbdt/booster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "edudss/common/error.hpp"
#include "edudss/common/rng.hpp"
#include "edudss/gbdt/binning.hpp"
#include "edudss/gbdt/efb.hpp"
#include "edudss/gbdt/goss.hpp"
#include "edudss/gbdt/histogram.hpp"
#include "edudss/gbdt/tree_builder.hpp"

namespace edudss::gbdt {

std::vector<double> compute_gradients(std::span<const double> targets,
                                      std::span<const double> predictions) {
  if (targets.size() != predictions.size()) {
    throw ModelError("compute_gradients: length mismatch (" + std::to_string(targets.size()) +
                     " targets, " + std::to_string(predictions.size()) + " predictions)");
  }
  std::vector<double> out(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) out[i] = targets[i] - predictions[i];
  return out;
}

namespace {

double base_score_of(std::span<const double> targets) {
  const auto [lo, hi] = std::minmax_element(targets.begin(), targets.end());
  // Exact for constant targets, where a summed mean may be off by an ulp.
  if (*lo == *hi) return *lo;
  double sum = 0.0;
  for (const double y : targets) sum += y;
  return sum / static_cast<double>(targets.size());
}

double rmse_of(std::span<const double> targets, std::span<const double> scores) {
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double e = targets[i] - scores[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(targets.size()));
}

}  // namespace

GBDTModel train(const FeatureMatrix& features, std::span<const double> targets,
                const TrainConfig& config, std::vector<std::string> feature_names,
                Execution exec) {
  config.validate();
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (n < 2) throw ModelError("train: need at least 2 rows");
  if (targets.size() != n) throw ModelError("train: targets do not match feature rows");
  for (const double v : features.data()) {
    if (!std::isfinite(v)) throw ModelError("train: NaN or infinite feature value");
  }
  for (const double y : targets) {
    if (!std::isfinite(y)) throw ModelError("train: NaN or infinite target");
  }
  if (feature_names.empty()) {
    for (std::size_t f = 0; f < d; ++f) feature_names.push_back("f" + std::to_string(f));
  }
  if (feature_names.size() != d) throw ModelError("train: feature name count mismatch");

  const auto binner = FeatureBinner::fit(features, config.max_bins, exec);
  const auto binned = binner.apply(features, exec);
  std::optional<BundledMatrix> bundled;
  if (config.efb_enabled) {
    bundled = encode_bundles(binned, bundle_features(binned, config.max_conflicts));
  }
  const auto histograms = bundled ? HistogramBuilder::bundled(binned, *bundled)
                                  : HistogramBuilder::unbundled(binned);
  const TreeBuildContext context{binned, binner, histograms, exec};

  GBDTModel model;
  model.config = config;
  model.feature_names = std::move(feature_names);
  model.base_score = base_score_of(targets);
  model.trees.reserve(static_cast<std::size_t>(config.num_rounds));
  model.train_rmse.reserve(static_cast<std::size_t>(config.num_rounds));

  std::vector<double> scores(n, model.base_score);
  std::vector<std::uint32_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0u);
  const std::vector<double> unit(n, 1.0);
  std::vector<double> grad(n);
  std::vector<double> hess(n);

  for (int round = 0; round < config.num_rounds; ++round) {
    const auto residuals = compute_gradients(targets, scores);
    RegressionTree tree;
    if (config.goss) {
      const auto sample = goss_sample(residuals, config.goss->top_rate, config.goss->other_rate,
                                      mix_seed(config.seed, static_cast<std::uint64_t>(round)));
      std::fill(grad.begin(), grad.end(), 0.0);
      std::fill(hess.begin(), hess.end(), 0.0);
      for (std::size_t k = 0; k < sample.indices.size(); ++k) {
        const auto r = sample.indices[k];
        grad[r] = sample.weights[k] * residuals[r];
        hess[r] = sample.weights[k];
      }
      tree = build_tree(context, sample.indices, grad, hess, config);
    } else {
      tree = build_tree(context, all_rows, residuals, unit, config);
    }

    const auto rows = static_cast<std::ptrdiff_t>(n);
    const double rate = config.learning_rate;
    if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < rows; ++i) {
        const auto r = static_cast<std::size_t>(i);
        scores[r] += rate * tree.predict(features.row(r));
      }
    } else {
      for (std::size_t r = 0; r < n; ++r) scores[r] += rate * tree.predict(features.row(r));
    }
    model.trees.push_back(std::move(tree));
    model.train_rmse.push_back(rmse_of(targets, scores));
  }
  return model;
}

}  // namespace edudss::gbdt
