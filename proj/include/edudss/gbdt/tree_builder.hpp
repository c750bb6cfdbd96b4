#pragma once

#include <cstdint>
#include <span>

#include "edudss/common/matrix.hpp"
#include "edudss/gbdt/binning.hpp"
#include "edudss/gbdt/config.hpp"
#include "edudss/gbdt/histogram.hpp"
#include "edudss/gbdt/tree.hpp"

namespace edudss::gbdt {

struct SplitCandidate {
  int feature = -1;
  int bin = -1;  // rows with bin <= this go left
  double gain = 0.0;
  NodeTotals left;
  NodeTotals right;

  bool valid() const noexcept { return feature >= 0; }
};

// G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G_P^2/(H_P+lambda)
double split_gain(const NodeTotals& left, const NodeTotals& right, const NodeTotals& parent,
                  double lambda);

// Best positive-gain split over all (feature, bin) boundaries honoring
// min_samples_leaf. Ties go to the lower feature, then the lower bin.
SplitCandidate find_best_split(const Histogram& histogram, const NodeTotals& totals,
                               double lambda, int min_samples_leaf);

double leaf_value(const NodeTotals& totals, double lambda);

// Training-time inputs that stay fixed across boosting rounds.
struct TreeBuildContext {
  const BinnedMatrix& binned;
  const FeatureBinner& binner;
  const HistogramBuilder& histograms;
  Execution exec = Execution::kParallel;
};

// Leaf-wise growth: the leaf with the largest split gain expands first until
// max_leaves is reached or no leaf has a positive-gain split. The smaller
// child's histogram is built directly, the larger one by subtraction.
// `grad` and `hess` are indexed by row id and already carry instance weights.
RegressionTree build_tree(const TreeBuildContext& context, std::span<const std::uint32_t> rows,
                          std::span<const double> grad, std::span<const double> hess,
                          const TrainConfig& config);

// Convenience form: bins `features` and grows one tree on the rows with
// positive weight, using weight * gradient and weight as the statistics.
RegressionTree build_tree(const FeatureMatrix& features, std::span<const double> gradients,
                          std::span<const double> weights, const TrainConfig& config);

}  // namespace edudss::gbdt
