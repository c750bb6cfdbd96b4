#include "edudss/gbdt/tree_builder.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "edudss/common/error.hpp"
#include "edudss/gbdt/efb.hpp"

namespace edudss::gbdt {

namespace {

inline double square(double v) { return v * v; }

NodeTotals operator-(const NodeTotals& a, const NodeTotals& b) {
  return {a.grad - b.grad, a.hess - b.hess, a.count - b.count};
}

struct GrowingLeaf {
  int node = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  NodeTotals totals;
  Histogram histogram;
  SplitCandidate best;
};

}  // namespace

double split_gain(const NodeTotals& left, const NodeTotals& right, const NodeTotals& parent,
                  double lambda) {
  return square(left.grad) / (left.hess + lambda) + square(right.grad) / (right.hess + lambda) -
         square(parent.grad) / (parent.hess + lambda);
}

double leaf_value(const NodeTotals& totals, double lambda) {
  const double denominator = totals.hess + lambda;
  return denominator > 0.0 ? totals.grad / denominator : 0.0;
}

SplitCandidate find_best_split(const Histogram& histogram, const NodeTotals& totals,
                               double lambda, int min_samples_leaf) {
  SplitCandidate best;
  const auto min_count = static_cast<std::uint32_t>(min_samples_leaf);
  if (totals.count < 2 * min_count) return best;
  for (std::size_t f = 0; f < histogram.num_features(); ++f) {
    const auto bins = histogram.feature(f);
    NodeTotals left;
    for (std::size_t b = 0; b + 1 < bins.size(); ++b) {
      left.grad += bins[b].grad;
      left.hess += bins[b].hess;
      left.count += bins[b].count;
      if (left.count < min_count) continue;
      const NodeTotals right = totals - left;
      if (right.count < min_count) break;
      const double gain = split_gain(left, right, totals, lambda);
      if (gain > best.gain) {
        best.feature = static_cast<int>(f);
        best.bin = static_cast<int>(b);
        best.gain = gain;
        best.left = left;
        best.right = right;
      }
    }
  }
  return best;
}

RegressionTree build_tree(const TreeBuildContext& context, std::span<const std::uint32_t> rows,
                          std::span<const double> grad, std::span<const double> hess,
                          const TrainConfig& config) {
  RegressionTree tree;
  std::vector<std::uint32_t> partition(rows.begin(), rows.end());
  if (partition.empty()) return tree;

  const auto make_leaf = [&](int node, std::size_t begin, std::size_t end,
                             std::optional<Histogram> histogram) {
    GrowingLeaf leaf;
    leaf.node = node;
    leaf.begin = begin;
    leaf.end = end;
    const std::span<const std::uint32_t> leaf_rows(partition.data() + begin, end - begin);
    leaf.totals = sum_totals(leaf_rows, grad, hess);
    leaf.histogram = histogram ? std::move(*histogram)
                               : context.histograms.build(leaf_rows, grad, hess, leaf.totals,
                                                          context.exec);
    leaf.best = find_best_split(leaf.histogram, leaf.totals, config.lambda,
                                config.min_samples_leaf);
    return leaf;
  };

  std::vector<GrowingLeaf> leaves;
  leaves.push_back(make_leaf(0, 0, partition.size(), std::nullopt));

  while (leaves.size() < static_cast<std::size_t>(config.max_leaves)) {
    std::optional<std::size_t> chosen;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (!leaves[i].best.valid()) continue;
      if (!chosen || leaves[i].best.gain > leaves[*chosen].best.gain) chosen = i;
    }
    if (!chosen) break;

    GrowingLeaf parent = std::move(leaves[*chosen]);
    const auto feature = static_cast<std::size_t>(parent.best.feature);
    const auto split_bin = static_cast<BinIndex>(parent.best.bin);
    const auto column = context.binned.column(feature);
    const auto first = partition.begin() + static_cast<std::ptrdiff_t>(parent.begin);
    const auto last = partition.begin() + static_cast<std::ptrdiff_t>(parent.end);
    const auto middle = std::stable_partition(
        first, last, [&](std::uint32_t r) { return column[r] <= split_bin; });
    const auto mid = static_cast<std::size_t>(middle - partition.begin());

    const double threshold = context.binner.cuts(feature)[split_bin];
    const auto [left_node, right_node] =
        tree.split_leaf(parent.node, parent.best.feature, threshold);

    // Build the smaller child directly and derive its sibling by subtraction.
    const bool left_smaller = (mid - parent.begin) <= (parent.end - mid);
    GrowingLeaf small = left_smaller ? make_leaf(left_node, parent.begin, mid, std::nullopt)
                                     : make_leaf(right_node, mid, parent.end, std::nullopt);
    Histogram large_hist;
    large_hist.assign_difference(parent.histogram, small.histogram);
    GrowingLeaf large = left_smaller
                            ? make_leaf(right_node, mid, parent.end, std::move(large_hist))
                            : make_leaf(left_node, parent.begin, mid, std::move(large_hist));

    GrowingLeaf& left = left_smaller ? small : large;
    GrowingLeaf& right = left_smaller ? large : small;
    leaves[*chosen] = std::move(left);
    leaves.push_back(std::move(right));
  }

  for (const auto& leaf : leaves) {
    tree.set_leaf(leaf.node, leaf_value(leaf.totals, config.lambda), leaf.totals.hess);
  }
  tree.recompute_internal_covers();
  return tree;
}

RegressionTree build_tree(const FeatureMatrix& features, std::span<const double> gradients,
                          std::span<const double> weights, const TrainConfig& config) {
  config.validate();
  const std::size_t n = features.rows();
  if (gradients.size() != n || weights.size() != n) {
    throw ModelError("build_tree: gradients/weights must align with rows");
  }
  const auto binner = FeatureBinner::fit(features, config.max_bins);
  const auto binned = binner.apply(features);
  std::optional<BundledMatrix> bundled;
  if (config.efb_enabled) {
    bundled = encode_bundles(binned, bundle_features(binned, config.max_conflicts));
  }
  const auto histograms = bundled ? HistogramBuilder::bundled(binned, *bundled)
                                  : HistogramBuilder::unbundled(binned);

  std::vector<double> grad(n, 0.0);
  std::vector<double> hess(n, 0.0);
  std::vector<std::uint32_t> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] <= 0.0) continue;
    rows.push_back(static_cast<std::uint32_t>(i));
    grad[i] = weights[i] * gradients[i];
    hess[i] = weights[i];
  }
  const TreeBuildContext context{binned, binner, histograms, Execution::kParallel};
  return build_tree(context, rows, grad, hess, config);
}

}  // namespace edudss::gbdt
