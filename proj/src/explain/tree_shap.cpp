#include "edudss/explain/tree_shap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edudss/common/error.hpp"

namespace edudss::explain {

namespace {

using gbdt::RegressionTree;
using gbdt::TreeNode;

// One feature on the current root-to-node path. zero_fraction is the share
// of training cover that follows this path when the feature is unknown;
// one_fraction is 1 when x itself follows the path, else 0.
struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;  // permutation weight of subsets of this size
};

using Path = std::vector<PathElement>;

void extend_path(Path& path, double zero_fraction, double one_fraction, int feature) {
  const std::size_t depth = path.size();
  path.push_back({feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0});
  const auto n = static_cast<double>(depth);
  for (std::size_t i = depth; i-- > 0;) {
    const auto k = static_cast<double>(i);
    path[i + 1].weight += one_fraction * path[i].weight * (k + 1.0) / (n + 1.0);
    path[i].weight = zero_fraction * path[i].weight * (n - k) / (n + 1.0);
  }
}

void unwind_path(Path& path, std::size_t index) {
  const std::size_t depth = path.size() - 1;
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  const auto n = static_cast<double>(depth);
  double next_one_portion = path[depth].weight;

  for (std::size_t i = depth; i-- > 0;) {
    const auto k = static_cast<double>(i);
    if (one_fraction != 0.0) {
      const double saved = path[i].weight;
      path[i].weight = next_one_portion * (n + 1.0) / ((k + 1.0) * one_fraction);
      next_one_portion = saved - path[i].weight * zero_fraction * (n - k) / (n + 1.0);
    } else {
      path[i].weight = path[i].weight * (n + 1.0) / (zero_fraction * (n - k));
    }
  }
  for (std::size_t i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
  path.pop_back();
}

// Total permutation weight the path would carry with element `index` removed.
double unwound_path_sum(const Path& path, std::size_t index) {
  const std::size_t depth = path.size() - 1;
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  const auto n = static_cast<double>(depth);
  double next_one_portion = path[depth].weight;
  double total = 0.0;

  if (one_fraction != 0.0) {
    for (std::size_t i = depth; i-- > 0;) {
      const auto k = static_cast<double>(i);
      const double tmp = next_one_portion / ((k + 1.0) * one_fraction);
      total += tmp;
      next_one_portion = path[i].weight - tmp * zero_fraction * (n - k);
    }
  } else {
    for (std::size_t i = depth; i-- > 0;) {
      const auto k = static_cast<double>(i);
      total += path[i].weight / (zero_fraction * (n - k));
    }
  }
  return total * (n + 1.0);
}

void recurse(const RegressionTree& tree, std::span<const double> x, int node_index, Path path,
             double zero_fraction, double one_fraction, int feature, std::span<double> phi) {
  extend_path(path, zero_fraction, one_fraction, feature);
  const TreeNode& node = tree.node(static_cast<std::size_t>(node_index));

  if (node.is_leaf()) {
    for (std::size_t i = 1; i < path.size(); ++i) {
      const double weight = unwound_path_sum(path, i);
      const auto& element = path[i];
      phi[static_cast<std::size_t>(element.feature)] +=
          weight * (element.one_fraction - element.zero_fraction) * node.value;
    }
    return;
  }

  const bool goes_left = x[static_cast<std::size_t>(node.feature)] <= node.threshold;
  const int hot = goes_left ? node.left : node.right;
  const int cold = goes_left ? node.right : node.left;
  const double hot_cover = tree.node(static_cast<std::size_t>(hot)).cover;
  const double cold_cover = tree.node(static_cast<std::size_t>(cold)).cover;
  if (!(node.cover > 0.0)) {
    throw ModelError("tree_shap: internal node " + std::to_string(node_index) +
                     " has zero cover");
  }

  // A feature split on again below an earlier split: fold the earlier
  // fractions into this one and drop the old path entry.
  double incoming_zero = 1.0;
  double incoming_one = 1.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (path[i].feature == node.feature) {
      incoming_zero = path[i].zero_fraction;
      incoming_one = path[i].one_fraction;
      unwind_path(path, i);
      break;
    }
  }

  recurse(tree, x, hot, path, incoming_zero * hot_cover / node.cover, incoming_one,
          node.feature, phi);
  recurse(tree, x, cold, std::move(path), incoming_zero * cold_cover / node.cover, 0.0,
          node.feature, phi);
}

}  // namespace

double tree_expected_value(const RegressionTree& tree) {
  const double root_cover = tree.node(0).cover;
  if (tree.node(0).is_leaf()) return tree.node(0).value;
  if (!(root_cover > 0.0)) throw ModelError("tree_shap: root has zero cover");
  double sum = 0.0;
  for (const auto& node : tree.nodes()) {
    if (node.is_leaf()) sum += node.cover * node.value;
  }
  return sum / root_cover;
}

double expected_value(const gbdt::GBDTModel& model) {
  double out = model.base_score;
  for (const auto& tree : model.trees) {
    out += model.config.learning_rate * tree_expected_value(tree);
  }
  return out;
}

void tree_shap(const RegressionTree& tree, std::span<const double> x, std::span<double> phi) {
  if (tree.node(0).is_leaf()) return;
  Path path;
  path.reserve(static_cast<std::size_t>(tree.depth()) + 2);
  recurse(tree, x, 0, std::move(path), 1.0, 1.0, -1, phi);
}

ShapExplanation explain(const gbdt::GBDTModel& model, std::span<const double> x) {
  if (x.size() != model.num_features()) {
    throw ModelError("explain: expected " + std::to_string(model.num_features()) +
                     " features, got " + std::to_string(x.size()));
  }
  ShapExplanation out;
  out.contributions.assign(x.size(), 0.0);
  std::vector<double> tree_phi(x.size());
  for (const auto& tree : model.trees) {
    std::fill(tree_phi.begin(), tree_phi.end(), 0.0);
    tree_shap(tree, x, tree_phi);
    for (std::size_t j = 0; j < x.size(); ++j) {
      out.contributions[j] += model.config.learning_rate * tree_phi[j];
    }
  }
  out.base_value = expected_value(model);
  out.prediction = model.predict(x);
  return out;
}

std::vector<ShapExplanation> explain_batch(const gbdt::GBDTModel& model,
                                           const FeatureMatrix& data, gbdt::Execution exec) {
  std::vector<ShapExplanation> out(data.rows());
  const auto rows = static_cast<std::ptrdiff_t>(data.rows());
  if (exec == gbdt::Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
      const auto r = static_cast<std::size_t>(i);
      out[r] = explain(model, data.row(r));
    }
  } else {
    for (std::size_t r = 0; r < data.rows(); ++r) out[r] = explain(model, data.row(r));
  }
  return out;
}

std::vector<std::string> GlobalImportance::top(std::size_t k) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranking.size() && i < k; ++i) out.push_back(features[ranking[i]]);
  return out;
}

GlobalImportance global_importance(const gbdt::GBDTModel& model, const FeatureMatrix& data,
                                   gbdt::Execution exec) {
  if (data.empty()) throw DataError("global_importance: data is empty");
  const auto explanations = explain_batch(model, data, exec);
  GlobalImportance out;
  out.features = model.feature_names;
  out.mean_abs_phi.assign(model.num_features(), 0.0);
  for (const auto& e : explanations) {
    for (std::size_t j = 0; j < e.contributions.size(); ++j) {
      out.mean_abs_phi[j] += std::fabs(e.contributions[j]);
    }
  }
  for (auto& v : out.mean_abs_phi) v /= static_cast<double>(data.rows());
  out.ranking.resize(out.mean_abs_phi.size());
  std::iota(out.ranking.begin(), out.ranking.end(), std::size_t{0});
  std::stable_sort(out.ranking.begin(), out.ranking.end(), [&](std::size_t a, std::size_t b) {
    return out.mean_abs_phi[a] > out.mean_abs_phi[b];
  });
  return out;
}

nlohmann::json contributions_to_json(const ShapExplanation& explanation,
                                     const std::vector<std::string>& feature_names,
                                     const std::vector<nlohmann::json>& values) {
  const auto& phi = explanation.contributions;
  std::vector<std::size_t> order(phi.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(phi[a]) > std::fabs(phi[b]);
  });
  auto out = nlohmann::json::array();
  for (const auto j : order) {
    out.push_back({{"feature", feature_names.at(j)},
                   {"value", j < values.size() ? values[j] : nlohmann::json()},
                   {"phi", phi[j]}});
  }
  return out;
}

}  // namespace edudss::explain
