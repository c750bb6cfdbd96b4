#include "edudss/gbdt/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "edudss/common/error.hpp"

namespace edudss::gbdt {

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) nodes_.emplace_back();
}

int RegressionTree::leaf_index(std::span<const double> x) const {
  int index = 0;
  while (!nodes_[static_cast<std::size_t>(index)].is_leaf()) {
    const auto& node = nodes_[static_cast<std::size_t>(index)];
    index = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return index;
}

double RegressionTree::predict(std::span<const double> x) const {
  return nodes_[static_cast<std::size_t>(leaf_index(x))].value;
}

std::size_t RegressionTree::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int RegressionTree::depth() const {
  std::function<int(int)> walk = [&](int index) -> int {
    const auto& node = nodes_[static_cast<std::size_t>(index)];
    if (node.is_leaf()) return 0;
    return 1 + std::max(walk(node.left), walk(node.right));
  };
  return walk(0);
}

int RegressionTree::max_feature_index() const {
  int out = -1;
  for (const auto& node : nodes_) out = std::max(out, node.feature);
  return out;
}

std::pair<int, int> RegressionTree::split_leaf(int index, int feature, double threshold) {
  const int left = static_cast<int>(nodes_.size());
  const int right = left + 1;
  nodes_.emplace_back();
  nodes_.emplace_back();
  auto& node = nodes_[static_cast<std::size_t>(index)];
  node.feature = feature;
  node.threshold = threshold;
  node.left = left;
  node.right = right;
  node.value = 0.0;
  return {left, right};
}

void RegressionTree::set_leaf(int index, double value, double cover) {
  auto& node = nodes_[static_cast<std::size_t>(index)];
  node.value = value;
  node.cover = cover;
}

void RegressionTree::recompute_internal_covers() {
  std::function<double(int)> walk = [&](int index) -> double {
    auto& node = nodes_[static_cast<std::size_t>(index)];
    if (node.is_leaf()) return node.cover;
    const double left = walk(node.left);
    const double right = walk(node.right);
    // Re-fetch: recursion does not resize, but keep the reference local.
    nodes_[static_cast<std::size_t>(index)].cover = left + right;
    return left + right;
  };
  walk(0);
}

void RegressionTree::validate(std::size_t num_features) const {
  const auto n = static_cast<int>(nodes_.size());
  std::vector<int> parents(nodes_.size(), 0);
  for (int i = 0; i < n; ++i) {
    const auto& node = nodes_[static_cast<std::size_t>(i)];
    if (!std::isfinite(node.cover) || node.cover < 0.0) {
      throw ModelError("tree: node " + std::to_string(i) + " has invalid cover");
    }
    if (node.is_leaf()) {
      if (!std::isfinite(node.value)) {
        throw ModelError("tree: leaf " + std::to_string(i) + " has non-finite value");
      }
      continue;
    }
    if (static_cast<std::size_t>(node.feature) >= num_features) {
      throw ModelError("tree: node " + std::to_string(i) + " splits on unknown feature");
    }
    if (!std::isfinite(node.threshold)) {
      throw ModelError("tree: node " + std::to_string(i) + " has non-finite threshold");
    }
    for (const int child : {node.left, node.right}) {
      if (child <= i || child >= n) {
        throw ModelError("tree: node " + std::to_string(i) + " has invalid child index");
      }
      ++parents[static_cast<std::size_t>(child)];
    }
  }
  for (int i = 1; i < n; ++i) {
    if (parents[static_cast<std::size_t>(i)] != 1) {
      throw ModelError("tree: node " + std::to_string(i) + " is not reachable exactly once");
    }
  }
}

}  // namespace edudss::gbdt
