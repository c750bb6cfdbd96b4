#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace edudss::gbdt {

struct TreeNode {
  int feature = -1;        // -1 for leaves
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;      // leaf output before shrinkage
  double cover = 0.0;      // weighted training-instance count

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Binary regression tree; node 0 is the root.
class RegressionTree {
 public:
  RegressionTree() : nodes_(1) {}
  explicit RegressionTree(std::vector<TreeNode> nodes);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& node(std::size_t index) const { return nodes_.at(index); }
  std::size_t size() const noexcept { return nodes_.size(); }

  double predict(std::span<const double> x) const;
  int leaf_index(std::span<const double> x) const;
  std::size_t num_leaves() const;
  int depth() const;
  int max_feature_index() const;

  // Turns leaf `index` into a split and returns the (left, right) child ids.
  std::pair<int, int> split_leaf(int index, int feature, double threshold);
  void set_leaf(int index, double value, double cover);

  // Sets every internal cover to the sum of its children's covers.
  void recompute_internal_covers();

  // Throws ModelError on broken structure (dangling children, cycles,
  // non-finite leaves).
  void validate(std::size_t num_features) const;

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

}  // namespace edudss::gbdt
