#include "edudss/gbdt/efb.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "datasets.hpp"
#include "edudss/gbdt/binning.hpp"

namespace edudss::gbdt {
namespace {

BinnedMatrix bin_all(const FeatureMatrix& x) { return FeatureBinner::fit(x, 255).apply(x); }

std::size_t bundle_conflicts(const BinnedMatrix& binned, const std::vector<std::size_t>& members) {
  std::size_t conflicts = 0;
  for (std::size_t r = 0; r < binned.rows; ++r) {
    int active = 0;
    for (const auto f : members) active += binned.column(f)[r] != binned.default_bin[f] ? 1 : 0;
    conflicts += active > 1 ? 1 : 0;
  }
  return conflicts;
}

// Smallest number of conflict-free groups over every set partition.
std::size_t minimum_bundles(const BinnedMatrix& binned) {
  const std::size_t n = binned.cols;
  std::vector<std::vector<std::size_t>> groups;
  std::size_t best = n;
  std::function<void(std::size_t)> place = [&](std::size_t f) {
    if (f == n) {
      best = std::min(best, groups.size());
      return;
    }
    for (auto& g : groups) {
      g.push_back(f);
      if (bundle_conflicts(binned, g) == 0) place(f + 1);
      g.pop_back();
    }
    groups.push_back({f});
    place(f + 1);
    groups.pop_back();
  };
  place(0);
  return best;
}

TEST(EfbTest, OneHotPairSharesABundle) {
  FeatureMatrix x(6, 2, {1, 0, 0, 1, 1, 0, 0, 1, 0, 0, 0, 0});
  const auto bundles = bundle_features(bin_all(x), 0);
  ASSERT_EQ(bundles.size(), 1u);
  EXPECT_EQ(bundles[0].members.size(), 2u);
}

TEST(EfbTest, DenseColumnsStayApart) {
  const auto data = testing::random_regression(200, 2, 3);
  EXPECT_EQ(bundle_features(bin_all(data.features), 0).size(), 2u);
}

TEST(EfbTest, GreedyMatchesExhaustiveOnSmallPatterns) {
  // Columns 0/1 overlap, 2 is exclusive with both, 3 overlaps with 2 only.
  FeatureMatrix x(8, 4, {
                            1, 1, 0, 0,  //
                            1, 0, 0, 0,  //
                            0, 1, 0, 0,  //
                            0, 0, 1, 1,  //
                            0, 0, 1, 0,  //
                            0, 0, 0, 1,  //
                            0, 0, 0, 0,  //
                            0, 0, 0, 0,  //
                        });
  const auto binned = bin_all(x);
  const auto bundles = bundle_features(binned, 0);
  EXPECT_EQ(bundles.size(), minimum_bundles(binned));
  std::set<std::size_t> seen;
  for (const auto& b : bundles) {
    EXPECT_EQ(bundle_conflicts(binned, b.members), 0u);
    seen.insert(b.members.begin(), b.members.end());
  }
  EXPECT_EQ(seen.size(), 4u);
}

TEST(EfbTest, ConflictBudgetAllowsOverlap) {
  FeatureMatrix x(6, 2, {1, 1, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0});
  const auto binned = bin_all(x);
  EXPECT_EQ(count_conflicts(binned, 0, 1), 1u);
  EXPECT_EQ(bundle_features(binned, 0).size(), 2u);
  EXPECT_EQ(bundle_features(binned, 1).size(), 1u);
}

TEST(EfbTest, OneHotBlocksCollapseToOneBundlePerBlock) {
  const auto data = testing::one_hot_blocks(500, 4, 6, 11);
  const auto bundles = bundle_features(bin_all(data.features), 0);
  // Levels within a block are exclusive; distinct blocks overlap on many rows.
  EXPECT_EQ(bundles.size(), 4u);
}

TEST(EfbTest, DecodeInvertsEncode) {
  const auto data = testing::one_hot_blocks(300, 3, 5, 4);
  const auto binned = bin_all(data.features);
  const auto bundled = encode_bundles(binned, bundle_features(binned, 0));
  for (std::size_t g = 0; g < bundled.bundles.size(); ++g) {
    const auto& bundle = bundled.bundles[g];
    const auto column = bundled.column(g);
    for (std::size_t r = 0; r < binned.rows; ++r) {
      std::size_t feature = 0;
      int feature_bin = 0;
      if (decode_bundle_bin(bundle, binned, column[r], feature, feature_bin)) {
        EXPECT_EQ(binned.column(feature)[r], feature_bin);
      } else {
        for (const auto f : bundle.members) {
          EXPECT_EQ(binned.column(f)[r], binned.default_bin[f]);
        }
      }
    }
  }
}

}  // namespace
}  // namespace edudss::gbdt
