#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "edudss/gbdt/binning.hpp"

namespace edudss::gbdt {

// Features packed into one bin column. Bundle bin 0 means "every member at its
// default bin"; member i's non-default bins occupy
// [offsets[i], offsets[i] + num_bins(member) - 1).
struct FeatureBundle {
  std::vector<std::size_t> members;
  std::vector<int> offsets;
  int total_bins = 1;

  bool operator==(const FeatureBundle&) const = default;
};

inline constexpr int kMaxBundleBins = 256;

// Greedy bundling: features ordered by non-default count (descending, lower
// index first), each placed into the first bundle whose accumulated conflict
// count stays within max_conflicts and whose bin range still fits in 8 bits.
// A conflict is a row where two members are both non-default.
std::vector<FeatureBundle> bundle_features(const BinnedMatrix& binned, int max_conflicts);

// Rows where the feature sits off its default bin.
std::size_t count_conflicts(const BinnedMatrix& binned, std::size_t a, std::size_t b);

struct BundledMatrix {
  std::size_t rows = 0;
  std::vector<FeatureBundle> bundles;
  std::vector<BinIndex> bins;  // bundle-major: bins[g * rows + r]

  std::span<const BinIndex> column(std::size_t bundle) const {
    return {bins.data() + bundle * rows, rows};
  }
};

// Encodes the binned columns into bundle columns. With conflicts the earliest
// member wins the row.
BundledMatrix encode_bundles(const BinnedMatrix& binned, std::vector<FeatureBundle> bundles);

// Inverse of the member bin mapping: bundle bin -> (feature, feature bin).
// Returns false for bundle bin 0.
bool decode_bundle_bin(const FeatureBundle& bundle, const BinnedMatrix& binned, int bundle_bin,
                       std::size_t& feature, int& feature_bin);

}  // namespace edudss::gbdt
