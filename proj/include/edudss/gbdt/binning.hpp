#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edudss/common/matrix.hpp"
#include "edudss/gbdt/config.hpp"

namespace edudss::gbdt {

using BinIndex = std::uint8_t;
inline constexpr int kMaxBinsLimit = 255;

// Column-major matrix of bin indices.
struct BinnedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<BinIndex> bins;       // bins[f * rows + r]
  std::vector<int> num_bins;        // per feature
  std::vector<BinIndex> default_bin;  // most frequent bin, lowest on ties

  std::span<const BinIndex> column(std::size_t feature) const {
    return {bins.data() + feature * rows, rows};
  }
};

// Quantile binning. Bin b of feature f holds values v with
// cuts[b-1] < v <= cuts[b]; a value equal to a cut lands in the lower bin, so
// the split "bin <= b" is exactly "value <= cuts[b]".
class FeatureBinner {
 public:
  static FeatureBinner fit(const FeatureMatrix& features, int max_bins,
                           Execution exec = Execution::kParallel);

  // Cut points for one column: midpoints between consecutive distinct values
  // when there are at most max_bins of them, otherwise count-quantile cuts.
  static std::vector<double> compute_cuts(std::vector<double> values, int max_bins);

  std::size_t num_features() const noexcept { return cuts_.size(); }
  int num_bins(std::size_t feature) const {
    return static_cast<int>(cuts_[feature].size()) + 1;
  }
  const std::vector<double>& cuts(std::size_t feature) const { return cuts_[feature]; }
  BinIndex bin(std::size_t feature, double value) const;

  BinnedMatrix apply(const FeatureMatrix& features,
                     Execution exec = Execution::kParallel) const;

 private:
  std::vector<std::vector<double>> cuts_;
};

}  // namespace edudss::gbdt
