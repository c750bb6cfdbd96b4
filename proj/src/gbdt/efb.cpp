#include "edudss/gbdt/efb.hpp"

#include <algorithm>
#include <numeric>

#include "edudss/common/error.hpp"

namespace edudss::gbdt {

std::size_t count_conflicts(const BinnedMatrix& binned, std::size_t a, std::size_t b) {
  const auto col_a = binned.column(a);
  const auto col_b = binned.column(b);
  std::size_t conflicts = 0;
  for (std::size_t r = 0; r < binned.rows; ++r) {
    conflicts += (col_a[r] != binned.default_bin[a] && col_b[r] != binned.default_bin[b]) ? 1 : 0;
  }
  return conflicts;
}

std::vector<FeatureBundle> bundle_features(const BinnedMatrix& binned, int max_conflicts) {
  const std::size_t cols = binned.cols;
  const std::size_t rows = binned.rows;

  std::vector<std::size_t> nondefault(cols, 0);
  for (std::size_t f = 0; f < cols; ++f) {
    const auto column = binned.column(f);
    for (std::size_t r = 0; r < rows; ++r) {
      nondefault[f] += column[r] != binned.default_bin[f] ? 1 : 0;
    }
  }
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return nondefault[a] > nondefault[b];
  });

  struct Building {
    FeatureBundle bundle;
    std::vector<char> used;  // rows where some member is non-default
    std::size_t conflicts = 0;
  };
  std::vector<Building> building;
  const auto budget = static_cast<std::size_t>(max_conflicts);

  for (const std::size_t f : order) {
    const auto column = binned.column(f);
    const int extra_bins = binned.num_bins[f] - 1;
    bool placed = false;
    for (auto& candidate : building) {
      if (candidate.bundle.total_bins + extra_bins > kMaxBundleBins) continue;
      std::size_t added = 0;
      for (std::size_t r = 0; r < rows && candidate.conflicts + added <= budget; ++r) {
        added += (candidate.used[r] && column[r] != binned.default_bin[f]) ? 1 : 0;
      }
      if (candidate.conflicts + added > budget) continue;
      candidate.bundle.members.push_back(f);
      candidate.bundle.offsets.push_back(candidate.bundle.total_bins);
      candidate.bundle.total_bins += extra_bins;
      candidate.conflicts += added;
      for (std::size_t r = 0; r < rows; ++r) {
        if (column[r] != binned.default_bin[f]) candidate.used[r] = 1;
      }
      placed = true;
      break;
    }
    if (!placed) {
      Building fresh;
      fresh.bundle.members = {f};
      fresh.bundle.offsets = {1};
      fresh.bundle.total_bins = 1 + extra_bins;
      fresh.used.assign(rows, 0);
      for (std::size_t r = 0; r < rows; ++r) {
        if (column[r] != binned.default_bin[f]) fresh.used[r] = 1;
      }
      building.push_back(std::move(fresh));
    }
  }

  std::vector<FeatureBundle> bundles;
  bundles.reserve(building.size());
  for (auto& b : building) bundles.push_back(std::move(b.bundle));
  return bundles;
}

BundledMatrix encode_bundles(const BinnedMatrix& binned, std::vector<FeatureBundle> bundles) {
  BundledMatrix out;
  out.rows = binned.rows;
  out.bundles = std::move(bundles);
  out.bins.assign(out.bundles.size() * out.rows, 0);
  for (std::size_t g = 0; g < out.bundles.size(); ++g) {
    const auto& bundle = out.bundles[g];
    if (bundle.total_bins > kMaxBundleBins) throw ModelError("efb: bundle exceeds 256 bins");
    BinIndex* column = out.bins.data() + g * out.rows;
    for (std::size_t m = 0; m < bundle.members.size(); ++m) {
      const std::size_t f = bundle.members[m];
      const auto source = binned.column(f);
      const int def = binned.default_bin[f];
      for (std::size_t r = 0; r < out.rows; ++r) {
        const int b = source[r];
        if (b == def || column[r] != 0) continue;
        column[r] = static_cast<BinIndex>(bundle.offsets[m] + (b < def ? b : b - 1));
      }
    }
  }
  return out;
}

bool decode_bundle_bin(const FeatureBundle& bundle, const BinnedMatrix& binned, int bundle_bin,
                       std::size_t& feature, int& feature_bin) {
  if (bundle_bin == 0) return false;
  for (std::size_t m = 0; m < bundle.members.size(); ++m) {
    const std::size_t f = bundle.members[m];
    const int lo = bundle.offsets[m];
    const int hi = lo + binned.num_bins[f] - 1;
    if (bundle_bin >= lo && bundle_bin < hi) {
      const int rank = bundle_bin - lo;
      const int def = binned.default_bin[f];
      feature = f;
      feature_bin = rank < def ? rank : rank + 1;
      return true;
    }
  }
  return false;
}

}  // namespace edudss::gbdt
