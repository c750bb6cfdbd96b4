#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edudss/gbdt/binning.hpp"
#include "edudss/gbdt/config.hpp"
#include "edudss/gbdt/efb.hpp"

namespace edudss::gbdt {

// Weighted gradient sum, "hessian" sum (the instance weight under squared
// loss) and raw instance count for one (feature, bin).
struct HistBin {
  double grad = 0.0;
  double hess = 0.0;
  std::uint32_t count = 0;
};

struct NodeTotals {
  double grad = 0.0;
  double hess = 0.0;
  std::uint32_t count = 0;
};

// Sums over `rows` in the given order.
NodeTotals sum_totals(std::span<const std::uint32_t> rows, std::span<const double> grad,
                      std::span<const double> hess);

// Per-feature histograms for one tree node, stored flat.
class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(std::span<const int> num_bins);

  std::size_t num_features() const noexcept { return offsets_.size(); }
  std::span<HistBin> feature(std::size_t f) {
    return {bins_.data() + offsets_[f], sizes_[f]};
  }
  std::span<const HistBin> feature(std::size_t f) const {
    return {bins_.data() + offsets_[f], sizes_[f]};
  }

  // this = parent - sibling, bin by bin.
  void assign_difference(const Histogram& parent, const Histogram& sibling);

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> sizes_;
  std::vector<HistBin> bins_;
};

// Builds node histograms by scanning accumulation columns: one per feature
// (unbundled) or one per feature bundle. Either way the result is decoded
// into per-feature histograms, and each feature's default bin is set to
// node totals minus its other bins. That makes bundled and unbundled builds
// bit-identical when bundles are conflict-free.
class HistogramBuilder {
 public:
  static HistogramBuilder unbundled(const BinnedMatrix& binned);
  static HistogramBuilder bundled(const BinnedMatrix& binned, const BundledMatrix& bundled);

  Histogram build(std::span<const std::uint32_t> rows, std::span<const double> grad,
                  std::span<const double> hess, const NodeTotals& totals,
                  Execution exec = Execution::kParallel) const;

  std::size_t num_groups() const noexcept { return groups_.size(); }

 private:
  struct BinTarget {
    std::int32_t feature = -1;  // -1: not accumulated into any feature
    std::int32_t bin = 0;
  };
  struct Group {
    std::span<const BinIndex> column;
    std::vector<BinTarget> targets;  // indexed by group bin
  };

  void accumulate_group(const Group& group, std::span<const std::uint32_t> rows,
                        std::span<const double> grad, std::span<const double> hess,
                        Histogram& out) const;
  void fill_default_bin(std::size_t feature, const NodeTotals& totals, Histogram& out) const;

  const BinnedMatrix* binned_ = nullptr;
  std::vector<Group> groups_;
};

// Straightforward row-outer reference over unbundled features; kept for
// testing the builder.
Histogram build_histogram_reference(const BinnedMatrix& binned,
                                    std::span<const std::uint32_t> rows,
                                    std::span<const double> grad,
                                    std::span<const double> hess,
                                    const NodeTotals& totals);

}  // namespace edudss::gbdt
