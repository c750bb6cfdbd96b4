#include "edudss/gbdt/binning.hpp"

#include <algorithm>
#include <cmath>

#include "edudss/common/error.hpp"

namespace edudss::gbdt {

namespace {

// A cut between neighbouring distinct values a < b such that a <= cut < b.
double cut_between(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return (mid >= b || mid < a) ? a : mid;
}

}  // namespace

std::vector<double> FeatureBinner::compute_cuts(std::vector<double> values, int max_bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> distinct;
  std::vector<std::size_t> counts;
  for (const double v : values) {
    if (distinct.empty() || v != distinct.back()) {
      distinct.push_back(v);
      counts.push_back(1);
    } else {
      ++counts.back();
    }
  }

  std::vector<double> cuts;
  if (distinct.size() <= 1) return cuts;
  if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
    cuts.reserve(distinct.size() - 1);
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
      cuts.push_back(cut_between(distinct[i], distinct[i + 1]));
    }
    return cuts;
  }

  // Close a bin once it holds its share of the rows still unassigned, so a
  // heavy value does not starve the bins after it.
  const std::size_t n = values.size();
  std::size_t assigned = 0;
  std::size_t in_bin = 0;
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    in_bin += counts[i];
    const std::size_t bins_left = static_cast<std::size_t>(max_bins) - cuts.size();
    if (bins_left <= 1) break;
    const double share = static_cast<double>(n - assigned) / static_cast<double>(bins_left);
    if (static_cast<double>(in_bin) >= share) {
      cuts.push_back(cut_between(distinct[i], distinct[i + 1]));
      assigned += in_bin;
      in_bin = 0;
    }
  }
  return cuts;
}

FeatureBinner FeatureBinner::fit(const FeatureMatrix& features, int max_bins, Execution exec) {
  if (max_bins < 2 || max_bins > kMaxBinsLimit) {
    throw UsageError("binning: max_bins must lie in [2, 255]");
  }
  FeatureBinner binner;
  const std::size_t cols = features.cols();
  const std::size_t rows = features.rows();
  binner.cuts_.resize(cols);
  const auto fit_column = [&](std::size_t f) {
    std::vector<double> column(rows);
    for (std::size_t r = 0; r < rows; ++r) column[r] = features.at(r, f);
    binner.cuts_[f] = compute_cuts(std::move(column), max_bins);
  };
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(cols); ++f) {
      fit_column(static_cast<std::size_t>(f));
    }
  } else {
    for (std::size_t f = 0; f < cols; ++f) fit_column(f);
  }
  return binner;
}

BinIndex FeatureBinner::bin(std::size_t feature, double value) const {
  const auto& cuts = cuts_[feature];
  const auto it = std::lower_bound(cuts.begin(), cuts.end(), value);
  return static_cast<BinIndex>(it - cuts.begin());
}

BinnedMatrix FeatureBinner::apply(const FeatureMatrix& features, Execution exec) const {
  if (features.cols() != cuts_.size()) {
    throw ModelError("binning: feature count mismatch");
  }
  BinnedMatrix out;
  out.rows = features.rows();
  out.cols = features.cols();
  out.bins.resize(out.rows * out.cols);
  out.num_bins.resize(out.cols);
  out.default_bin.resize(out.cols);

  const auto bin_column = [&](std::size_t f) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_bins(f)), 0);
    BinIndex* column = out.bins.data() + f * out.rows;
    for (std::size_t r = 0; r < out.rows; ++r) {
      column[r] = bin(f, features.at(r, f));
      ++counts[column[r]];
    }
    out.num_bins[f] = num_bins(f);
    const auto most = std::max_element(counts.begin(), counts.end());
    out.default_bin[f] = static_cast<BinIndex>(most - counts.begin());
  };
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(out.cols); ++f) {
      bin_column(static_cast<std::size_t>(f));
    }
  } else {
    for (std::size_t f = 0; f < out.cols; ++f) bin_column(f);
  }
  return out;
}

}  // namespace edudss::gbdt
