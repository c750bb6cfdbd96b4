#include "edudss/gbdt/histogram.hpp"

#include "edudss/common/error.hpp"

namespace edudss::gbdt {

NodeTotals sum_totals(std::span<const std::uint32_t> rows, std::span<const double> grad,
                      std::span<const double> hess) {
  NodeTotals totals;
  for (const auto r : rows) {
    totals.grad += grad[r];
    totals.hess += hess[r];
  }
  totals.count = static_cast<std::uint32_t>(rows.size());
  return totals;
}

Histogram::Histogram(std::span<const int> num_bins) {
  offsets_.resize(num_bins.size());
  sizes_.resize(num_bins.size());
  std::size_t total = 0;
  for (std::size_t f = 0; f < num_bins.size(); ++f) {
    offsets_[f] = total;
    sizes_[f] = static_cast<std::size_t>(num_bins[f]);
    total += sizes_[f];
  }
  bins_.assign(total, HistBin{});
}

void Histogram::assign_difference(const Histogram& parent, const Histogram& sibling) {
  offsets_ = parent.offsets_;
  sizes_ = parent.sizes_;
  bins_.resize(parent.bins_.size());
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    bins_[i].grad = parent.bins_[i].grad - sibling.bins_[i].grad;
    bins_[i].hess = parent.bins_[i].hess - sibling.bins_[i].hess;
    bins_[i].count = parent.bins_[i].count - sibling.bins_[i].count;
  }
}

HistogramBuilder HistogramBuilder::unbundled(const BinnedMatrix& binned) {
  HistogramBuilder builder;
  builder.binned_ = &binned;
  builder.groups_.reserve(binned.cols);
  for (std::size_t f = 0; f < binned.cols; ++f) {
    Group group;
    group.column = binned.column(f);
    group.targets.resize(static_cast<std::size_t>(binned.num_bins[f]));
    for (int b = 0; b < binned.num_bins[f]; ++b) {
      group.targets[static_cast<std::size_t>(b)] =
          b == binned.default_bin[f] ? BinTarget{} : BinTarget{static_cast<std::int32_t>(f), b};
    }
    builder.groups_.push_back(std::move(group));
  }
  return builder;
}

HistogramBuilder HistogramBuilder::bundled(const BinnedMatrix& binned,
                                           const BundledMatrix& bundled) {
  if (bundled.rows != binned.rows) throw ModelError("histogram: bundle row count mismatch");
  HistogramBuilder builder;
  builder.binned_ = &binned;
  builder.groups_.reserve(bundled.bundles.size());
  for (std::size_t g = 0; g < bundled.bundles.size(); ++g) {
    const auto& bundle = bundled.bundles[g];
    Group group;
    group.column = bundled.column(g);
    group.targets.resize(static_cast<std::size_t>(bundle.total_bins));
    for (int b = 0; b < bundle.total_bins; ++b) {
      std::size_t feature = 0;
      int feature_bin = 0;
      if (decode_bundle_bin(bundle, binned, b, feature, feature_bin)) {
        group.targets[static_cast<std::size_t>(b)] =
            BinTarget{static_cast<std::int32_t>(feature), feature_bin};
      }
    }
    builder.groups_.push_back(std::move(group));
  }
  return builder;
}

void HistogramBuilder::accumulate_group(const Group& group, std::span<const std::uint32_t> rows,
                                        std::span<const double> grad,
                                        std::span<const double> hess, Histogram& out) const {
  std::vector<HistBin> local(group.targets.size());
  const BinIndex* column = group.column.data();
  for (const auto r : rows) {
    HistBin& slot = local[column[r]];
    slot.grad += grad[r];
    slot.hess += hess[r];
    ++slot.count;
  }
  for (std::size_t b = 0; b < local.size(); ++b) {
    const auto& target = group.targets[b];
    if (target.feature < 0) continue;
    out.feature(static_cast<std::size_t>(target.feature))[static_cast<std::size_t>(target.bin)] =
        local[b];
  }
}

void HistogramBuilder::fill_default_bin(std::size_t feature, const NodeTotals& totals,
                                        Histogram& out) const {
  auto bins = out.feature(feature);
  const std::size_t def = binned_->default_bin[feature];
  double grad = 0.0;
  double hess = 0.0;
  std::uint32_t count = 0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (b == def) continue;
    grad += bins[b].grad;
    hess += bins[b].hess;
    count += bins[b].count;
  }
  bins[def] = HistBin{totals.grad - grad, totals.hess - hess, totals.count - count};
}

Histogram HistogramBuilder::build(std::span<const std::uint32_t> rows,
                                  std::span<const double> grad, std::span<const double> hess,
                                  const NodeTotals& totals, Execution exec) const {
  Histogram out(binned_->num_bins);
  const auto groups = static_cast<std::ptrdiff_t>(groups_.size());
  const auto features = static_cast<std::ptrdiff_t>(binned_->cols);
  if (exec == Execution::kParallel) {
    // Groups write disjoint feature ranges; each group's row order is fixed,
    // so the sums match the serial path bit for bit.
#pragma omp parallel
    {
#pragma omp for schedule(dynamic)
      for (std::ptrdiff_t g = 0; g < groups; ++g) {
        accumulate_group(groups_[static_cast<std::size_t>(g)], rows, grad, hess, out);
      }
#pragma omp for schedule(static)
      for (std::ptrdiff_t f = 0; f < features; ++f) {
        fill_default_bin(static_cast<std::size_t>(f), totals, out);
      }
    }
  } else {
    for (const auto& group : groups_) accumulate_group(group, rows, grad, hess, out);
    for (std::ptrdiff_t f = 0; f < features; ++f) {
      fill_default_bin(static_cast<std::size_t>(f), totals, out);
    }
  }
  return out;
}

Histogram build_histogram_reference(const BinnedMatrix& binned,
                                    std::span<const std::uint32_t> rows,
                                    std::span<const double> grad,
                                    std::span<const double> hess,
                                    const NodeTotals& totals) {
  Histogram out(binned.num_bins);
  for (const auto r : rows) {
    for (std::size_t f = 0; f < binned.cols; ++f) {
      const BinIndex b = binned.bins[f * binned.rows + r];
      if (b == binned.default_bin[f]) continue;
      auto& slot = out.feature(f)[b];
      slot.grad += grad[r];
      slot.hess += hess[r];
      ++slot.count;
    }
  }
  for (std::size_t f = 0; f < binned.cols; ++f) {
    auto bins = out.feature(f);
    const std::size_t def = binned.default_bin[f];
    NodeTotals rest;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      if (b == def) continue;
      rest.grad += bins[b].grad;
      rest.hess += bins[b].hess;
      rest.count += bins[b].count;
    }
    bins[def] = HistBin{totals.grad - rest.grad, totals.hess - rest.hess,
                        totals.count - rest.count};
  }
  return out;
}

}  // namespace edudss::gbdt
