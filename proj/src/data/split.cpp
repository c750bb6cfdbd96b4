#include "edudss/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edudss/common/error.hpp"
#include "edudss/common/rng.hpp"

namespace edudss::data {

SplitIndices split_indices(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw UsageError("split: test fraction must lie in (0, 1)");
  }
  if (n < 2) throw DataError("split: need at least 2 rows");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(std::span<std::size_t>(order), rng);

  const auto test_count = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * test_fraction));
  SplitIndices out;
  out.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_count));
  out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(test_count), order.end());
  std::sort(out.test.begin(), out.test.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                  std::uint64_t seed) {
  const auto indices = split_indices(data.size(), test_fraction, seed);
  return {data.select(indices.train), data.select(indices.test)};
}

}  // namespace edudss::data
