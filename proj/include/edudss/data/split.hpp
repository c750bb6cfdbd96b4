#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "edudss/data/record.hpp"

namespace edudss::data {

inline constexpr double kDefaultTestFraction = 0.2;
inline constexpr std::uint64_t kDefaultSplitSeed = 42;

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Seeded shuffle; the first round(n * test_fraction) shuffled positions form
// the test part. Both parts are returned in ascending row order.
SplitIndices split_indices(std::size_t n, double test_fraction, std::uint64_t seed);

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                  std::uint64_t seed);

}  // namespace edudss::data
