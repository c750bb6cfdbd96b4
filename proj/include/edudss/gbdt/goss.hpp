#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace edudss::gbdt {

struct GossSample {
  std::vector<std::uint32_t> indices;  // ascending row order
  std::vector<double> weights;         // parallel to indices
};

// Gradient-based one-side sampling. Keeps the ceil(a*N) rows with the largest
// |gradient| (ties: lower index first) at weight 1 and draws ceil(b*N) of the
// remaining rows uniformly without replacement at weight (1-a)/b.
// Deterministic for a given seed. Throws UsageError on invalid rates.
GossSample goss_sample(std::span<const double> gradients, double top_rate, double other_rate,
                       std::uint64_t seed);

}  // namespace edudss::gbdt
