#include "edudss/gbdt/goss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edudss/common/error.hpp"
#include "edudss/common/rng.hpp"

namespace edudss::gbdt {

namespace {

// ceil(rate * n), tolerant of products such as 0.1 * 30 = 3.0000000000000004.
std::size_t scaled_count(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n) - 1e-9));
}

}  // namespace

GossSample goss_sample(std::span<const double> gradients, double top_rate, double other_rate,
                       std::uint64_t seed) {
  if (!(top_rate > 0.0 && top_rate < 1.0) || !(other_rate > 0.0 && other_rate < 1.0) ||
      top_rate + other_rate > 1.0) {
    throw UsageError("goss: rates need 0 < a, 0 < b, a + b <= 1");
  }
  const std::size_t n = gradients.size();
  GossSample sample;
  if (n == 0) return sample;

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::fabs(gradients[a]) > std::fabs(gradients[b]);
  });

  const std::size_t top_k = std::min(std::max<std::size_t>(scaled_count(top_rate, n), 1), n);
  const std::size_t other_k = std::min(scaled_count(other_rate, n), n - top_k);
  const double amplify = (1.0 - top_rate) / other_rate;

  std::vector<std::pair<std::uint32_t, double>> picked;
  picked.reserve(top_k + other_k);
  for (std::size_t i = 0; i < top_k; ++i) picked.emplace_back(order[i], 1.0);

  // Partial Fisher-Yates over the remainder.
  std::vector<std::uint32_t> rest(order.begin() + static_cast<std::ptrdiff_t>(top_k),
                                  order.end());
  std::sort(rest.begin(), rest.end());
  Rng rng(seed);
  for (std::size_t i = 0; i < other_k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_below(rest.size() - i));
    std::swap(rest[i], rest[j]);
    picked.emplace_back(rest[i], amplify);
  }

  std::sort(picked.begin(), picked.end());
  sample.indices.reserve(picked.size());
  sample.weights.reserve(picked.size());
  for (const auto& [index, weight] : picked) {
    sample.indices.push_back(index);
    sample.weights.push_back(weight);
  }
  return sample;
}

}  // namespace edudss::gbdt
