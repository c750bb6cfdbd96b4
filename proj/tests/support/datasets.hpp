#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edudss/common/matrix.hpp"
#include "edudss/data/record.hpp"

namespace edudss::testing {

struct ReferenceData {
  data::Dataset dataset;
  std::string source;  // "kaggle:<path>" or "surrogate"
  bool is_kaggle = false;
};

// The public student-performance CSV when EDUDSS_KAGGLE_CSV or
// data/StudentPerformanceFactors.csv exists (targets clamped into [0, 100]),
// otherwise the seeded surrogate with 6607 rows.
ReferenceData reference_student_data();

std::filesystem::path source_dir();
std::filesystem::path feedback_fixture_path();

struct Regression {
  FeatureMatrix features;
  std::vector<double> targets;
};

// Smooth nonlinear target over uniform features plus Gaussian noise.
Regression random_regression(std::size_t rows, std::size_t cols, std::uint64_t seed);

// `blocks` one-hot groups of `levels` indicator columns each (exactly one
// column per block is 1 in every row), with a target additive over blocks.
Regression one_hot_blocks(std::size_t rows, std::size_t blocks, std::size_t levels,
                          std::uint64_t seed);

}  // namespace edudss::testing
