#pragma once

#include <cstddef>
#include <cstdint>

#include "edudss/data/record.hpp"

namespace edudss::data {

// Seeded stand-in for the public student-performance file: same columns and
// level sets, similar marginal distributions, an additive score with integer
// rounding, a small share of large positive outliers, and ~1% missing cells in
// three categorical columns. Used for demos and tests when the real CSV is not
// available.
Dataset generate_student_data(std::size_t rows, std::uint64_t seed);

}  // namespace edudss::data
