#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "edudss/data/preprocess.hpp"
#include "edudss/evaluate/metrics.hpp"
#include "edudss/gbdt/model.hpp"

namespace edudss::store {

// A deployed (model, preprocessor) pair with its evaluation snapshot.
struct ModelVersion {
  int version_id = 0;
  std::optional<int> parent_version;
  gbdt::GBDTModel model;
  data::PreprocessorState preprocessor;
  // Store row count (original + feedback) when the version was trained.
  std::size_t trained_on_count = 0;
  // Rows actually fitted: trained_on_count minus the frozen test rows.
  std::size_t fit_rows = 0;
  evaluate::MetricsReport metrics;
  std::string created_at;
};

// Lightweight index entry read from a version manifest.
struct VersionInfo {
  int version_id = 0;
  std::optional<int> parent_version;
  std::size_t trained_on_count = 0;
  std::size_t fit_rows = 0;
  std::string created_at;
  std::string phase_label;
};

}  // namespace edudss::store
