#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "edudss/data/record.hpp"
#include "edudss/data/schema.hpp"
#include "edudss/store/model_version.hpp"

namespace edudss::store {

// One committed feedback row.
struct FeedbackEntry {
  std::string row_id;  // store-assigned, "fb-<batch>-<seq>"
  std::uint64_t batch = 0;
  std::uint64_t seq = 0;
  std::string submitted_at;
  std::string note;
  data::StudentRecord record;  // record.id is the caller's student id
};

enum class OpenMode {
  kWriter,    // takes the exclusive LOCK; mutations allowed
  kReadOnly,  // snapshot reader; no lock, mutations throw UsageError
};

// On-disk layout under root:
//   original.csv                   ingested rows, normalized
//   store.json                     schema, checksums, frozen test indices
//   feedback.jsonl                 append-only feedback log, one row per line
//   versions/<n>/                  model.json preprocessor.json metrics.json
//                                  manifest.json (checksums of the other three)
//   audit.jsonl                    append-only mutation log
//   LOCK                           advisory writer lock
class DatasetStore {
 public:
  // Test hook called at named points of multi-step writes. Throwing from it
  // simulates a crash at that point. Stages: "version-staged" (files
  // written, before the directory rename) and "feedback-partial" (half of a
  // batch written, before the rest).
  using FaultInjector = std::function<void(std::string_view stage)>;

  // Creates a store from an ingested dataset and freezes the test split.
  // Throws ConflictError if root already holds a store.
  static DatasetStore initialize(const std::filesystem::path& root, const data::Dataset& original,
                                 double test_fraction, std::uint64_t split_seed);
  // Throws DataError if root holds no store, IntegrityError on corruption,
  // ConflictError if another writer holds the lock.
  static DatasetStore open(const std::filesystem::path& root, OpenMode mode = OpenMode::kWriter);
  static bool exists(const std::filesystem::path& root);

  DatasetStore(DatasetStore&& other) noexcept;
  DatasetStore& operator=(DatasetStore&& other) noexcept;
  DatasetStore(const DatasetStore&) = delete;
  DatasetStore& operator=(const DatasetStore&) = delete;
  ~DatasetStore();

  const std::filesystem::path& root() const noexcept { return root_; }
  const data::FeatureSchema& schema() const noexcept { return original_.schema; }
  const data::Dataset& original() const noexcept { return original_; }
  double test_fraction() const noexcept { return test_fraction_; }
  std::uint64_t split_seed() const noexcept { return split_seed_; }
  const std::vector<std::size_t>& test_indices() const noexcept { return test_indices_; }
  const std::vector<std::size_t>& train_indices() const noexcept { return train_indices_; }
  const std::vector<FeedbackEntry>& feedback() const noexcept { return feedback_; }

  // Original rows plus committed feedback rows.
  std::size_t row_count() const noexcept { return original_.size() + feedback_.size(); }

  // Frozen held-out rows (original rows only).
  data::Dataset test_set() const;
  // Training rows as of a store row count: the non-test original rows
  // followed by the first (row_count - |original|) feedback rows. Defaults to
  // everything committed.
  data::Dataset training_set(std::optional<std::size_t> row_count = std::nullopt) const;

  // Looks up a row by store id (row-<i>, fb-<b>-<s>) or, failing that, the
  // most recent feedback row with that student id.
  std::optional<data::StudentRecord> find_record(std::string_view id) const;

  // Appends every record in one write + fsync; either all become visible on
  // reopen or none do. Records must carry targets. Returns the row ids.
  std::vector<std::string> append_feedback(const std::vector<data::StudentRecord>& records,
                                           const std::string& note,
                                           const std::string& submitted_at);

  // Stages the version under versions/.tmp-<n>, then renames into place.
  // Throws ConflictError if the id exists or does not exceed the latest id.
  void put_version(const ModelVersion& version);
  // Verifies manifest checksums. Throws DataError for unknown ids,
  // IntegrityError on mismatch.
  ModelVersion get_version(int version_id) const;
  std::vector<VersionInfo> list_versions() const;
  std::optional<int> latest_version() const;
  // trained_on_count of the latest version; 0 before the first training.
  std::size_t watermark() const;

  void append_audit(nlohmann::json event);
  std::vector<nlohmann::json> read_audit() const;

  void set_fault_injector(FaultInjector injector) { fault_injector_ = std::move(injector); }

 private:
  DatasetStore() = default;
  void require_writer(std::string_view operation) const;
  void load_metadata();
  void load_feedback();
  void release_lock() noexcept;
  void inject(std::string_view stage) const;

  std::filesystem::path root_;
  OpenMode mode_ = OpenMode::kReadOnly;
  int lock_fd_ = -1;
  data::Dataset original_;
  double test_fraction_ = 0.0;
  std::uint64_t split_seed_ = 0;
  std::vector<std::size_t> test_indices_;
  std::vector<std::size_t> train_indices_;
  std::vector<FeedbackEntry> feedback_;
  std::uint64_t next_batch_ = 1;
  std::uintmax_t committed_feedback_bytes_ = 0;
  FaultInjector fault_injector_;
};

}  // namespace edudss::store
