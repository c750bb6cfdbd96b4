#include "edudss/store/dataset_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>

#include "edudss/common/checksum.hpp"
#include "edudss/common/error.hpp"
#include "edudss/data/csv.hpp"
#include "edudss/data/record_json.hpp"
#include "edudss/data/split.hpp"
#include "edudss/gbdt/model_io.hpp"

namespace edudss::store {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kStoreFormatVersion = 1;
constexpr const char* kStoreFile = "store.json";
constexpr const char* kOriginalFile = "original.csv";
constexpr const char* kFeedbackFile = "feedback.jsonl";
constexpr const char* kAuditFile = "audit.jsonl";
constexpr const char* kLockFile = "LOCK";
constexpr const char* kVersionsDir = "versions";
constexpr const char* kTempPrefix = ".tmp-";

[[noreturn]] void throw_io(const fs::path& path, const char* what) {
  throw IntegrityError(path.filename().string(),
                       std::string(what) + " failed: " + std::strerror(errno));
}

void write_all(int fd, std::string_view bytes, const fs::path& path) {
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_io(path, "write");
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

void fsync_path(const fs::path& path, int flags) {
  const int fd = ::open(path.c_str(), flags);
  if (fd < 0) throw_io(path, "open");
  if (::fsync(fd) != 0) {
    ::close(fd);
    throw_io(path, "fsync");
  }
  ::close(fd);
}

void fsync_dir(const fs::path& dir) { fsync_path(dir, O_RDONLY | O_DIRECTORY); }

void write_file_synced(const fs::path& path, std::string_view bytes) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw_io(path, "open");
  try {
    write_all(fd, bytes, path);
    if (::fsync(fd) != 0) throw_io(path, "fsync");
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
}

void replace_file_atomically(const fs::path& path, std::string_view bytes) {
  auto temp = path;
  temp += ".tmp";
  write_file_synced(temp, bytes);
  fs::rename(temp, path);
  fsync_dir(path.parent_path());
}

void append_synced(const fs::path& path, std::string_view bytes) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw_io(path, "open");
  try {
    write_all(fd, bytes, path);
    if (::fsync(fd) != 0) throw_io(path, "fsync");
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
}

// Checksummed JSON: crc is computed over the dump of the object without its
// "crc" member.
std::string seal(json object) {
  object.erase("crc");
  object["crc"] = crc32_hex(object.dump());
  return object.dump();
}

bool seal_intact(json object) {
  const auto it = object.find("crc");
  if (it == object.end() || !it->is_string()) return false;
  const auto expected = it->get<std::string>();
  object.erase("crc");
  return crc32_hex(object.dump()) == expected;
}

json parse_json_file(const fs::path& path) {
  const auto name = path.filename().string();
  if (!fs::exists(path)) throw IntegrityError(name, "file is missing");
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw IntegrityError(name, std::string("not valid JSON: ") + e.what());
  }
}

std::optional<int> parse_version_dir(const std::string& name) {
  int value = 0;
  const auto* end = name.data() + name.size();
  const auto [ptr, ec] = std::from_chars(name.data(), end, value);
  if (ec != std::errc() || ptr != end || value < 0) return std::nullopt;
  return value;
}

std::string feedback_row_id(std::uint64_t batch, std::uint64_t seq) {
  return "fb-" + std::to_string(batch) + "-" + std::to_string(seq);
}

VersionInfo info_from_manifest(const json& manifest) {
  VersionInfo info;
  info.version_id = manifest.at("version_id").get<int>();
  if (!manifest.at("parent_version").is_null()) {
    info.parent_version = manifest.at("parent_version").get<int>();
  }
  info.trained_on_count = manifest.at("trained_on_count").get<std::size_t>();
  info.fit_rows = manifest.at("fit_rows").get<std::size_t>();
  info.created_at = manifest.at("created_at").get<std::string>();
  info.phase_label = manifest.at("phase").get<std::string>();
  return info;
}

int acquire_lock(const fs::path& root) {
  const auto path = root / kLockFile;
  const int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw_io(path, "open");
  if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd);
    throw ConflictError("store at " + root.string() + " is locked by another writer");
  }
  return fd;
}

}  // namespace

bool DatasetStore::exists(const fs::path& root) { return fs::exists(root / kStoreFile); }

DatasetStore DatasetStore::initialize(const fs::path& root, const data::Dataset& original,
                                      double test_fraction, std::uint64_t split_seed) {
  fs::create_directories(root);
  if (exists(root)) throw ConflictError("a store already exists at " + root.string());
  for (const auto& row : original.rows) {
    data::validate_record(row, original.schema, /*require_target=*/true);
  }
  const auto indices = data::split_indices(original.size(), test_fraction, split_seed);

  DatasetStore store;
  store.root_ = root;
  store.mode_ = OpenMode::kWriter;
  store.lock_fd_ = acquire_lock(root);

  const auto csv = data::to_csv(original, /*include_target=*/true);
  write_file_synced(root / kOriginalFile, csv);
  fs::create_directories(root / kVersionsDir);
  fsync_dir(root);

  json meta = {{"format", "edudss.store"},
               {"version", kStoreFormatVersion},
               {"schema", original.schema.to_text()},
               {"test_fraction", test_fraction},
               {"split_seed", split_seed},
               {"original_rows", original.size()},
               {"original_crc", crc32_hex(csv)},
               {"test_indices", indices.test}};
  // store.json is the commit point: until it exists the directory is not a store.
  replace_file_atomically(root / kStoreFile, seal(std::move(meta)));

  store.load_metadata();
  store.load_feedback();
  return store;
}

DatasetStore DatasetStore::open(const fs::path& root, OpenMode mode) {
  if (!exists(root)) throw DataError("no store at " + root.string() + " (run ingest first)");
  DatasetStore store;
  store.root_ = root;
  store.mode_ = mode;
  if (mode == OpenMode::kWriter) {
    store.lock_fd_ = acquire_lock(root);
    // Leftovers from an interrupted put_version were never committed.
    if (fs::exists(root / kVersionsDir)) {
      for (const auto& entry : fs::directory_iterator(root / kVersionsDir)) {
        if (entry.path().filename().string().starts_with(kTempPrefix)) {
          fs::remove_all(entry.path());
        }
      }
    }
  }
  store.load_metadata();
  store.load_feedback();
  return store;
}

DatasetStore::DatasetStore(DatasetStore&& other) noexcept { *this = std::move(other); }

DatasetStore& DatasetStore::operator=(DatasetStore&& other) noexcept {
  if (this != &other) {
    release_lock();
    root_ = std::move(other.root_);
    mode_ = other.mode_;
    lock_fd_ = std::exchange(other.lock_fd_, -1);
    original_ = std::move(other.original_);
    test_fraction_ = other.test_fraction_;
    split_seed_ = other.split_seed_;
    test_indices_ = std::move(other.test_indices_);
    train_indices_ = std::move(other.train_indices_);
    feedback_ = std::move(other.feedback_);
    next_batch_ = other.next_batch_;
    committed_feedback_bytes_ = other.committed_feedback_bytes_;
    fault_injector_ = std::move(other.fault_injector_);
  }
  return *this;
}

DatasetStore::~DatasetStore() { release_lock(); }

void DatasetStore::release_lock() noexcept {
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
    lock_fd_ = -1;
  }
}

void DatasetStore::require_writer(std::string_view operation) const {
  if (mode_ != OpenMode::kWriter) {
    throw UsageError(std::string(operation) + ": store was opened read-only");
  }
}

void DatasetStore::inject(std::string_view stage) const {
  if (fault_injector_) fault_injector_(stage);
}

void DatasetStore::load_metadata() {
  const auto meta = parse_json_file(root_ / kStoreFile);
  if (!seal_intact(meta)) throw IntegrityError(kStoreFile, "checksum mismatch");
  try {
    if (meta.at("format") != "edudss.store") {
      throw IntegrityError(kStoreFile, "not a store document");
    }
    if (meta.at("version").get<int>() != kStoreFormatVersion) {
      throw IntegrityError(kStoreFile, "unsupported store version " +
                                           meta.at("version").dump());
    }
    const auto schema = data::FeatureSchema::parse(meta.at("schema").get<std::string>());
    test_fraction_ = meta.at("test_fraction").get<double>();
    split_seed_ = meta.at("split_seed").get<std::uint64_t>();
    const auto rows = meta.at("original_rows").get<std::size_t>();
    const auto expected_crc = meta.at("original_crc").get<std::string>();
    test_indices_ = meta.at("test_indices").get<std::vector<std::size_t>>();

    const auto csv_path = root_ / kOriginalFile;
    if (!fs::exists(csv_path)) throw IntegrityError(kOriginalFile, "file is missing");
    const auto csv = read_file(csv_path);
    if (crc32_hex(csv) != expected_crc) {
      throw IntegrityError(kOriginalFile, "checksum mismatch");
    }
    original_ = data::parse_csv(csv, schema, {}, kOriginalFile);
    if (original_.size() != rows) {
      throw IntegrityError(kOriginalFile, "row count differs from store.json");
    }
  } catch (const json::exception& e) {
    throw IntegrityError(kStoreFile, std::string("malformed: ") + e.what());
  }

  std::vector<bool> is_test(original_.size(), false);
  for (const auto index : test_indices_) {
    if (index >= original_.size()) throw IntegrityError(kStoreFile, "test index out of range");
    is_test[index] = true;
  }
  train_indices_.clear();
  for (std::size_t i = 0; i < original_.size(); ++i) {
    if (!is_test[i]) train_indices_.push_back(i);
  }
}

// Lines are grouped into batches by (batch, batch_size, seq). Only complete
// batches count. An incomplete batch or unterminated line at the end of the
// file is the trace of an interrupted append and is dropped; any other
// damage is an integrity error.
void DatasetStore::load_feedback() {
  feedback_.clear();
  next_batch_ = 1;
  committed_feedback_bytes_ = 0;
  const auto path = root_ / kFeedbackFile;
  if (!fs::exists(path)) return;
  const auto text = read_file(path);

  std::vector<FeedbackEntry> pending;
  std::uint64_t pending_size = 0;
  std::size_t pos = 0;
  std::size_t line_number = 0;
  while (pos < text.size()) {
    const auto newline = text.find('\n', pos);
    if (newline == std::string::npos) break;
    ++line_number;
    const auto where = "line " + std::to_string(line_number);
    json line;
    try {
      line = json::parse(std::string_view(text).substr(pos, newline - pos));
    } catch (const json::exception&) {
      throw IntegrityError(kFeedbackFile, where + ": not valid JSON");
    }
    if (!seal_intact(line)) throw IntegrityError(kFeedbackFile, where + ": checksum mismatch");

    FeedbackEntry entry;
    std::uint64_t batch_size = 0;
    try {
      entry.batch = line.at("batch").get<std::uint64_t>();
      entry.seq = line.at("seq").get<std::uint64_t>();
      batch_size = line.at("batch_size").get<std::uint64_t>();
      entry.row_id = line.at("row_id").get<std::string>();
      entry.submitted_at = line.at("submitted_at").get<std::string>();
      entry.note = line.at("note").get<std::string>();
      entry.record = data::record_from_json(line.at("record"), original_.schema, true);
    } catch (const json::exception& e) {
      throw IntegrityError(kFeedbackFile, where + ": " + e.what());
    } catch (const DataError& e) {
      throw IntegrityError(kFeedbackFile, where + ": " + e.what());
    }

    if (pending.empty()) {
      if (entry.batch < next_batch_ || entry.seq != 0 || batch_size == 0) {
        throw IntegrityError(kFeedbackFile, where + ": out-of-order batch header");
      }
      pending_size = batch_size;
    } else if (entry.batch != pending.front().batch || batch_size != pending_size ||
               entry.seq != pending.size()) {
      throw IntegrityError(kFeedbackFile, where + ": batch " +
                                              std::to_string(pending.front().batch) +
                                              " is interrupted by another batch");
    }
    pending.push_back(std::move(entry));
    pos = newline + 1;
    if (pending.size() == pending_size) {
      next_batch_ = pending.front().batch + 1;
      for (auto& e : pending) feedback_.push_back(std::move(e));
      pending.clear();
      committed_feedback_bytes_ = pos;
    }
  }
}

data::Dataset DatasetStore::test_set() const { return original_.select(test_indices_); }

data::Dataset DatasetStore::training_set(std::optional<std::size_t> row_count) const {
  const std::size_t count = row_count.value_or(this->row_count());
  if (count < original_.size() || count > this->row_count()) {
    throw UsageError("training_set: row count " + std::to_string(count) +
                     " outside [" + std::to_string(original_.size()) + ", " +
                     std::to_string(this->row_count()) + "]");
  }
  auto out = original_.select(train_indices_);
  for (std::size_t i = 0; i < count - original_.size(); ++i) {
    auto record = feedback_[i].record;
    record.id = feedback_[i].row_id;
    out.append(std::move(record), data::Provenance::kFeedback);
  }
  return out;
}

std::optional<data::StudentRecord> DatasetStore::find_record(std::string_view id) const {
  if (id.starts_with("row-")) {
    std::size_t index = 0;
    const auto digits = id.substr(4);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && index < original_.size()) {
      return original_.rows[index];
    }
  }
  for (const auto& entry : feedback_) {
    if (entry.row_id == id) return entry.record;
  }
  for (auto it = feedback_.rbegin(); it != feedback_.rend(); ++it) {
    if (it->record.id == id) return it->record;
  }
  return std::nullopt;
}

std::vector<std::string> DatasetStore::append_feedback(
    const std::vector<data::StudentRecord>& records, const std::string& note,
    const std::string& submitted_at) {
  require_writer("append_feedback");
  if (records.empty()) throw DataError("feedback batch is empty");
  for (const auto& record : records) {
    data::validate_record(record, original_.schema, /*require_target=*/true);
  }

  const auto path = root_ / kFeedbackFile;
  // Drop the remains of an append interrupted earlier in this process.
  if (fs::exists(path) && fs::file_size(path) != committed_feedback_bytes_) {
    fs::resize_file(path, committed_feedback_bytes_);
  }

  const std::uint64_t batch = next_batch_;
  std::vector<FeedbackEntry> entries;
  std::string head;
  std::string tail;
  for (std::size_t i = 0; i < records.size(); ++i) {
    FeedbackEntry entry;
    entry.batch = batch;
    entry.seq = i;
    entry.row_id = feedback_row_id(batch, i);
    entry.submitted_at = submitted_at;
    entry.note = note;
    entry.record = records[i];
    json line = {{"batch", batch},
                 {"batch_size", records.size()},
                 {"seq", i},
                 {"row_id", entry.row_id},
                 {"submitted_at", submitted_at},
                 {"note", note},
                 {"record", data::record_to_json(records[i], original_.schema)}};
    auto& buffer = (i < records.size() / 2) ? head : tail;
    buffer += seal(std::move(line));
    buffer += '\n';
    entries.push_back(std::move(entry));
  }

  if (fault_injector_) {
    append_synced(path, head);
    inject("feedback-partial");
    append_synced(path, tail);
  } else {
    append_synced(path, head + tail);
  }

  committed_feedback_bytes_ = fs::file_size(path);
  next_batch_ = batch + 1;
  std::vector<std::string> ids;
  for (auto& entry : entries) {
    ids.push_back(entry.row_id);
    feedback_.push_back(std::move(entry));
  }
  return ids;
}

void DatasetStore::put_version(const ModelVersion& version) {
  require_writer("put_version");
  const auto latest = latest_version();
  if (latest && version.version_id <= *latest) {
    throw ConflictError("version " + std::to_string(version.version_id) +
                        " does not follow latest version " + std::to_string(*latest));
  }
  if (version.version_id < 0) throw UsageError("version ids must be non-negative");

  const auto versions = root_ / kVersionsDir;
  fs::create_directories(versions);
  const auto name = std::to_string(version.version_id);
  const auto staging = versions / (kTempPrefix + name);
  const auto final_dir = versions / name;
  fs::remove_all(staging);
  fs::create_directories(staging);

  const std::string model_doc = gbdt::serialize_model(version.model);
  const std::string preprocessor_doc = version.preprocessor.to_json().dump();
  const std::string metrics_doc = version.metrics.to_json().dump();
  json manifest = {
      {"version_id", version.version_id},
      {"parent_version",
       version.parent_version ? json(*version.parent_version) : json(nullptr)},
      {"trained_on_count", version.trained_on_count},
      {"fit_rows", version.fit_rows},
      {"created_at", version.created_at},
      {"phase", version.metrics.phase_label},
      {"files",
       {{"model.json", crc32_hex(model_doc)},
        {"preprocessor.json", crc32_hex(preprocessor_doc)},
        {"metrics.json", crc32_hex(metrics_doc)}}}};

  write_file_synced(staging / "model.json", model_doc);
  write_file_synced(staging / "preprocessor.json", preprocessor_doc);
  write_file_synced(staging / "metrics.json", metrics_doc);
  write_file_synced(staging / "manifest.json", manifest.dump(2));
  fsync_dir(staging);
  inject("version-staged");
  fs::rename(staging, final_dir);
  fsync_dir(versions);
}

ModelVersion DatasetStore::get_version(int version_id) const {
  const auto dir = root_ / kVersionsDir / std::to_string(version_id);
  if (!fs::is_directory(dir)) {
    throw DataError("unknown model version " + std::to_string(version_id));
  }
  const auto prefix = "versions/" + std::to_string(version_id) + "/";
  const auto manifest = parse_json_file(dir / "manifest.json");

  auto checked = [&](const char* file) {
    const auto path = dir / file;
    if (!fs::exists(path)) throw IntegrityError(prefix + file, "file is missing");
    auto bytes = read_file(path);
    const auto expected = manifest.at("files").at(file).get<std::string>();
    if (crc32_hex(bytes) != expected) throw IntegrityError(prefix + file, "checksum mismatch");
    return bytes;
  };

  try {
    ModelVersion out;
    const auto info = info_from_manifest(manifest);
    out.version_id = info.version_id;
    out.parent_version = info.parent_version;
    out.trained_on_count = info.trained_on_count;
    out.fit_rows = info.fit_rows;
    out.created_at = info.created_at;
    out.model = gbdt::deserialize_model(checked("model.json"));
    out.preprocessor = data::PreprocessorState::from_json(json::parse(checked("preprocessor.json")));
    out.metrics = evaluate::MetricsReport::from_json(json::parse(checked("metrics.json")));
    return out;
  } catch (const json::exception& e) {
    throw IntegrityError(prefix + "manifest.json", std::string("malformed: ") + e.what());
  }
}

std::vector<VersionInfo> DatasetStore::list_versions() const {
  std::vector<VersionInfo> out;
  const auto versions = root_ / kVersionsDir;
  if (!fs::exists(versions)) return out;
  for (const auto& entry : fs::directory_iterator(versions)) {
    if (!entry.is_directory()) continue;
    const auto name = entry.path().filename().string();
    const auto id = parse_version_dir(name);
    if (!id) continue;
    const auto manifest = parse_json_file(entry.path() / "manifest.json");
    try {
      auto info = info_from_manifest(manifest);
      if (info.version_id != *id) {
        throw IntegrityError("versions/" + name + "/manifest.json", "version id mismatch");
      }
      out.push_back(std::move(info));
    } catch (const json::exception& e) {
      throw IntegrityError("versions/" + name + "/manifest.json",
                           std::string("malformed: ") + e.what());
    }
  }
  std::sort(out.begin(), out.end(),
            [](const VersionInfo& a, const VersionInfo& b) { return a.version_id < b.version_id; });
  return out;
}

std::optional<int> DatasetStore::latest_version() const {
  const auto versions = list_versions();
  if (versions.empty()) return std::nullopt;
  return versions.back().version_id;
}

std::size_t DatasetStore::watermark() const {
  const auto versions = list_versions();
  return versions.empty() ? 0 : versions.back().trained_on_count;
}

void DatasetStore::append_audit(json event) {
  require_writer("append_audit");
  append_synced(root_ / kAuditFile, event.dump() + "\n");
}

std::vector<json> DatasetStore::read_audit() const {
  std::vector<json> out;
  const auto path = root_ / kAuditFile;
  if (!fs::exists(path)) return out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception&) {
      if (in.peek() == std::char_traits<char>::eof()) break;  // torn final line
      throw IntegrityError(kAuditFile, "corrupt line");
    }
  }
  return out;
}

}  // namespace edudss::store
