#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edudss::data {

enum class ColumnKind { kCategorical, kNumeric };

std::string_view to_string(ColumnKind kind) noexcept;

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Allowed levels for categorical columns. Empty means "any level"; the
  // fitted encoder then defines the level set.
  std::vector<std::string> levels;
  // Alternative header spellings accepted by the CSV loader.
  std::vector<std::string> aliases;

  bool is_categorical() const noexcept { return kind == ColumnKind::kCategorical; }
  bool matches_header(std::string_view header) const;
  bool allows_level(std::string_view level) const;
};

// Ordered input columns plus the name of the regression target. The target is
// not part of `columns()`; in CSV files it is the trailing column.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  FeatureSchema(std::vector<ColumnSpec> columns, std::string target_name);

  // The 19-input student-performance layout with Exam_Score as target.
  static FeatureSchema student_default();

  // Key-value text format:
  //   target = Exam_Score
  //   column = Hours_Studied numeric
  //   column = Parental_Involvement categorical Low|Medium|High
  //   alias  = Extracurricular_Act Extracurricular_Activities
  // Blank lines and '#' comments are ignored. Level lists are '|'-separated
  // so that levels may contain spaces ("High School").
  static FeatureSchema parse(std::string_view text);
  static FeatureSchema load(const std::filesystem::path& path);
  std::string to_text() const;

  const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }
  const ColumnSpec& column(std::size_t index) const { return columns_.at(index); }
  std::size_t size() const noexcept { return columns_.size(); }
  const std::string& target_name() const noexcept { return target_name_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  std::vector<std::string> names() const;

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<ColumnSpec> columns_;
  std::string target_name_;
};

inline bool operator==(const ColumnSpec& a, const ColumnSpec& b) {
  return a.name == b.name && a.kind == b.kind && a.levels == b.levels &&
         a.aliases == b.aliases;
}

}  // namespace edudss::data
