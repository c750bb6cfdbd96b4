#include "edudss/data/schema.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <utility>

#include "edudss/common/checksum.hpp"
#include "edudss/common/error.hpp"

namespace edudss::data {

namespace {

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) words.push_back(word);
  return words;
}

std::vector<std::string> split_levels(std::string_view text) {
  std::vector<std::string> levels;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto bar = text.find('|', start);
    const auto piece = trim(text.substr(start, bar == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : bar - start));
    if (!piece.empty()) levels.emplace_back(piece);
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return levels;
}

ColumnSpec numeric(std::string name) {
  return {std::move(name), ColumnKind::kNumeric, {}, {}};
}

ColumnSpec categorical(std::string name, std::vector<std::string> levels) {
  return {std::move(name), ColumnKind::kCategorical, std::move(levels), {}};
}

}  // namespace

std::string_view to_string(ColumnKind kind) noexcept {
  return kind == ColumnKind::kCategorical ? "categorical" : "numeric";
}

bool ColumnSpec::matches_header(std::string_view header) const {
  if (header == name) return true;
  return std::find(aliases.begin(), aliases.end(), header) != aliases.end();
}

bool ColumnSpec::allows_level(std::string_view level) const {
  return levels.empty() ||
         std::find(levels.begin(), levels.end(), level) != levels.end();
}

FeatureSchema::FeatureSchema(std::vector<ColumnSpec> columns, std::string target_name)
    : columns_(std::move(columns)), target_name_(std::move(target_name)) {
  if (target_name_.empty()) throw DataError("schema: target name is empty");
  std::set<std::string> seen{target_name_};
  for (const auto& column : columns_) {
    if (column.name.empty()) throw DataError("schema: empty column name");
    if (!seen.insert(column.name).second) {
      throw DataError("schema: duplicate column name '" + column.name + "'");
    }
    if (column.kind == ColumnKind::kNumeric && !column.levels.empty()) {
      throw DataError("schema: numeric column '" + column.name + "' lists levels");
    }
  }
}

FeatureSchema FeatureSchema::student_default() {
  const std::vector<std::string> low_medium_high{"Low", "Medium", "High"};
  const std::vector<std::string> yes_no{"Yes", "No"};
  std::vector<ColumnSpec> columns{
      numeric("Hours_Studied"),
      numeric("Attendance"),
      categorical("Parental_Involvement", low_medium_high),
      categorical("Access_to_Resources", low_medium_high),
      categorical("Extracurricular_Act", yes_no),
      numeric("Sleep_Hours"),
      numeric("Previous_Scores"),
      categorical("Motivation_Level", low_medium_high),
      categorical("Internet_Access", yes_no),
      numeric("Tutoring_Sessions"),
      categorical("Family_Income", low_medium_high),
      categorical("Teacher_Quality", low_medium_high),
      categorical("School_Type", {"Public", "Private"}),
      categorical("Peer_Influence", {"Positive", "Neutral", "Negative"}),
      numeric("Physical_Activity"),
      categorical("Learning_Disabilities", yes_no),
      categorical("Parental_Edu_Level", {"High School", "College", "Postgraduate"}),
      categorical("Distance_from_Home", {"Near", "Moderate", "Far"}),
      categorical("Gender", {"Male", "Female"}),
  };
  // Spellings used by the public Kaggle file.
  columns[4].aliases = {"Extracurricular_Activities"};
  columns[16].aliases = {"Parental_Education_Level"};
  return FeatureSchema(std::move(columns), "Exam_Score");
}

FeatureSchema FeatureSchema::parse(std::string_view text) {
  std::vector<ColumnSpec> columns;
  std::string target;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    const auto raw = text.substr(start, end == std::string_view::npos
                                            ? std::string_view::npos
                                            : end - start);
    start = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    // '#' starts a comment anywhere on the line.
    auto line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = "schema line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw DataError(where + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "target") {
      target = std::string(value);
    } else if (key == "column") {
      const auto words = split_words(value);
      if (words.size() < 2) throw DataError(where + ": expected 'column = <name> <kind> [levels]'");
      ColumnSpec spec;
      spec.name = words[0];
      if (words[1] == "numeric") {
        spec.kind = ColumnKind::kNumeric;
      } else if (words[1] == "categorical") {
        spec.kind = ColumnKind::kCategorical;
      } else {
        throw DataError(where + ": unknown column kind '" + words[1] + "'");
      }
      // Levels are whatever follows the kind keyword.
      const auto kind_pos = value.find(words[1], value.find(words[0]) + words[0].size());
      const auto rest = trim(value.substr(kind_pos + words[1].size()));
      if (!rest.empty()) {
        if (spec.kind == ColumnKind::kNumeric) {
          throw DataError(where + ": numeric column cannot list levels");
        }
        spec.levels = split_levels(rest);
      }
      columns.push_back(std::move(spec));
    } else if (key == "alias") {
      const auto words = split_words(value);
      if (words.size() != 2) throw DataError(where + ": expected 'alias = <column> <header>'");
      auto it = std::find_if(columns.begin(), columns.end(),
                             [&](const ColumnSpec& c) { return c.name == words[0]; });
      if (it == columns.end()) {
        throw DataError(where + ": alias for unknown column '" + words[0] + "'");
      }
      it->aliases.push_back(words[1]);
    } else {
      throw DataError(where + ": unknown key '" + std::string(key) + "'");
    }
  }
  if (target.empty()) throw DataError("schema: missing 'target = <name>' entry");
  return FeatureSchema(std::move(columns), std::move(target));
}

FeatureSchema FeatureSchema::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

std::string FeatureSchema::to_text() const {
  std::ostringstream out;
  out << "target = " << target_name_ << '\n';
  for (const auto& column : columns_) {
    out << "column = " << column.name << ' ' << to_string(column.kind);
    for (std::size_t i = 0; i < column.levels.size(); ++i) {
      out << (i == 0 ? " " : "|") << column.levels[i];
    }
    out << '\n';
  }
  for (const auto& column : columns_) {
    for (const auto& alias : column.aliases) {
      out << "alias = " << column.name << ' ' << alias << '\n';
    }
  }
  return out.str();
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& column : columns_) out.push_back(column.name);
  return out;
}

}  // namespace edudss::data
