#include "edudss/data/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "edudss/common/checksum.hpp"
#include "edudss/common/error.hpp"

namespace edudss::data {

namespace {

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t");
  return text.substr(first, last - first + 1);
}

bool parse_number(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto result = std::from_chars(text.data(), end, out);
  return result.ec == std::errc() && result.ptr == end && std::isfinite(out);
}

std::string quote_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (const char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string format_number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  // Strip a UTF-8 byte-order mark.
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_has_content = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        in_quotes = true;
        row_has_content = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_has_content || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        row_has_content = false;
        ++line;
        break;
      default:
        field += ch;
        row_has_content = true;
    }
  }
  if (in_quotes) {
    throw DataError("csv: unterminated quoted field starting before line " +
                    std::to_string(line));
  }
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

Dataset parse_csv(std::string_view text, const FeatureSchema& schema,
                  const CsvOptions& options, std::string_view source_name) {
  const std::string source(source_name);
  auto rows = parse_csv_rows(text);
  if (rows.empty()) throw DataError(source + ": missing header row");

  const auto& header = rows.front();
  const std::size_t inputs = schema.size();
  bool has_target = false;
  if (header.size() == inputs + 1) {
    has_target = true;
  } else if (header.size() != inputs || options.target == TargetColumn::kRequired) {
    if (header.size() == inputs) {
      throw DataError(source + ": header is missing target column '" +
                      schema.target_name() + "'");
    }
    throw DataError(source + ": header has " + std::to_string(header.size()) +
                    " columns, expected " + std::to_string(inputs + 1));
  }
  for (std::size_t c = 0; c < inputs; ++c) {
    const auto name = trim(header[c]);
    if (!schema.column(c).matches_header(name)) {
      throw DataError(source + ": header column " + std::to_string(c + 1) + " is '" +
                      std::string(name) + "', expected '" + schema.column(c).name + "'");
    }
  }
  if (has_target && trim(header[inputs]) != schema.target_name()) {
    throw DataError(source + ": header column " + std::to_string(inputs + 1) + " is '" +
                    std::string(trim(header[inputs])) + "', expected '" +
                    schema.target_name() + "'");
  }

  Dataset data;
  data.schema = schema;
  data.rows.reserve(rows.size() - 1);
  data.provenance.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& fields = rows[r];
    const auto where = source + ": row " + std::to_string(r);
    if (fields.size() != header.size()) {
      throw DataError(where + ": has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(header.size()));
    }
    StudentRecord record;
    record.id = options.id_prefix + std::to_string(r - 1);
    record.values.reserve(inputs);
    for (std::size_t c = 0; c < inputs; ++c) {
      const auto& spec = schema.column(c);
      const auto cell = trim(fields[c]);
      if (cell.empty()) {
        record.values.emplace_back(std::monostate{});
      } else if (spec.is_categorical()) {
        if (!spec.allows_level(cell)) {
          throw DataError(where + ", column '" + spec.name + "': unknown level '" +
                          std::string(cell) + "'");
        }
        record.values.emplace_back(std::string(cell));
      } else {
        double value = 0.0;
        if (!parse_number(cell, value)) {
          throw DataError(where + ", column '" + spec.name + "': non-numeric value '" +
                          std::string(cell) + "'");
        }
        record.values.emplace_back(value);
      }
    }
    if (has_target) {
      const auto cell = trim(fields[inputs]);
      if (cell.empty()) {
        if (options.target == TargetColumn::kRequired) {
          throw DataError(where + ": missing " + schema.target_name());
        }
      } else {
        double value = 0.0;
        if (!parse_number(cell, value)) {
          throw DataError(where + ", column '" + schema.target_name() +
                          "': non-numeric value '" + std::string(cell) + "'");
        }
        if (value < kMinScore || value > kMaxScore) {
          if (options.out_of_range == OutOfRangeTarget::kReject) {
            throw DataError(where + ": " + schema.target_name() + " " + std::string(cell) +
                            " outside [0, 100]");
          }
          value = std::clamp(value, kMinScore, kMaxScore);
        }
        record.target = value;
      }
    }
    data.append(std::move(record), Provenance::kOriginal);
  }
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                 const CsvOptions& options) {
  if (!std::filesystem::exists(path)) {
    throw DataError("file not found: '" + path.string() + "'");
  }
  return parse_csv(read_file(path), schema, options, path.string());
}

std::string to_csv(const Dataset& data, bool include_target) {
  std::ostringstream out;
  const auto& schema = data.schema;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c > 0) out << ',';
    out << quote_field(schema.column(c).name);
  }
  if (include_target) out << ',' << quote_field(schema.target_name());
  out << '\n';
  for (const auto& row : data.rows) {
    for (std::size_t c = 0; c < row.values.size(); ++c) {
      if (c > 0) out << ',';
      const auto& cell = row.values[c];
      if (const auto* number = std::get_if<double>(&cell)) {
        out << format_number(*number);
      } else if (const auto* level = std::get_if<std::string>(&cell)) {
        out << quote_field(*level);
      }
    }
    if (include_target) {
      out << ',';
      if (row.target) out << format_number(*row.target);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace edudss::data
