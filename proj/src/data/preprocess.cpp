#include "edudss/data/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "edudss/common/error.hpp"

namespace edudss::data {

using nlohmann::json;

LevelEncoder::LevelEncoder(std::vector<std::string> levels) : levels_(std::move(levels)) {
  std::sort(levels_.begin(), levels_.end());
  levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());
}

std::optional<int> LevelEncoder::encode(std::string_view level) const {
  const auto it = std::lower_bound(levels_.begin(), levels_.end(), level);
  if (it == levels_.end() || *it != level) return std::nullopt;
  return static_cast<int>(it - levels_.begin());
}

const std::string& LevelEncoder::decode(int code) const {
  if (code < 0 || static_cast<std::size_t>(code) >= levels_.size()) {
    throw DataError("encoder: code " + std::to_string(code) + " out of range");
  }
  return levels_[static_cast<std::size_t>(code)];
}

std::vector<std::string> PreprocessorState::feature_names() const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (const auto& column : columns) names.push_back(column.name);
  return names;
}

json PreprocessorState::to_json() const {
  json doc;
  doc["version"] = kFormatVersion;
  json cols = json::array();
  json encoders = json::object();
  json imputation = json::object();
  json scaler = json::object();
  for (const auto& column : columns) {
    cols.push_back({{"name", column.name}, {"kind", std::string(to_string(column.kind))}});
    if (column.kind == ColumnKind::kCategorical) {
      encoders[column.name] = column.encoder.levels();
      imputation[column.name] = column.mode;
    } else {
      imputation[column.name] = column.median;
      scaler[column.name] = {{"mean", column.mean}, {"std", column.stddev}};
    }
  }
  doc["columns"] = std::move(cols);
  doc["encoders"] = std::move(encoders);
  doc["imputation"] = std::move(imputation);
  doc["scaler"] = std::move(scaler);
  return doc;
}

PreprocessorState PreprocessorState::from_json(const json& doc) {
  try {
    if (!doc.is_object() || !doc.contains("version")) {
      throw ModelError("preprocessor document: missing 'version'");
    }
    const int version = doc.at("version").get<int>();
    if (version != kFormatVersion) {
      throw ModelError("preprocessor document: unsupported version " +
                       std::to_string(version) + " (expected " +
                       std::to_string(kFormatVersion) + ")");
    }
    PreprocessorState state;
    for (const auto& entry : doc.at("columns")) {
      ColumnState column;
      column.name = entry.at("name").get<std::string>();
      const auto kind = entry.at("kind").get<std::string>();
      if (kind == "categorical") {
        column.kind = ColumnKind::kCategorical;
        column.encoder =
            LevelEncoder(doc.at("encoders").at(column.name).get<std::vector<std::string>>());
        column.mode = doc.at("imputation").at(column.name).get<std::string>();
      } else if (kind == "numeric") {
        column.kind = ColumnKind::kNumeric;
        column.median = doc.at("imputation").at(column.name).get<double>();
        const auto& scale = doc.at("scaler").at(column.name);
        column.mean = scale.at("mean").get<double>();
        column.stddev = scale.at("std").get<double>();
      } else {
        throw ModelError("preprocessor document: unknown kind '" + kind + "'");
      }
      state.columns.push_back(std::move(column));
    }
    return state;
  } catch (const json::exception& e) {
    throw ModelError(std::string("preprocessor document: malformed (") + e.what() + ")");
  }
}

namespace {

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Most frequent level; ties go to the lexicographically smallest level.
std::string mode_of(const std::map<std::string, std::size_t>& counts) {
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [level, count] : counts) {
    if (count > best_count) {
      best = level;
      best_count = count;
    }
  }
  return best;
}

}  // namespace

PreprocessorState fit_preprocessor(const Dataset& train) {
  if (train.empty()) throw DataError("fit_preprocessor: training dataset is empty");
  const auto& schema = train.schema;
  PreprocessorState state;
  state.columns.reserve(schema.size());

  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& spec = schema.column(c);
    ColumnState column;
    column.name = spec.name;
    column.kind = spec.kind;
    if (spec.is_categorical()) {
      std::map<std::string, std::size_t> counts;
      for (const auto& row : train.rows) {
        if (const auto* level = std::get_if<std::string>(&row.values.at(c))) ++counts[*level];
      }
      if (counts.empty()) {
        throw DataError("fit_preprocessor: column '" + spec.name + "' has no observed values");
      }
      std::vector<std::string> levels;
      for (const auto& [level, count] : counts) levels.push_back(level);
      column.encoder = LevelEncoder(std::move(levels));
      column.mode = mode_of(counts);
    } else {
      std::vector<double> observed;
      observed.reserve(train.size());
      for (const auto& row : train.rows) {
        if (const auto* number = std::get_if<double>(&row.values.at(c))) {
          observed.push_back(*number);
        }
      }
      if (observed.empty()) {
        throw DataError("fit_preprocessor: column '" + spec.name + "' has no observed values");
      }
      column.median = median_of(observed);
      // Moments over the imputed column, in row order.
      const double n = static_cast<double>(train.size());
      double sum = 0.0;
      for (const auto& row : train.rows) {
        const auto* number = std::get_if<double>(&row.values[c]);
        sum += number ? *number : column.median;
      }
      column.mean = sum / n;
      double squares = 0.0;
      for (const auto& row : train.rows) {
        const auto* number = std::get_if<double>(&row.values[c]);
        const double delta = (number ? *number : column.median) - column.mean;
        squares += delta * delta;
      }
      column.stddev = std::sqrt(squares / n);
    }
    state.columns.push_back(std::move(column));
  }
  return state;
}

FeatureVector transform(const StudentRecord& record, const PreprocessorState& state,
                        UnseenLevelPolicy policy) {
  if (record.values.size() != state.size()) {
    throw DataError("transform: record '" + record.id + "' has " +
                    std::to_string(record.values.size()) + " values, expected " +
                    std::to_string(state.size()));
  }
  FeatureVector out;
  out.record_id = record.id;
  out.values.resize(state.size());
  for (std::size_t c = 0; c < state.size(); ++c) {
    const auto& column = state.columns[c];
    const auto& cell = record.values[c];
    if (column.kind == ColumnKind::kCategorical) {
      std::string_view level = column.mode;
      if (const auto* text = std::get_if<std::string>(&cell)) {
        level = *text;
      } else if (!is_missing(cell)) {
        throw DataError("transform: column '" + column.name + "' expects a categorical level");
      }
      auto code = column.encoder.encode(level);
      if (!code) {
        if (policy == UnseenLevelPolicy::kError) {
          throw DataError("transform: column '" + column.name + "' has unseen level '" +
                          std::string(level) + "'");
        }
        code = column.encoder.encode(column.mode);
      }
      out.values[c] = static_cast<double>(*code);
    } else {
      double value = column.median;
      if (const auto* number = std::get_if<double>(&cell)) {
        value = *number;
      } else if (!is_missing(cell)) {
        throw DataError("transform: column '" + column.name + "' expects a number");
      }
      out.values[c] = column.stddev > 0.0 ? (value - column.mean) / column.stddev : 0.0;
    }
  }
  return out;
}

TransformedData transform_dataset(const Dataset& data, const PreprocessorState& state,
                                  UnseenLevelPolicy policy) {
  TransformedData out;
  out.features = FeatureMatrix(data.size(), state.size());
  out.ids.reserve(data.size());
  std::size_t with_target = 0;
  for (const auto& row : data.rows) with_target += row.target.has_value() ? 1 : 0;
  if (with_target != 0 && with_target != data.size()) {
    throw DataError("transform_dataset: targets present on only some rows");
  }
  if (with_target != 0) out.targets.reserve(data.size());

  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto& row = data.rows[r];
    FeatureVector vector;
    try {
      vector = transform(row, state, policy);
    } catch (const DataError& e) {
      throw DataError("row " + std::to_string(r) + ": " + e.what());
    }
    std::copy(vector.values.begin(), vector.values.end(), out.features.row(r).begin());
    out.ids.push_back(row.id);
    if (row.target) out.targets.push_back(*row.target);
  }
  return out;
}

}  // namespace edudss::data
