#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "edudss/data/record.hpp"
#include "edudss/data/schema.hpp"

namespace edudss::data {

enum class TargetColumn {
  kRequired,  // header must end with the target; every row needs a value
  kOptional,  // target column may be absent (prediction inputs)
};

enum class OutOfRangeTarget {
  kReject,
  kClamp,  // clamp into [0, 100]; for raw public files with stray values
};

struct CsvOptions {
  TargetColumn target = TargetColumn::kRequired;
  OutOfRangeTarget out_of_range = OutOfRangeTarget::kReject;
  std::string id_prefix = "row-";
};

// Splits RFC-4180 style text (comma separator, double-quote escaping, CRLF or
// LF line ends) into rows of fields. Throws DataError on an unterminated quote.
std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text);

Dataset parse_csv(std::string_view text, const FeatureSchema& schema,
                  const CsvOptions& options = {},
                  std::string_view source_name = "<memory>");

Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                 const CsvOptions& options = {});

std::string to_csv(const Dataset& data, bool include_target = true);

}  // namespace edudss::data
