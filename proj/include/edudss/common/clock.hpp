#pragma once

#include <string>

namespace edudss {

// Current UTC time as ISO-8601 with millisecond precision, e.g.
// "2026-10-15T09:30:12.345Z".
std::string utc_timestamp();

}  // namespace edudss
