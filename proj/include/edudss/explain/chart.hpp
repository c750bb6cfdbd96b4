#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

namespace edudss::explain {

// Renderers for the {feature, value, phi} array produced by
// contributions_to_json. Rows appear in array order; `top` limits the count
// (0 = all).

// Fixed-width text bars, negative contributions drawn left of the axis.
std::string render_text_chart(const nlohmann::json& contributions, double base_value,
                              double prediction, std::size_t top = 0, int half_width = 24);

// Standalone SVG horizontal bar chart.
std::string render_svg_chart(const nlohmann::json& contributions, double base_value,
                             double prediction, std::size_t top = 0);

}  // namespace edudss::explain
