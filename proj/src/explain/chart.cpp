#include "edudss/explain/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace edudss::explain {

namespace {

std::string format_fixed(double value, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
  return buffer;
}

std::string display_value(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number()) {
    std::ostringstream out;
    out << value.get<double>();
    return out.str();
  }
  return "(missing)";
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::size_t row_count(const nlohmann::json& contributions, std::size_t top) {
  return top == 0 ? contributions.size() : std::min(top, contributions.size());
}

double max_abs_phi(const nlohmann::json& contributions, std::size_t rows) {
  double out = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    out = std::max(out, std::fabs(contributions[i].at("phi").get<double>()));
  }
  return out;
}

}  // namespace

std::string render_text_chart(const nlohmann::json& contributions, double base_value,
                              double prediction, std::size_t top, int half_width) {
  const std::size_t rows = row_count(contributions, top);
  const double scale = max_abs_phi(contributions, rows);
  std::size_t label_width = 7;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto label = contributions[i].at("feature").get<std::string>() + " = " +
                       display_value(contributions[i].at("value"));
    label_width = std::max(label_width, label.size());
  }

  std::ostringstream out;
  out << "base value " << format_fixed(base_value, 3) << ", prediction "
      << format_fixed(prediction, 3) << "\n";
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = contributions[i];
    const double phi = row.at("phi").get<double>();
    auto label = row.at("feature").get<std::string>() + " = " + display_value(row.at("value"));
    label.resize(label_width, ' ');
    const int length =
        scale > 0.0 ? static_cast<int>(std::lround(std::fabs(phi) / scale * half_width)) : 0;
    std::string left(static_cast<std::size_t>(half_width), ' ');
    std::string right(static_cast<std::size_t>(half_width), ' ');
    if (phi < 0.0) {
      std::fill(left.end() - length, left.end(), '#');
    } else {
      std::fill(right.begin(), right.begin() + length, '#');
    }
    out << label << " " << left << "|" << right << " " << (phi >= 0.0 ? "+" : "")
        << format_fixed(phi, 3) << "\n";
  }
  return out.str();
}

std::string render_svg_chart(const nlohmann::json& contributions, double base_value,
                             double prediction, std::size_t top) {
  const std::size_t rows = row_count(contributions, top);
  const double scale = max_abs_phi(contributions, rows);
  constexpr int kLabelWidth = 260;
  constexpr int kHalf = 200;
  constexpr int kRowHeight = 22;
  constexpr int kTop = 40;
  const int width = kLabelWidth + 2 * kHalf + 80;
  const int height = kTop + static_cast<int>(rows) * kRowHeight + 20;
  const int axis = kLabelWidth + kHalf;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "  <text x=\"10\" y=\"20\">base value " << format_fixed(base_value, 3)
      << ", prediction " << format_fixed(prediction, 3) << "</text>\n";
  out << "  <line x1=\"" << axis << "\" y1=\"" << kTop - 6 << "\" x2=\"" << axis << "\" y2=\""
      << height - 10 << "\" stroke=\"#444\"/>\n";
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = contributions[i];
    const double phi = row.at("phi").get<double>();
    const int y = kTop + static_cast<int>(i) * kRowHeight;
    const int length = scale > 0.0 ? static_cast<int>(std::lround(std::fabs(phi) / scale * kHalf)) : 0;
    const int x = phi < 0.0 ? axis - length : axis;
    const auto label = row.at("feature").get<std::string>() + " = " + display_value(row.at("value"));
    out << "  <text x=\"10\" y=\"" << y + 14 << "\">" << escape_xml(label) << "</text>\n";
    out << "  <rect x=\"" << x << "\" y=\"" << y + 3 << "\" width=\"" << length
        << "\" height=\"" << kRowHeight - 6 << "\" fill=\"" << (phi < 0.0 ? "#3b7dd8" : "#d8463b")
        << "\"/>\n";
    out << "  <text x=\"" << axis + kHalf + 8 << "\" y=\"" << y + 14 << "\">"
        << (phi >= 0.0 ? "+" : "") << format_fixed(phi, 3) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace edudss::explain
