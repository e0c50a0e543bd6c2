#include "sg/units.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace sg {

double meters_per(LengthUnit unit) {
  switch (unit) {
    case LengthUnit::Meter: return 1.0;
    case LengthUnit::Millimeter: return 1e-3;
    case LengthUnit::Centimeter: return 1e-2;
    case LengthUnit::Inch: return 0.0254;
  }
  return 1.0;
}

std::string_view unit_suffix(LengthUnit unit) {
  switch (unit) {
    case LengthUnit::Meter: return "m";
    case LengthUnit::Millimeter: return "mm";
    case LengthUnit::Centimeter: return "cm";
    case LengthUnit::Inch: return "in";
  }
  return "m";
}

std::optional<LengthUnit> parse_unit(std::string_view suffix) {
  if (suffix == "m" || suffix == "meter") return LengthUnit::Meter;
  if (suffix == "mm" || suffix == "millimeter") return LengthUnit::Millimeter;
  if (suffix == "cm" || suffix == "centimeter") return LengthUnit::Centimeter;
  if (suffix == "in" || suffix == "inch") return LengthUnit::Inch;
  return std::nullopt;
}

std::optional<Quantity> parse_quantity(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{}) return std::nullopt;
  std::string_view rest(ptr, text.data() + text.size() - ptr);
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
  if (rest.empty()) return Quantity{value, LengthUnit::Meter};
  auto unit = parse_unit(rest);
  if (!unit) return std::nullopt;
  return Quantity{value, *unit};
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_quantity(const Quantity& q) {
  return format_number(q.value) + " " + std::string(unit_suffix(q.unit));
}

std::string format_length_fewest_digits(double meters) {
  constexpr std::array<LengthUnit, 4> order = {LengthUnit::Millimeter, LengthUnit::Centimeter,
                                               LengthUnit::Inch, LengthUnit::Meter};
  std::string best;
  int bestDigits = 1 << 30;
  for (auto unit : order) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", meters / meters_per(unit));
    int digits = 0;
    for (const char* p = buf; *p != '\0'; ++p) {
      if (*p == 'e') {
        digits += 100;  // exponent notation is never the shortest form we want
        break;
      }
      if (std::isdigit(static_cast<unsigned char>(*p))) ++digits;
    }
    if (digits < bestDigits) {
      bestDigits = digits;
      best = std::string(buf) + " " + std::string(unit_suffix(unit));
    }
  }
  return best;
}

}  // namespace sg
