#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace sg {

enum class LengthUnit { Meter, Millimeter, Centimeter, Inch };

double meters_per(LengthUnit unit);
std::string_view unit_suffix(LengthUnit unit);
std::optional<LengthUnit> parse_unit(std::string_view suffix);

/// A length as written by the user. The numeric value is kept in its own
/// unit so that re-serialization is exact; meters() is the canonical value
/// every computation uses.
struct Quantity {
  double value = 0.0;
  LengthUnit unit = LengthUnit::Meter;

  double meters() const { return value * meters_per(unit); }

  static Quantity from_meters(double m) { return {m, LengthUnit::Meter}; }

  bool operator==(const Quantity&) const = default;
};

/// Parses "5 mm", "5mm", "0.5 in" or a bare number (meters).
std::optional<Quantity> parse_quantity(std::string_view text);
std::string format_quantity(const Quantity& q);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

/// Renders a length in whichever of mm/cm/in/m needs the fewest digits.
std::string format_length_fewest_digits(double meters);

}  // namespace sg
