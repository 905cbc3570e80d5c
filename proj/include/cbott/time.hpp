#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace cbott {

// Timestamps are UTC epoch seconds. Sub-second precision, when present in
// the input, is preserved in the fraction.
using Timestamp = double;

// Parses an RFC 3339 / ISO 8601 instant ("2023-01-15T16:15:00Z",
// "2023-01-15 16:15:00+05:30", optional fractional seconds). Returns
// nullopt on malformed input.
std::optional<Timestamp> parse_rfc3339(const std::string& text);

// Formats as UTC with 'Z' suffix; fractional seconds emitted (up to
// microseconds, trailing zeros trimmed) only when nonzero.
std::string format_rfc3339(Timestamp t);

// UTC hour-of-day in [0, 23], floor semantics for fractional seconds.
int hour_of_day(Timestamp t);

}  // namespace cbott
