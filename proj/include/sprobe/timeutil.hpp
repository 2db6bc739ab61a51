#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sprobe {

/// Seconds since the Unix epoch, UTC.
using UnixSeconds = std::int64_t;

inline constexpr UnixSeconds kThreeHours = 3 * 3600;

/// Parses "YYYY-MM-DDTHH:MM[:SS][Z]" (a space may replace the 'T').
/// Throws FormatError on anything else.
UnixSeconds parse_iso8601(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(UnixSeconds t);

/// True when minutes and seconds are zero and the hour is a multiple of 3.
bool on_three_hour_grid(UnixSeconds t);

}  // namespace sprobe
