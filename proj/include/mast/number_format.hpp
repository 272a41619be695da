#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace mast {

/// Fewest significant digits (15, 16 or 17) that parse back to the same
/// binary value, e.g. 0.3 -> "0.3", 1.0/3 -> "0.3333333333333333".
std::string format_real(double value);

/// Strict parse of a whole token; nullopt on trailing junk or empty input.
std::optional<double> parse_real(std::string_view text);

}  // namespace mast
