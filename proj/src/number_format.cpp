#include "mast/number_format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace mast {

std::string format_real(double value) {
    if (value == 0.0) return "0";  // also folds -0
    std::array<char, 64> buffer{};
    for (int precision = 15; precision <= 17; ++precision) {
        auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value,
                                       std::chars_format::general, precision);
        std::string text(buffer.data(), end);
        if (precision == 17 || parse_real(text) == value) return text;
    }
    return {};
}

std::optional<double> parse_real(std::string_view text) {
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
    return value;
}

}  // namespace mast
