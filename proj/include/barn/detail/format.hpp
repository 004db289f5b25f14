#ifndef BARN_DETAIL_FORMAT_HPP_
#define BARN_DETAIL_FORMAT_HPP_

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace barn::detail {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw std::invalid_argument("malformed number: '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace barn::detail

#endif  // BARN_DETAIL_FORMAT_HPP_
