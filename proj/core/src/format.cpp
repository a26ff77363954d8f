#include "ppbt/format.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "ppbt/error.hpp"

namespace ppbt {

std::string format_double(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

namespace {

template <class T>
T parse_number(std::string_view text, const char* what) {
    const auto t = trim(text);
    T value{};
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw ConfigError("expected " + std::string(what) + ", got '" +
                          std::string(text) + "'");
    }
    return value;
}

}  // namespace

double parse_double(std::string_view text) {
    if (trim(text) == "NA") return std::nan("");
    return parse_number<double>(text, "a real number");
}

int parse_int(std::string_view text) {
    return parse_number<int>(text, "an integer");
}

unsigned long long parse_u64(std::string_view text) {
    return parse_number<unsigned long long>(text, "an unsigned 64-bit integer");
}

std::vector<double> parse_double_list(std::string_view text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = text.substr(
            start, comma == std::string_view::npos ? text.size() - start
                                                   : comma - start);
        out.push_back(parse_number<double>(item, "a real number"));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string format_double_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

}  // namespace ppbt
