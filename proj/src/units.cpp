#include "xbar/units.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace xbar {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

bool strip_suffix(std::string_view& s, std::string_view suffix) {
    if (s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix) {
        s.remove_suffix(suffix.size());
        return true;
    }
    return false;
}

bool strip_unit(std::string_view& s, std::string_view unit) {
    if (unit.empty()) return false;
    if (unit == "ohm") {
        for (std::string_view alias : {"ohms", "Ohms", "ohm", "Ohm", "Ω", "Ω"})
            if (strip_suffix(s, alias)) return true;
        return false;
    }
    return strip_suffix(s, unit);
}

double prefix_scale(std::string_view p) {
    static constexpr std::array<std::pair<std::string_view, double>, 11> table{{
        {"f", 1e-15}, {"p", 1e-12}, {"n", 1e-9}, {"u", 1e-6}, {"µ", 1e-6}, {"μ", 1e-6},
        {"m", 1e-3}, {"k", 1e3}, {"M", 1e6}, {"G", 1e9}, {"T", 1e12},
    }};
    for (const auto& [sym, scale] : table)
        if (p == sym) return scale;
    return 0.0;
}

}  // namespace

double parse_quantity(std::string_view text, std::string_view unit) {
    std::string_view s = trim(text);
    if (s.empty()) throw std::invalid_argument("empty quantity");
    const bool had_unit = strip_unit(s, unit);
    s = trim(s);

    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr == begin)
        throw std::invalid_argument("malformed quantity '" + std::string(text) + "'");
    std::string_view rest = trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
    if (!rest.empty()) {
        const double scale = prefix_scale(rest);
        if (scale == 0.0) {
            std::string msg = "malformed quantity '" + std::string(text) + "'";
            if (!unit.empty() && !had_unit) msg += " (expected unit " + std::string(unit) + ")";
            throw std::invalid_argument(msg);
        }
        value *= scale;
    }
    if (!std::isfinite(value)) throw std::invalid_argument("non-finite quantity '" + std::string(text) + "'");
    return value;
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("format_number failed");
    return std::string(buf.data(), ptr);
}

}  // namespace xbar
