#include "flamekit/units.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <stdexcept>

namespace flamekit {

namespace {

struct Suffix {
    double factor;
    UnitKind kind;
};

const std::map<std::string, Suffix>& suffixes() {
    static const std::map<std::string, Suffix> table = {
        {"ps", {1e-12, UnitKind::time}}, {"ns", {1e-9, UnitKind::time}},
        {"us", {1e-6, UnitKind::time}},  {"ms", {1e-3, UnitKind::time}},
        {"s", {1.0, UnitKind::time}},
        {"Hz", {1.0, UnitKind::frequency}},  {"kHz", {1e3, UnitKind::frequency}},
        {"MHz", {1e6, UnitKind::frequency}}, {"GHz", {1e9, UnitKind::frequency}},
    };
    return table;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

Quantity parse_quantity(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty())
        throw std::invalid_argument("empty quantity");

    const char* begin = t.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin)
        throw std::invalid_argument("no number in quantity '" + text + "'");

    const std::string suffix = trim(std::string(end));
    if (suffix.empty())
        return {value, UnitKind::none};
    const auto it = suffixes().find(suffix);
    if (it == suffixes().end())
        throw std::invalid_argument("unrecognized unit suffix '" + suffix + "' in '" + text + "'");
    return {value * it->second.factor, it->second.kind};
}

double parse_time(const std::string& text) {
    const Quantity q = parse_quantity(text);
    if (q.kind == UnitKind::frequency)
        throw std::invalid_argument("expected a time, got a frequency: '" + text + "'");
    return q.value;
}

double parse_frequency(const std::string& text) {
    const Quantity q = parse_quantity(text);
    if (q.kind == UnitKind::time)
        throw std::invalid_argument("expected a frequency, got a time: '" + text + "'");
    return q.value;
}

std::string format_si(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

}  // namespace flamekit
