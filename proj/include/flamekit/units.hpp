#pragma once

// Unit-suffixed numeric literals for the CLI: "1.7ns", "28.82MHz", "86 ns".
// Bare numbers are taken as already being in SI units.

#include <string>

namespace flamekit {

enum class UnitKind { none, time, frequency };

struct Quantity {
    double value;   // SI: seconds or Hz (or as-given when no suffix)
    UnitKind kind;
};

// Throws std::invalid_argument naming the offending token.
Quantity parse_quantity(const std::string& text);

// Seconds; accepts ps/ns/us/ms/s suffixes or a bare number.
double parse_time(const std::string& text);

// Hz; accepts Hz/kHz/MHz/GHz suffixes or a bare number.
double parse_frequency(const std::string& text);

// Shortest representation that round-trips the double exactly.
std::string format_si(double value);

}  // namespace flamekit
