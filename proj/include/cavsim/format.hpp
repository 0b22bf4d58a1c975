#pragma once

#include <cstdint>
#include <string>

namespace cavsim {

// All floating-point output goes through here: 9 significant digits, "%.9g".
// Byte-stable determinism checks depend on every writer using this.
std::string format_g9(double value);

// Round a value to what format_g9 would print, so that quantities derived
// from printed columns can be recomputed exactly.
double round_g9(double value);

std::string json_escape(const std::string& text);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t value);

}  // namespace cavsim
