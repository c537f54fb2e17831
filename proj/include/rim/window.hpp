#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rim {

enum class WindowKind { rectangular, hamming, hann };

// Symmetric taper of length n (w[0] == w[n-1]).
std::vector<double> make_window(WindowKind kind, std::size_t n);

WindowKind parse_window_kind(std::string_view name);
std::string to_string(WindowKind kind);

}  // namespace rim
