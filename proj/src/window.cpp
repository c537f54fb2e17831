#include "rim/window.hpp"

#include <cmath>

#include "rim/error.hpp"
#include "rim/types.hpp"

namespace rim {

std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2 || kind == WindowKind::rectangular) return w;
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(2.0 * kPi * static_cast<double>(i) / denom);
    w[i] = kind == WindowKind::hamming ? 0.54 - 0.46 * c : 0.5 - 0.5 * c;
  }
  return w;
}

WindowKind parse_window_kind(std::string_view name) {
  if (name == "rectangular" || name == "rect") return WindowKind::rectangular;
  if (name == "hamming") return WindowKind::hamming;
  if (name == "hann" || name == "hanning") return WindowKind::hann;
  throw ConfigError("unknown window kind '" + std::string(name) + "'");
}

std::string to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::rectangular: return "rectangular";
    case WindowKind::hamming: return "hamming";
    case WindowKind::hann: return "hann";
  }
  return "?";
}

}  // namespace rim
