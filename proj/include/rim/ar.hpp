#pragma once

#include <span>
#include <vector>

#include "rim/types.hpp"

// Autoregressive modelling of complex sequences. A model of order q predicts
// x(n) = sum_{i=1..q} coeffs[i-1] x(n-i).
namespace rim {

struct ArFit {
  std::vector<cdouble> coeffs;
  double residual_variance = 0.0;
  bool regularized = false;
};

// Least-squares fit over every n with a full history. Rank-deficient normal
// equations get a ridge of 1e-8 times their trace.
ArFit fit_ar(std::span<const cdouble> x, std::size_t order);

// Burg lattice estimate (minimises forward plus backward error power).
ArFit fit_burg(std::span<const cdouble> x, std::size_t order);

enum class OrderRule { fixed, aic };
enum class ArDirection { forward, bidirectional };
enum class ArEstimator { least_squares, burg };

struct ArConfig {
  std::size_t max_order = 8;
  OrderRule order_rule = OrderRule::aic;
  std::size_t fixed_order = 2;  // used when order_rule == fixed
  ArDirection direction = ArDirection::bidirectional;
  std::size_t min_clean_run = 16;
  ArEstimator estimator = ArEstimator::least_squares;
  // Reflect model poles outside the unit circle before extrapolating.
  bool stabilize = true;

  void validate() const;
};

// Order in 1..max_order minimising len ln(var) + 2q, all orders scored on the
// same prediction targets.
std::size_t select_order(std::span<const cdouble> x, const ArConfig& cfg);

struct SliceRepair {
  std::vector<cdouble> values;
  std::size_t order = 0;          // 0 when nothing was fitted
  bool backward_fallback = false; // some gap had no usable left context
  bool zero_filled = false;       // some gap could not be predicted at all
};

// Fills gap samples by AR prediction from a model fitted on the longest clean
// run. Clean samples are returned unchanged.
SliceRepair repair_slice(std::span<const cdouble> slice,
                         std::span<const bool> gap, const ArConfig& cfg);

// Reflects every root of z^q - sum coeffs[i-1] z^(q-i) with modulus above one
// to 1/conj(root). The magnitude response shape is kept; prediction over long
// gaps can no longer grow without bound.
std::vector<cdouble> stabilize_ar(std::span<const cdouble> coeffs);

// Runs x(n) = sum coeffs[i-1] x(n-i) forward into out[begin, end), reading
// history from out itself.
void ar_extrapolate(std::span<const cdouble> coeffs, std::span<cdouble> out,
                    std::size_t begin, std::size_t end);

}  // namespace rim
