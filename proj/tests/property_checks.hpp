#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rim/types.hpp"

// Library-level property checks that need no scenario data. The unit tests
// assert them one by one; the acceptance harness folds them into a single
// criterion.
namespace rim::checks {

struct Outcome {
  bool ok = false;
  std::string detail;
};

// Worst relative round-trip error over several window/hop/length choices,
// interior samples only.
Outcome stft_round_trip(std::uint64_t seed);

// Exhaustive (rho, theta) enumeration against hough_accumulate on random
// square matrices up to 16x16.
Outcome hough_brute_force(std::size_t cases, std::uint64_t seed);

// 0/1 images: power-weighted accumulator equals a vote counter.
Outcome hough_binary(std::size_t cases, std::uint64_t seed);

Outcome ar2_sinusoid();
Outcome tone_gap_repair();
Outcome identity_on_empty_masks();
Outcome metric_identities();

// Independent accumulator used as the oracle: every (rho, theta) cell sums
// the image cells whose rounded rho matches, visiting cells row by row.
RealMatrix brute_force_accumulator(const RealMatrix& image,
                                   const std::vector<double>& theta_deg,
                                   double rho_res);

// Cosine tone sampled at integer n.
std::vector<double> tone(std::size_t n, double cycles_per_sample,
                         double amplitude = 1.0, double phase = 0.0);

}  // namespace rim::checks
