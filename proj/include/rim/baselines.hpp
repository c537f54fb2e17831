#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rim/ar.hpp"
#include "rim/radar_sim.hpp"
#include "rim/stft.hpp"

// Reference mitigation methods: time-domain zeroing, raised-cosine
// windowing, AR extrapolation and IMAT on a CFAR mask; CFAR + Burg repair in
// the TF domain; and TF AR repair over hand-labelled time ranges.
namespace rim {

enum class CfarDomain { time, tf_slice };

struct CfarConfig {
  std::size_t n_train = 16;  // per side
  std::size_t n_guard = 4;   // per side
  double pfa = 1e-3;
  CfarDomain domain = CfarDomain::time;

  void validate() const;
  // Cell-averaging scale factor for n training cells.
  static double scale(std::size_t n, double pfa);
};

struct TimeMask {
  std::vector<bool> flags;  // true = interfered
  std::size_t count() const;
};

// Cell-averaging CFAR on |x|^2 with two-sided training windows. Near the
// edges the missing side is dropped and the factor recomputed for the
// remaining cell count.
TimeMask cfar_detect(std::span<const double> magnitude, const CfarConfig& cfg);

std::vector<double> apply_zeroing(std::span<const double> x, const TimeMask& mask);
// Each masked run is multiplied by 0.5 (1 + cos(2 pi u)), u running over
// (0, 1) across the run, so the gain is zero at the run centre.
std::vector<double> apply_cw(std::span<const double> x, const TimeMask& mask);
// Each masked run is predicted by an AR model fitted on the clean samples
// before it (after it when the left side is too short).
std::vector<double> apply_time_ar(std::span<const double> x, const TimeMask& mask,
                                  const ArConfig& cfg);

struct ImatConfig {
  std::size_t iterations = 20;
  double decay = 0.2;                 // gamma
  std::optional<double> lambda0;      // default: max |FFT| after zeroing
  void validate() const;
};

std::vector<double> apply_imat(std::span<const double> x, const TimeMask& mask,
                               const ImatConfig& cfg);

enum class TimeMethod { zeroing, cw, t_ar, imat };

struct TimeBaselineParams {
  ArConfig ar;
  ImatConfig imat;
};

// Throws ConfigError when every sample is masked.
BasebandFrame apply_time_baseline(TimeMethod method, const BasebandFrame& frame,
                                  const TimeMask& mask,
                                  const TimeBaselineParams& params);

struct CfarBurgConfig {
  StftConfig stft;
  CfarConfig cfar{16, 4, 1e-3, CfarDomain::tf_slice};
  ArConfig ar{8, OrderRule::aic, 2, ArDirection::forward, 16, ArEstimator::burg};
};

// Per non-negative frequency bin: CFAR along time, zero flagged cells, Burg
// extrapolation, amplitude correction, then inverse STFT.
BasebandFrame cfar_burg(const BasebandFrame& frame, const CfarBurgConfig& cfg,
                        BoolMatrix* mask_out = nullptr);

// Half-open frame interval [first, last).
using FrameRange = std::pair<std::size_t, std::size_t>;

// Repairs every bin of the given frames with the AR slice repair.
BasebandFrame stft_ar_manual(const BasebandFrame& frame, const StftConfig& stft_cfg,
                             const ArConfig& ar_cfg, std::span<const FrameRange> ranges);

// Labels frames whose window overlaps an interference-only sample with power
// above `rel_db` relative to the mean echo power, merged into ranges.
std::vector<FrameRange> oracle_ranges(std::span<const double> interference,
                                      std::span<const double> echo,
                                      const StftConfig& stft_cfg, double rel_db);

}  // namespace rim
