#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rim/radar_sim.hpp"
#include "rim/types.hpp"
#include "rim/window.hpp"

namespace rim {

inline constexpr double kDbFloor = -120.0;

// Re(rec^H ref) / (|rec| |ref|).
double cosine_similarity(std::span<const cdouble> rec, std::span<const cdouble> ref);
double cosine_similarity(std::span<const double> rec, std::span<const double> ref);
// |rec - ref| / |ref|.
double evm(std::span<const cdouble> rec, std::span<const cdouble> ref);
double evm(std::span<const double> rec, std::span<const double> ref);

struct Profile {
  std::vector<double> power;     // linear
  std::vector<double> power_db;  // relative to the peak, floored
  std::vector<double> axis;      // metres or m/s
};

// Windowed FFT of a real frame, bins 0..nfft/2. nfft = 0 means frame length.
// Range axis r = f c / (2 |k|).
Profile range_profile(std::span<const double> samples, double sample_rate_hz,
                      double chirp_rate, WindowKind window = WindowKind::hamming,
                      std::size_t nfft = 0);

// Inclusive bin interval.
using Lobe = std::pair<std::size_t, std::size_t>;

// Global peak widened to the nearest local minimum on each side.
Lobe auto_mainlobe(std::span<const double> power);
// 10 log10(max sidelobe / max mainlobe); floored at kDbFloor.
double pslr_db(std::span<const double> power, Lobe lobe);
// 10 log10(sidelobe energy / mainlobe energy); floored at kDbFloor.
double islr_db(std::span<const double> power, Lobe lobe);

struct MetricsReport {
  double cs = 0.0;
  double evm = 0.0;
  double pslr_db = 0.0;
  double islr_db = 0.0;
  Lobe mainlobe{0, 0};
};

// CS and EVM against the truth; PSLR/ISLR from the Hamming range profile of
// the recovered frame.
MetricsReport evaluate_frame(std::span<const double> rec, std::span<const double> truth,
                             double sample_rate_hz, double chirp_rate,
                             std::size_t nfft = 0);

struct RdMap {
  RealMatrix power;  // (range bin, velocity bin)
  std::vector<double> range_axis;
  std::vector<double> velocity_axis;
};

// Hamming range FFT per chirp, Hamming Doppler FFT across chirps, zero
// velocity centred.
RdMap rd_map(std::span<const BasebandFrame> frames, const RadarParams& victim,
             std::size_t range_nfft = 0);
// Velocity cut at one range bin.
Profile velocity_profile(const RdMap& rd, std::size_t range_bin);

struct MetricsRow {
  std::string scenario;
  std::string method;
  std::uint64_t seed = 0;
  std::int64_t frame = 0;
  MetricsReport report;
};

void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path);
std::string format_metric(double v);

}  // namespace rim
