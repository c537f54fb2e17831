#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "rim/types.hpp"
#include "rim/window.hpp"

namespace rim {

struct StftConfig {
  std::size_t window_len = 32;
  std::size_t hop = 4;
  std::size_t n_fft = 128;
  WindowKind window = WindowKind::hamming;

  // Throws ConfigError unless hop <= window_len <= n_fft and every output
  // sample of a fully covered sequence receives nonzero overlap-add weight.
  void validate() const;
  std::size_t frame_count(std::size_t source_len) const;
};

// Complex STFT, rows = time frames (zeta), columns = frequency bins (m).
// Phases are referenced to absolute sample time.
struct Spectrogram {
  ComplexMatrix data;
  StftConfig cfg;
  std::size_t source_len = 0;
  double sample_rate_hz = 1.0;

  std::size_t frames() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t bins() const { return static_cast<std::size_t>(data.cols()); }
};

// S(zeta, m) = sum_n x(n) w(n - zeta D) exp(-j 2 pi m n / N), no padding past
// the final full window.
Spectrogram stft(std::span<const double> x, const StftConfig& cfg,
                 double sample_rate_hz = 1.0);

// P(zeta, m) = |S(zeta, m)|^2.
RealMatrix power_spectrogram(const Spectrogram& s);

// Least-squares overlap-add inverse. Conjugate symmetry is enforced by
// keeping the real part of each inverse DFT. `cfg` must match s.cfg.
std::vector<double> istft(const Spectrogram& s, const StftConfig& cfg);

// Overlap-add normalisation sum_zeta w(n - zeta D)^2 for every output sample.
std::vector<double> ola_weights(const StftConfig& cfg, std::size_t source_len);
// Samples whose OLA weight is below 1e-6 of the interior weight; istft
// normalises them with the nearest valid weight.
std::vector<bool> weak_ola_samples(const StftConfig& cfg,
                                   std::size_t source_len);

// CSV rows "zeta,m,re,im".
void write_spectrogram_csv(const Spectrogram& s,
                           const std::filesystem::path& path);
// 64-byte header ("CWS1", frames, bins, window_len, hop, n_fft, window kind,
// source_len, sample rate) followed by row-major complex64.
void write_spectrogram_bin(const Spectrogram& s,
                           const std::filesystem::path& path);
Spectrogram read_spectrogram_bin(const std::filesystem::path& path);

}  // namespace rim
