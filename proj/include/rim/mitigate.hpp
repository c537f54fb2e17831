#pragma once

#include <filesystem>
#include <vector>

#include "rim/ar.hpp"
#include "rim/hough.hpp"
#include "rim/radar_sim.hpp"
#include "rim/stft.hpp"

namespace rim {

struct MitigationConfig {
  StftConfig stft;
  HoughConfig hough;
  ArConfig ar;
};

struct SliceReport {
  std::size_t bin = 0;
  std::size_t flagged = 0;
  std::size_t order = 0;
  bool backward_fallback = false;
  bool zero_filled = false;
};

struct MitigationDiagnostics {
  std::vector<DetectedLine> lines;
  BoolMatrix mask;  // frames x n_fft, conjugate-symmetric
  std::vector<SliceReport> slices;
  double seconds_stft = 0.0;
  double seconds_detect = 0.0;
  double seconds_repair = 0.0;
  double seconds_istft = 0.0;
};

struct MitigationResult {
  BasebandFrame frame;
  MitigationDiagnostics diag;
};

// Non-negative-frequency half (bins 0..N/2) of the power spectrogram.
RealMatrix half_power(const Spectrogram& s);

// Repairs flagged cells of bins 0..N/2 slice by slice and writes the
// conjugate of each repaired cell into its mirror bin. Unflagged cells are
// left untouched.
Spectrogram repair_spectrogram(const Spectrogram& s, const BoolMatrix& mask,
                               const ArConfig& cfg,
                               std::vector<SliceReport>* report = nullptr);

// STFT, Hough detection on the half power image, footprint mask, AR repair,
// inverse STFT. Ground truth is carried through unchanged.
MitigationResult mitigate(const BasebandFrame& frame, const MitigationConfig& cfg);

// lines.csv, mask.csv (zeta,m of flagged cells) and slices.csv under dir.
void write_diagnostics(const MitigationDiagnostics& diag,
                       const std::filesystem::path& dir);

}  // namespace rim
