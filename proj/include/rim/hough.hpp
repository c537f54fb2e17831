#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rim/types.hpp"

// Power-weighted Hough transform over a TF power image.
//
// Coordinates: x = time frame (zeta, row index), y = frequency bin (m, column
// index). A line is rho = zeta cos(theta) + m sin(theta); theta = 0 is an
// instantaneous (vertical) line and theta = +-90 deg a constant-frequency one.
namespace rim {

struct HoughConfig {
  double rho_res = 1.0;
  std::vector<double> theta_deg = default_theta_grid();
  // Half width of the rejected band around +-90 deg.
  double exclusion_half_width_deg = 30.0;
  double rel_threshold = 0.3;
  std::optional<double> phys_threshold;
  int nms_rho = 4;
  int nms_theta = 4;
  std::size_t max_lines = 16;
  std::size_t dilation = 4;
  // Extra +-bins added around every footprint cell when the repair mask is
  // built. Strong interference leaks through the window sidelobes into bins
  // far from its ridge; detection and peeling ignore this.
  std::size_t bin_dilation = 0;
  // Detect one line at a time and remove its footprint from the image before
  // searching again; otherwise plain peak picking with non-maximum suppression.
  bool sequential = false;

  static std::vector<double> default_theta_grid();
  bool angle_allowed(double theta_deg) const;
  void validate() const;
};

struct HoughAccumulator {
  RealMatrix scores;  // (rho index, theta index)
  std::vector<double> rho_axis;
  std::vector<double> theta_axis;  // degrees
};

using Cell = std::pair<std::size_t, std::size_t>;  // (zeta, m)

struct DetectedLine {
  double rho = 0.0;
  double theta_deg = 0.0;
  double score = 0.0;
  std::vector<Cell> cells;
};

HoughAccumulator hough_accumulate(const RealMatrix& power,
                                  const HoughConfig& cfg);

// Peak picking on a finished accumulator. Footprints are not filled in; use
// line_to_cells for that.
std::vector<DetectedLine> detect_lines(const HoughAccumulator& acc,
                                       const HoughConfig& cfg);

// Full detection on a power image, including footprints. Honours
// cfg.sequential.
std::vector<DetectedLine> find_lines(const RealMatrix& power,
                                     const HoughConfig& cfg);

// Largest score among allowed angles.
double allowed_peak(const HoughAccumulator& acc, const HoughConfig& cfg);

// Cells on rho = zeta cos + m sin, rasterised per column and per row,
// dilated by +-dilation frames and clipped to shape.
std::vector<Cell> line_to_cells(double rho, double theta_deg,
                                std::pair<std::size_t, std::size_t> shape,
                                std::size_t dilation);

// Marks the footprint of every line in a (frames x n_fft) mask, adding the
// conjugate bin n_fft - m for each cell of the half spectrum. Cells are
// widened by +-bin_dilation bins within the half spectrum first.
BoolMatrix footprint_mask(std::span<const DetectedLine> lines,
                          std::size_t frames, std::size_t n_fft,
                          std::size_t bin_dilation = 0);

void write_accumulator_csv(const HoughAccumulator& acc,
                           const std::filesystem::path& path);
void write_lines_csv(std::span<const DetectedLine> lines,
                     const std::filesystem::path& path);

}  // namespace rim
