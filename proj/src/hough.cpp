#include "rim/hough.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "rim/error.hpp"

namespace rim {

std::vector<double> HoughConfig::default_theta_grid() {
  std::vector<double> grid;
  for (int t = -90; t < 90; ++t) grid.push_back(t);
  return grid;
}

bool HoughConfig::angle_allowed(double theta_deg) const {
  return std::abs(theta_deg) <= 90.0 - exclusion_half_width_deg + 1e-9;
}

void HoughConfig::validate() const {
  if (!(rho_res > 0.0)) throw ConfigError("hough: rho_res must be positive");
  if (theta_deg.empty()) throw ConfigError("hough: empty theta grid");
  if (!std::is_sorted(theta_deg.begin(), theta_deg.end()) ||
      theta_deg.front() < -90.0 || theta_deg.back() >= 90.0)
    throw ConfigError("hough: theta grid must be ascending within [-90, 90)");
  // Zero is allowed so an absolute threshold can act alone.
  if (!(rel_threshold >= 0.0 && rel_threshold <= 1.0))
    throw ConfigError("hough: rel_threshold must lie in [0, 1]");
  if (exclusion_half_width_deg < 0.0 || exclusion_half_width_deg > 90.0)
    throw ConfigError("hough: exclusion half width must lie in [0, 90]");
  if (nms_rho < 0 || nms_theta < 0)
    throw ConfigError("hough: nms radius must be non-negative");
  if (max_lines == 0) throw ConfigError("hough: max_lines must be >= 1");
}

namespace {

constexpr double kDeg = kPi / 180.0;

struct Trig {
  std::vector<double> c, s;
};

Trig trig_table(const std::vector<double>& theta) {
  Trig t;
  for (double th : theta) {
    // Exact zeros keep the axis-aligned cases exact.
    double c = std::cos(th * kDeg), s = std::sin(th * kDeg);
    if (std::abs(c) < 1e-15) c = 0.0;
    if (std::abs(s) < 1e-15) s = 0.0;
    t.c.push_back(c);
    t.s.push_back(s);
  }
  return t;
}

std::ptrdiff_t rho_half_span(std::size_t frames, std::size_t bins,
                             double rho_res) {
  const double diag = std::hypot(static_cast<double>(frames),
                                 static_cast<double>(bins));
  return static_cast<std::ptrdiff_t>(std::ceil(diag / rho_res));
}

// Adds sign * p to every accumulator cell crossed by image point (z, m).
void vote(RealMatrix& scores, const Trig& trig, std::ptrdiff_t offset,
          double rho_res, double z, double m, double p) {
  const auto n_theta = static_cast<Eigen::Index>(trig.c.size());
  for (Eigen::Index t = 0; t < n_theta; ++t) {
    const double rho = z * trig.c[t] + m * trig.s[t];
    const auto r = static_cast<Eigen::Index>(std::lround(rho / rho_res)) + offset;
    scores(r, t) += p;
  }
}

double global_max(const HoughAccumulator& acc) {
  return acc.scores.size() ? acc.scores.maxCoeff() : 0.0;
}

}  // namespace

HoughAccumulator hough_accumulate(const RealMatrix& power,
                                  const HoughConfig& cfg) {
  cfg.validate();
  if (power.size() == 0) throw DataError("hough: empty power matrix");
  if ((power.array() < 0.0).any())
    throw DataError("hough: power matrix has negative entries");

  const auto frames = static_cast<std::size_t>(power.rows());
  const auto bins = static_cast<std::size_t>(power.cols());
  const std::ptrdiff_t half = rho_half_span(frames, bins, cfg.rho_res);

  HoughAccumulator acc;
  acc.theta_axis = cfg.theta_deg;
  for (std::ptrdiff_t r = -half; r <= half; ++r)
    acc.rho_axis.push_back(static_cast<double>(r) * cfg.rho_res);
  acc.scores = RealMatrix::Zero(2 * half + 1,
                                static_cast<Eigen::Index>(cfg.theta_deg.size()));

  const Trig trig = trig_table(cfg.theta_deg);
  for (Eigen::Index z = 0; z < power.rows(); ++z)
    for (Eigen::Index m = 0; m < power.cols(); ++m) {
      const double p = power(z, m);
      if (p == 0.0) continue;
      vote(acc.scores, trig, half, cfg.rho_res, static_cast<double>(z),
           static_cast<double>(m), p);
    }
  return acc;
}

double allowed_peak(const HoughAccumulator& acc, const HoughConfig& cfg) {
  double best = 0.0;
  for (std::size_t t = 0; t < acc.theta_axis.size(); ++t) {
    if (!cfg.angle_allowed(acc.theta_axis[t])) continue;
    best = std::max(best, acc.scores.col(static_cast<Eigen::Index>(t)).maxCoeff());
  }
  return best;
}

namespace {

double detection_threshold(double global_peak, const HoughConfig& cfg) {
  double thr = cfg.rel_threshold * global_peak;
  if (cfg.phys_threshold) thr = std::max(thr, *cfg.phys_threshold);
  return thr;
}

std::vector<DetectedLine> pick_peaks(const HoughAccumulator& acc,
                                     const HoughConfig& cfg, double threshold,
                                     std::size_t limit) {
  struct Candidate {
    double score;
    Eigen::Index r, t;
  };
  std::vector<Candidate> cands;
  const Eigen::Index n_rho = acc.scores.rows(), n_theta = acc.scores.cols();
  for (Eigen::Index t = 0; t < n_theta; ++t) {
    if (!cfg.angle_allowed(acc.theta_axis[static_cast<std::size_t>(t)])) continue;
    for (Eigen::Index r = 0; r < n_rho; ++r) {
      const double s = acc.scores(r, t);
      if (s > threshold && s > 0.0) cands.push_back({s, r, t});
    }
  }
  // Ties broken by position so the ordering is deterministic.
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.t != b.t) return a.t < b.t;
    return a.r < b.r;
  });

  std::vector<DetectedLine> out;
  std::vector<Candidate> kept;
  for (const auto& c : cands) {
    if (out.size() >= limit) break;
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Candidate& k) {
      // theta wraps at +-90 with rho changing sign.
      const Eigen::Index dt = std::abs(k.t - c.t);
      const bool near_direct =
          std::abs(k.r - c.r) <= cfg.nms_rho && dt <= cfg.nms_theta;
      const bool near_wrapped =
          std::abs(k.r - (n_rho - 1 - c.r)) <= cfg.nms_rho &&
          n_theta - dt <= cfg.nms_theta;
      return near_direct || near_wrapped;
    });
    if (suppressed) continue;
    kept.push_back(c);
    out.push_back({acc.rho_axis[static_cast<std::size_t>(c.r)],
                   acc.theta_axis[static_cast<std::size_t>(c.t)], c.score, {}});
  }
  return out;
}

}  // namespace

std::vector<DetectedLine> detect_lines(const HoughAccumulator& acc,
                                       const HoughConfig& cfg) {
  cfg.validate();
  return pick_peaks(acc, cfg, detection_threshold(global_max(acc), cfg),
                    cfg.max_lines);
}

std::vector<DetectedLine> find_lines(const RealMatrix& power,
                                     const HoughConfig& cfg) {
  HoughAccumulator acc = hough_accumulate(power, cfg);
  const std::pair shape{static_cast<std::size_t>(power.rows()),
                        static_cast<std::size_t>(power.cols())};
  if (!cfg.sequential) {
    auto lines = detect_lines(acc, cfg);
    for (auto& l : lines)
      l.cells = line_to_cells(l.rho, l.theta_deg, shape, cfg.dilation);
    return lines;
  }

  // Threshold stays pinned to the original image.
  const double threshold = detection_threshold(global_max(acc), cfg);
  const Trig trig = trig_table(cfg.theta_deg);
  const std::ptrdiff_t half = (acc.scores.rows() - 1) / 2;
  RealMatrix residual = power;
  std::vector<DetectedLine> lines;
  while (lines.size() < cfg.max_lines) {
    auto best = pick_peaks(acc, cfg, threshold, 1);
    if (best.empty()) break;
    DetectedLine line = std::move(best.front());
    line.cells = line_to_cells(line.rho, line.theta_deg, shape, cfg.dilation);
    bool removed_any = false;
    for (const auto& [z, m] : line.cells) {
      const auto zi = static_cast<Eigen::Index>(z), mi = static_cast<Eigen::Index>(m);
      const double p = residual(zi, mi);
      if (p == 0.0) continue;
      vote(acc.scores, trig, half, cfg.rho_res, static_cast<double>(z),
           static_cast<double>(m), -p);
      residual(zi, mi) = 0.0;
      removed_any = true;
    }
    lines.push_back(std::move(line));
    if (!removed_any) break;
  }
  return lines;
}

std::vector<Cell> line_to_cells(double rho, double theta_deg,
                                std::pair<std::size_t, std::size_t> shape,
                                std::size_t dilation) {
  const auto [frames, bins] = shape;
  double c = std::cos(theta_deg * kDeg), s = std::sin(theta_deg * kDeg);
  if (std::abs(c) < 1e-15) c = 0.0;
  if (std::abs(s) < 1e-15) s = 0.0;

  std::set<Cell> core;
  const auto add = [&](long long z, long long m) {
    if (z >= 0 && m >= 0 && z < static_cast<long long>(frames) &&
        m < static_cast<long long>(bins))
      core.emplace(static_cast<std::size_t>(z), static_cast<std::size_t>(m));
  };
  if (s != 0.0)
    for (std::size_t z = 0; z < frames; ++z)
      add(static_cast<long long>(z), std::llround((rho - static_cast<double>(z) * c) / s));
  if (c != 0.0)
    for (std::size_t m = 0; m < bins; ++m)
      add(std::llround((rho - static_cast<double>(m) * s) / c), static_cast<long long>(m));

  std::set<Cell> dilated;
  const auto d = static_cast<long long>(dilation);
  for (const auto& [z, m] : core)
    for (long long dz = -d; dz <= d; ++dz) {
      const long long zz = static_cast<long long>(z) + dz;
      if (zz >= 0 && zz < static_cast<long long>(frames))
        dilated.emplace(static_cast<std::size_t>(zz), m);
    }
  return {dilated.begin(), dilated.end()};
}

BoolMatrix footprint_mask(std::span<const DetectedLine> lines,
                          std::size_t frames, std::size_t n_fft,
                          std::size_t bin_dilation) {
  BoolMatrix mask = BoolMatrix::Constant(static_cast<Eigen::Index>(frames),
                                         static_cast<Eigen::Index>(n_fft), false);
  const std::size_t half = n_fft / 2;
  const auto mark = [&](std::size_t z, std::size_t m) {
    mask(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(m)) = true;
    mask(static_cast<Eigen::Index>(z),
         static_cast<Eigen::Index>((n_fft - m) % n_fft)) = true;
  };
  for (const auto& line : lines)
    for (const auto& [z, m] : line.cells) {
      if (z >= frames || m >= n_fft) throw DataError("footprint outside mask");
      mark(z, m);
      if (bin_dilation == 0 || m > half) continue;
      const std::size_t lo = m > bin_dilation ? m - bin_dilation : 0;
      const std::size_t hi = std::min(half, m + bin_dilation);
      for (std::size_t b = lo; b <= hi; ++b) mark(z, b);
    }
  return mask;
}

void write_accumulator_csv(const HoughAccumulator& acc,
                           const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path.string());
  os << "rho,theta,score\n";
  os.precision(10);
  for (Eigen::Index r = 0; r < acc.scores.rows(); ++r)
    for (Eigen::Index t = 0; t < acc.scores.cols(); ++t)
      if (acc.scores(r, t) != 0.0)
        os << acc.rho_axis[static_cast<std::size_t>(r)] << ','
           << acc.theta_axis[static_cast<std::size_t>(t)] << ','
           << acc.scores(r, t) << '\n';
}

void write_lines_csv(std::span<const DetectedLine> lines,
                     const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path.string());
  os << "line,rho,theta,score,zeta,m\n";
  os.precision(10);
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (const auto& [z, m] : lines[i].cells)
      os << i << ',' << lines[i].rho << ',' << lines[i].theta_deg << ','
         << lines[i].score << ',' << z << ',' << m << '\n';
}

}  // namespace rim
