#include "rim/mitigate.hpp"

#include <chrono>
#include <fstream>
#include <memory>

#include "rim/error.hpp"

namespace rim {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RealMatrix half_power(const Spectrogram& s) {
  const Eigen::Index half = static_cast<Eigen::Index>(s.bins() / 2 + 1);
  return s.data.leftCols(half).cwiseAbs2();
}

Spectrogram repair_spectrogram(const Spectrogram& s, const BoolMatrix& mask,
                               const ArConfig& cfg,
                               std::vector<SliceReport>* report) {
  if (mask.rows() != s.data.rows() || mask.cols() != s.data.cols())
    throw DataError("repair: mask shape differs from spectrogram");
  Spectrogram out = s;
  const std::size_t n = s.bins();
  const std::size_t frames = s.frames();
  std::vector<cdouble> slice(frames);
  std::vector<bool> gap_vec(frames);
  for (std::size_t m = 0; m <= n / 2; ++m) {
    const auto col = static_cast<Eigen::Index>(m);
    std::size_t flagged = 0;
    for (std::size_t z = 0; z < frames; ++z) {
      const auto zi = static_cast<Eigen::Index>(z);
      slice[z] = s.data(zi, col);
      gap_vec[z] = mask(zi, col);
      flagged += gap_vec[z];
    }
    if (flagged == 0) continue;
    // std::vector<bool> is not contiguous; copy into a plain buffer.
    std::unique_ptr<bool[]> gap(new bool[frames]);
    for (std::size_t z = 0; z < frames; ++z) gap[z] = gap_vec[z];
    const SliceRepair r = repair_slice(slice, {gap.get(), frames}, cfg);

    const std::size_t mirror = (n - m) % n;
    for (std::size_t z = 0; z < frames; ++z) {
      if (!gap[z]) continue;
      const auto zi = static_cast<Eigen::Index>(z);
      out.data(zi, col) = r.values[z];
      if (mirror != m) out.data(zi, static_cast<Eigen::Index>(mirror)) = std::conj(r.values[z]);
    }
    if (report)
      report->push_back({m, flagged, r.order, r.backward_fallback, r.zero_filled});
  }
  return out;
}

MitigationResult mitigate(const BasebandFrame& frame, const MitigationConfig& cfg) {
  cfg.ar.validate();
  cfg.hough.validate();
  MitigationResult res;
  auto& diag = res.diag;

  auto t0 = std::chrono::steady_clock::now();
  const Spectrogram s = stft(frame.samples, cfg.stft, frame.sample_rate_hz);
  diag.seconds_stft = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  diag.lines = find_lines(half_power(s), cfg.hough);
  diag.mask = footprint_mask(diag.lines, s.frames(), s.bins(), cfg.hough.bin_dilation);
  diag.seconds_detect = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const Spectrogram repaired = repair_spectrogram(s, diag.mask, cfg.ar, &diag.slices);
  diag.seconds_repair = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  res.frame.samples = istft(repaired, cfg.stft);
  diag.seconds_istft = seconds_since(t0);

  res.frame.sample_rate_hz = frame.sample_rate_hz;
  res.frame.chirp_index = frame.chirp_index;
  res.frame.ground_truth = frame.ground_truth;
  return res;
}

void write_diagnostics(const MitigationDiagnostics& diag,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_lines_csv(diag.lines, dir / "lines.csv");

  std::ofstream mask(dir / "mask.csv");
  if (!mask) throw DataError("cannot write " + (dir / "mask.csv").string());
  mask << "zeta,m\n";
  for (Eigen::Index z = 0; z < diag.mask.rows(); ++z)
    for (Eigen::Index m = 0; m < diag.mask.cols(); ++m)
      if (diag.mask(z, m)) mask << z << ',' << m << '\n';

  std::ofstream slices(dir / "slices.csv");
  if (!slices) throw DataError("cannot write " + (dir / "slices.csv").string());
  slices << "bin,flagged,order,backward_fallback,zero_filled\n";
  for (const auto& s : diag.slices)
    slices << s.bin << ',' << s.flagged << ',' << s.order << ','
           << s.backward_fallback << ',' << s.zero_filled << '\n';
}

}  // namespace rim
