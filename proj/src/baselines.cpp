#include "rim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "rim/error.hpp"
#include "rim/fft.hpp"
#include "rim/mitigate.hpp"

namespace rim {

void CfarConfig::validate() const {
  if (n_train < 1) throw ConfigError("cfar: n_train must be >= 1");
  if (!(pfa > 0.0 && pfa < 1.0)) throw ConfigError("cfar: pfa must lie in (0, 1)");
}

double CfarConfig::scale(std::size_t n, double pfa) {
  const double nn = static_cast<double>(n);
  return nn * (std::pow(pfa, -1.0 / nn) - 1.0);
}

std::size_t TimeMask::count() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
}

TimeMask cfar_detect(std::span<const double> magnitude, const CfarConfig& cfg) {
  cfg.validate();
  const std::size_t len = magnitude.size();
  const std::size_t reach = cfg.n_train + cfg.n_guard;
  if (len <= 2 * reach + 1) throw DataError("cfar: input shorter than the CFAR window");

  // Prefix sums of power make each window O(1).
  std::vector<double> prefix(len + 1, 0.0);
  for (std::size_t i = 0; i < len; ++i)
    prefix[i + 1] = prefix[i] + magnitude[i] * magnitude[i];
  const auto sum = [&](std::size_t a, std::size_t b) { return prefix[b] - prefix[a]; };

  TimeMask mask{std::vector<bool>(len, false)};
  for (std::size_t i = 0; i < len; ++i) {
    double acc = 0.0;
    std::size_t n = 0;
    if (i >= reach) {
      acc += sum(i - reach, i - cfg.n_guard);
      n += cfg.n_train;
    }
    if (i + reach < len) {
      acc += sum(i + cfg.n_guard + 1, i + reach + 1);
      n += cfg.n_train;
    }
    const double cell = magnitude[i] * magnitude[i];
    mask.flags[i] = cell > CfarConfig::scale(n, cfg.pfa) * (acc / static_cast<double>(n));
  }
  return mask;
}

namespace {

struct Run {
  std::size_t begin, end;
};

std::vector<Run> masked_runs(const std::vector<bool>& flags) {
  std::vector<Run> out;
  for (std::size_t i = 0; i < flags.size();) {
    if (!flags[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < flags.size() && flags[j]) ++j;
    out.push_back({i, j});
    i = j;
  }
  return out;
}

void check_mask(std::span<const double> x, const TimeMask& mask) {
  if (mask.flags.size() != x.size()) throw DataError("time mask length differs from frame");
}

}  // namespace

std::vector<double> apply_zeroing(std::span<const double> x, const TimeMask& mask) {
  check_mask(x, mask);
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mask.flags[i]) out[i] = 0.0;
  return out;
}

std::vector<double> apply_cw(std::span<const double> x, const TimeMask& mask) {
  check_mask(x, mask);
  std::vector<double> out(x.begin(), x.end());
  for (const auto& r : masked_runs(mask.flags)) {
    const double width = static_cast<double>(r.end - r.begin + 1);
    for (std::size_t i = r.begin; i < r.end; ++i) {
      const double u = static_cast<double>(i - r.begin + 1) / width;
      out[i] *= 0.5 * (1.0 + std::cos(2.0 * kPi * u));
    }
  }
  return out;
}

std::vector<double> apply_time_ar(std::span<const double> x, const TimeMask& mask,
                                  const ArConfig& cfg) {
  check_mask(x, mask);
  cfg.validate();
  std::vector<cdouble> work(x.begin(), x.end());
  const auto runs = masked_runs(mask.flags);
  std::size_t clean_start = 0;
  for (std::size_t ri = 0; ri < runs.size(); ++ri) {
    const auto& r = runs[ri];
    const std::size_t left = r.begin - clean_start;
    const std::size_t right_end = ri + 1 < runs.size() ? runs[ri + 1].begin : x.size();
    const std::size_t right = right_end - r.end;

    if (left >= cfg.min_clean_run) {
      const std::span<const cdouble> train(work.data() + clean_start, left);
      const std::size_t q = cfg.order_rule == OrderRule::aic ? select_order(train, cfg)
                                                             : cfg.fixed_order;
      auto coeffs = fit_ar(train, q).coeffs;
      if (cfg.stabilize) coeffs = stabilize_ar(coeffs);
      ar_extrapolate(coeffs, work, r.begin, r.end);
    } else if (right >= cfg.min_clean_run) {
      // Predict backwards from the clean run after the gap.
      std::vector<cdouble> rev(work.begin() + static_cast<std::ptrdiff_t>(r.begin),
                               work.begin() + static_cast<std::ptrdiff_t>(right_end));
      std::reverse(rev.begin(), rev.end());
      const std::size_t gap = r.end - r.begin;
      const std::span<const cdouble> train(rev.data(), right);
      const std::size_t q = cfg.order_rule == OrderRule::aic ? select_order(train, cfg)
                                                             : cfg.fixed_order;
      auto coeffs = fit_ar(train, q).coeffs;
      if (cfg.stabilize) coeffs = stabilize_ar(coeffs);
      ar_extrapolate(coeffs, rev, right, right + gap);
      for (std::size_t i = 0; i < gap; ++i) work[r.end - 1 - i] = rev[right + i];
    } else {
      for (std::size_t i = r.begin; i < r.end; ++i) work[i] = 0.0;
    }
    clean_start = r.end;
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = work[i].real();
  return out;
}

void ImatConfig::validate() const {
  if (iterations == 0) throw ConfigError("imat: iterations must be >= 1");
  if (decay < 0.0) throw ConfigError("imat: decay must be >= 0");
  if (lambda0 && !(*lambda0 > 0.0)) throw ConfigError("imat: lambda0 must be positive");
}

std::vector<double> apply_imat(std::span<const double> x, const TimeMask& mask,
                               const ImatConfig& cfg) {
  check_mask(x, mask);
  cfg.validate();
  std::vector<double> est = apply_zeroing(x, mask);
  if (mask.count() == 0) return est;
  const std::size_t n = x.size();

  std::vector<cdouble> spec = fft::forward(std::span<const double>(est));
  double lambda0 = 0.0;
  for (auto v : spec) lambda0 = std::max(lambda0, std::abs(v));
  if (cfg.lambda0) lambda0 = *cfg.lambda0;

  for (std::size_t k = 0; k < cfg.iterations; ++k) {
    if (k > 0) spec = fft::forward(std::span<const double>(est));
    const double lambda = lambda0 * std::exp(-cfg.decay * static_cast<double>(k));
    for (auto& v : spec)
      if (std::abs(v) <= lambda) v = 0.0;
    const auto back = fft::backward(spec);
    for (std::size_t i = 0; i < n; ++i)
      est[i] = mask.flags[i] ? back[i].real() / static_cast<double>(n) : x[i];
  }
  return est;
}

BasebandFrame apply_time_baseline(TimeMethod method, const BasebandFrame& frame,
                                  const TimeMask& mask,
                                  const TimeBaselineParams& params) {
  if (!frame.samples.empty() && mask.count() == frame.samples.size())
    throw ConfigError("time baseline: every sample is masked, nothing to fit");
  BasebandFrame out = frame;
  switch (method) {
    case TimeMethod::zeroing: out.samples = apply_zeroing(frame.samples, mask); break;
    case TimeMethod::cw: out.samples = apply_cw(frame.samples, mask); break;
    case TimeMethod::t_ar: out.samples = apply_time_ar(frame.samples, mask, params.ar); break;
    case TimeMethod::imat: out.samples = apply_imat(frame.samples, mask, params.imat); break;
  }
  return out;
}

BasebandFrame cfar_burg(const BasebandFrame& frame, const CfarBurgConfig& cfg,
                        BoolMatrix* mask_out) {
  cfg.cfar.validate();
  cfg.ar.validate();
  const Spectrogram s = stft(frame.samples, cfg.stft, frame.sample_rate_hz);
  const std::size_t frames = s.frames(), n = s.bins();
  Spectrogram out = s;
  BoolMatrix mask = BoolMatrix::Constant(s.data.rows(), s.data.cols(), false);

  std::vector<double> mag(frames);
  std::vector<cdouble> slice(frames);
  std::unique_ptr<bool[]> gap(new bool[frames]);
  for (std::size_t m = 0; m <= n / 2; ++m) {
    const auto col = static_cast<Eigen::Index>(m);
    for (std::size_t z = 0; z < frames; ++z) {
      slice[z] = s.data(static_cast<Eigen::Index>(z), col);
      mag[z] = std::abs(slice[z]);
    }
    const TimeMask hits = cfar_detect(mag, cfg.cfar);
    if (hits.count() == 0) continue;
    for (std::size_t z = 0; z < frames; ++z) {
      gap[z] = hits.flags[z];
      if (gap[z]) slice[z] = 0.0;
    }
    SliceRepair r = repair_slice(slice, {gap.get(), frames}, cfg.ar);

    // Amplitude correction: each repaired run is rescaled so its RMS equals
    // the RMS of the q nearest clean cells of the slice.
    const std::size_t q = std::max<std::size_t>(r.order, 2);
    for (const auto& run : masked_runs(hits.flags)) {
      double gap_pow = 0.0;
      for (std::size_t z = run.begin; z < run.end; ++z) gap_pow += std::norm(r.values[z]);
      gap_pow /= static_cast<double>(run.end - run.begin);

      std::vector<std::pair<std::size_t, std::size_t>> clean;  // (distance, frame)
      for (std::size_t z = 0; z < frames; ++z)
        if (!gap[z])
          clean.emplace_back(z < run.begin ? run.begin - z : z - run.end + 1, z);
      const std::size_t got = std::min(q, clean.size());
      std::partial_sort(clean.begin(), clean.begin() + static_cast<std::ptrdiff_t>(got), clean.end());
      double ref_pow = 0.0;
      for (std::size_t i = 0; i < got; ++i) ref_pow += std::norm(slice[clean[i].second]);
      if (got == 0 || gap_pow <= 0.0) continue;
      const double gain = std::sqrt((ref_pow / static_cast<double>(got)) / gap_pow);
      for (std::size_t z = run.begin; z < run.end; ++z) r.values[z] *= gain;
    }

    const std::size_t mirror = (n - m) % n;
    for (std::size_t z = 0; z < frames; ++z) {
      if (!gap[z]) continue;
      const auto zi = static_cast<Eigen::Index>(z);
      out.data(zi, col) = r.values[z];
      mask(zi, col) = true;
      if (mirror != m) {
        out.data(zi, static_cast<Eigen::Index>(mirror)) = std::conj(r.values[z]);
        mask(zi, static_cast<Eigen::Index>(mirror)) = true;
      }
    }
  }
  if (mask_out) *mask_out = mask;
  BasebandFrame res = frame;
  res.samples = istft(out, cfg.stft);
  return res;
}

BasebandFrame stft_ar_manual(const BasebandFrame& frame, const StftConfig& stft_cfg,
                             const ArConfig& ar_cfg, std::span<const FrameRange> ranges) {
  const Spectrogram s = stft(frame.samples, stft_cfg, frame.sample_rate_hz);
  std::vector<FrameRange> sorted(ranges.begin(), ranges.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto [a, b] = sorted[i];
    if (a >= b || b > s.frames())
      throw ConfigError("stft_ar: invalid frame range [" + std::to_string(a) + ", " +
                        std::to_string(b) + ")");
    if (i > 0 && a < sorted[i - 1].second)
      throw ConfigError("stft_ar: overlapping frame ranges");
  }
  BoolMatrix mask = BoolMatrix::Constant(s.data.rows(), s.data.cols(), false);
  for (const auto& [a, b] : sorted)
    mask.middleRows(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b - a)).setConstant(true);
  BasebandFrame res = frame;
  res.samples = istft(repair_spectrogram(s, mask, ar_cfg), stft_cfg);
  return res;
}

std::vector<FrameRange> oracle_ranges(std::span<const double> interference,
                                      std::span<const double> echo,
                                      const StftConfig& stft_cfg, double rel_db) {
  if (interference.size() != echo.size())
    throw DataError("oracle_ranges: length mismatch");
  double echo_pow = 0.0;
  for (double v : echo) echo_pow += v * v;
  echo_pow /= static_cast<double>(std::max<std::size_t>(echo.size(), 1));
  const double limit = echo_pow * std::pow(10.0, rel_db / 10.0);

  const std::size_t frames = stft_cfg.frame_count(interference.size());
  std::vector<bool> hit(frames, false);
  for (std::size_t i = 0; i < interference.size(); ++i) {
    if (interference[i] * interference[i] <= limit) continue;
    // Frames z with z*hop <= i < z*hop + window_len.
    const std::size_t hi = std::min(i / stft_cfg.hop, frames - 1);
    const std::size_t lo =
        i + 1 >= stft_cfg.window_len ? (i + 1 - stft_cfg.window_len + stft_cfg.hop - 1) / stft_cfg.hop : 0;
    for (std::size_t z = lo; z <= hi && z < frames; ++z) hit[z] = true;
  }
  std::vector<FrameRange> out;
  for (const auto& r : masked_runs(hit)) out.emplace_back(r.begin, r.end);
  return out;
}

}  // namespace rim
