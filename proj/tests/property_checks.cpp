#include "property_checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>

#include "rim/ar.hpp"
#include "rim/baselines.hpp"
#include "rim/hough.hpp"
#include "rim/metrics.hpp"
#include "rim/mitigate.hpp"
#include "rim/stft.hpp"

namespace rim::checks {

namespace {

std::string fmt(const char* f, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double interior_rel_error(std::span<const double> got, std::span<const double> want,
                          std::size_t lo, std::size_t hi) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

BasebandFrame two_tone_frame() {
  BasebandFrame f;
  f.sample_rate_hz = 50e6;
  f.samples = tone(5000, 3e6 / 50e6, 1.0, 0.3);
  const auto second = tone(5000, 7.3e6 / 50e6, 0.25, 1.1);
  for (std::size_t i = 0; i < f.samples.size(); ++i) f.samples[i] += second[i];
  f.ground_truth = f.samples;
  return f;
}

}  // namespace

std::vector<double> tone(std::size_t n, double cycles_per_sample, double amplitude,
                         double phase) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amplitude * std::cos(2.0 * kPi * cycles_per_sample * static_cast<double>(i) + phase);
  return x;
}

Outcome stft_round_trip(std::uint64_t seed) {
  struct Case {
    StftConfig cfg;
    std::size_t len;
  };
  const Case cases[] = {
      {{32, 4, 128, WindowKind::hamming}, 400},
      {{32, 4, 128, WindowKind::hamming}, 5000},
      {{32, 8, 64, WindowKind::hann}, 1000},
      {{16, 16, 16, WindowKind::rectangular}, 512},
      {{64, 16, 128, WindowKind::hamming}, 2049},
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (const auto& c : cases) {
    std::vector<double> x(c.len);
    for (auto& v : x) v = gauss(rng);
    const auto y = istft(stft(x, c.cfg), c.cfg);
    if (y.size() != x.size()) return {false, "istft changed the sequence length"};
    const std::size_t covered = (c.cfg.frame_count(c.len) - 1) * c.cfg.hop + c.cfg.window_len;
    worst = std::max(worst, interior_rel_error(y, x, c.cfg.window_len, covered - c.cfg.window_len));
  }
  return {worst < 1e-8, fmt("worst interior relative error %.3g", worst)};
}

RealMatrix brute_force_accumulator(const RealMatrix& image,
                                   const std::vector<double>& theta_deg,
                                   double rho_res) {
  const auto rows = image.rows(), cols = image.cols();
  const auto half = static_cast<long>(
      std::ceil(std::hypot(static_cast<double>(rows), static_cast<double>(cols)) / rho_res));
  RealMatrix out = RealMatrix::Zero(2 * half + 1, static_cast<Eigen::Index>(theta_deg.size()));
  for (std::size_t t = 0; t < theta_deg.size(); ++t) {
    double c = std::cos(theta_deg[t] * kPi / 180.0), s = std::sin(theta_deg[t] * kPi / 180.0);
    if (std::abs(c) < 1e-15) c = 0.0;
    if (std::abs(s) < 1e-15) s = 0.0;
    for (long r = -half; r <= half; ++r) {
      double sum = 0.0;
      for (Eigen::Index z = 0; z < rows; ++z)
        for (Eigen::Index m = 0; m < cols; ++m) {
          const double rho = static_cast<double>(z) * c + static_cast<double>(m) * s;
          if (std::lround(rho / rho_res) == r) sum += image(z, m);
        }
      out(r + half, static_cast<Eigen::Index>(t)) = sum;
    }
  }
  return out;
}

Outcome hough_brute_force(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const HoughConfig cfg;
  for (std::size_t k = 0; k < cases; ++k) {
    // Every fourth case shrinks the image to exercise the rho span.
    const Eigen::Index n = k % 4 == 3 ? 2 + static_cast<Eigen::Index>(k % 13) : 16;
    RealMatrix img(n, n);
    for (Eigen::Index i = 0; i < img.size(); ++i)
      img.data()[i] = u(rng) < 0.3 ? 0.0 : u(rng) * 10.0;
    const auto acc = hough_accumulate(img, cfg);
    const auto oracle = brute_force_accumulator(img, cfg.theta_deg, cfg.rho_res);
    if (acc.scores.rows() != oracle.rows() || acc.scores.cols() != oracle.cols())
      return {false, "accumulator shape differs in case " + std::to_string(k)};
    if (acc.scores != oracle)
      return {false, "accumulator differs from oracle in case " + std::to_string(k)};
  }
  return {true, std::to_string(cases) + " cases identical"};
}

Outcome hough_binary(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution on(0.2);
  const HoughConfig cfg;
  for (std::size_t k = 0; k < cases; ++k) {
    RealMatrix img(12, 20);
    for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = on(rng) ? 1.0 : 0.0;

    // Classical vote counting over integer counters.
    const long half = static_cast<long>(std::ceil(std::hypot(12.0, 20.0)));
    Eigen::MatrixXi votes = Eigen::MatrixXi::Zero(2 * half + 1, static_cast<int>(cfg.theta_deg.size()));
    for (Eigen::Index z = 0; z < img.rows(); ++z)
      for (Eigen::Index m = 0; m < img.cols(); ++m) {
        if (img(z, m) == 0.0) continue;
        for (std::size_t t = 0; t < cfg.theta_deg.size(); ++t) {
          double c = std::cos(cfg.theta_deg[t] * kPi / 180.0);
          double s = std::sin(cfg.theta_deg[t] * kPi / 180.0);
          if (std::abs(c) < 1e-15) c = 0.0;
          if (std::abs(s) < 1e-15) s = 0.0;
          const long r = std::lround(static_cast<double>(z) * c + static_cast<double>(m) * s);
          ++votes(r + half, static_cast<int>(t));
        }
      }
    const auto acc = hough_accumulate(img, cfg);
    if (acc.scores.rows() != votes.rows() || acc.scores != votes.cast<double>().eval())
      return {false, "binary accumulator differs in case " + std::to_string(k)};
  }
  return {true, std::to_string(cases) + " binary cases identical"};
}

Outcome ar2_sinusoid() {
  double worst = 0.0;
  for (double w : {0.1, 0.7, 2.0 * kPi * 5.0 / 64.0, 1.9, 3.0}) {
    const auto x = tone(256, w / (2.0 * kPi), 1.3, 0.4);
    const std::vector<cdouble> cx(x.begin(), x.end());
    const auto fit = fit_ar(cx, 2);
    worst = std::max({worst, std::abs(fit.coeffs[0] - cdouble(2.0 * std::cos(w), 0.0)),
                      std::abs(fit.coeffs[1] - cdouble(-1.0, 0.0))});
  }
  return {worst < 1e-8, fmt("worst coefficient error %.3g", worst)};
}

Outcome tone_gap_repair() {
  const ArConfig cfg;
  double worst = 0.0;
  for (double w : {0.2, 0.9, 2.4}) {
    for (bool complex_tone : {false, true}) {
      std::vector<cdouble> truth(93);
      for (std::size_t n = 0; n < truth.size(); ++n) {
        const double ph = w * static_cast<double>(n) + 0.3;
        truth[n] = complex_tone ? std::polar(2.0, ph) : cdouble(2.0 * std::cos(ph), 0.0);
      }
      std::vector<bool> gap_v(truth.size(), false);
      for (std::size_t n = 40; n < 45; ++n) gap_v[n] = true;
      auto damaged = truth;
      for (std::size_t n = 40; n < 45; ++n) damaged[n] = {50.0, -20.0};
      const std::unique_ptr<bool[]> gap(new bool[gap_v.size()]);
      std::copy(gap_v.begin(), gap_v.end(), gap.get());
      const auto rep = repair_slice(damaged, {gap.get(), gap_v.size()}, cfg);
      double num = 0.0, den = 0.0;
      for (std::size_t n = 40; n < 45; ++n) {
        num += std::norm(rep.values[n] - truth[n]);
        den += std::norm(truth[n]);
      }
      worst = std::max(worst, std::sqrt(num / den));
    }
  }
  return {worst < 1e-3, fmt("worst gap relative error %.3g", worst)};
}

Outcome identity_on_empty_masks() {
  const BasebandFrame f = two_tone_frame();
  const auto& x = f.samples;
  const StftConfig stft_cfg;
  const std::size_t lo = stft_cfg.window_len;
  const std::size_t hi = (stft_cfg.frame_count(x.size()) - 1) * stft_cfg.hop;
  double worst = 0.0;
  std::string worst_name;
  const auto note = [&](const std::string& name, std::span<const double> y) {
    const double e = interior_rel_error(y, x, lo, hi);
    if (e >= worst) {
      worst = e;
      worst_name = name;
    }
  };

  const TimeMask empty{std::vector<bool>(x.size(), false)};
  const TimeBaselineParams tp;
  note("zeroing", apply_time_baseline(TimeMethod::zeroing, f, empty, tp).samples);
  note("cw", apply_time_baseline(TimeMethod::cw, f, empty, tp).samples);
  note("t_ar", apply_time_baseline(TimeMethod::t_ar, f, empty, tp).samples);
  note("imat", apply_time_baseline(TimeMethod::imat, f, empty, tp).samples);
  note("stft_ar", stft_ar_manual(f, stft_cfg, ArConfig{}, {}).samples);

  const Spectrogram s = stft(x, stft_cfg, f.sample_rate_hz);
  const BoolMatrix none = BoolMatrix::Constant(s.data.rows(), s.data.cols(), false);
  note("repair", istft(repair_spectrogram(s, none, ArConfig{}), stft_cfg));

  const auto res = mitigate(f, MitigationConfig{});
  if (!res.diag.lines.empty()) return {false, "proposed detected lines on a clean frame"};
  note("proposed", res.frame.samples);
  note("cfar_burg", cfar_burg(f, CfarBurgConfig{}).samples);

  return {worst < 1e-8, fmt("worst relative change %.3g", worst) + " (" + worst_name + ")"};
}

Outcome metric_identities() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::vector<double> s(512), s2(512);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = g(rng);
    s2[i] = 2.0 * s[i];
  }
  const double cs = cosine_similarity(s, s);
  const double e = evm(s2, s);

  // Bin-centred tone mid band so its mirror image adds no leakage;
  // rectangular window, heavy zero padding.
  const auto t = tone(256, 64.0 / 256.0);
  const Profile p = range_profile(t, 1.0, 1.0, WindowKind::rectangular, 256 * 32);
  const double pslr = pslr_db(p.power, auto_mainlobe(p.power));

  const bool ok = std::abs(cs - 1.0) < 1e-12 && std::abs(e - 1.0) < 1e-12 &&
                  std::abs(pslr + 13.26) <= 0.1;
  char buf[160];
  std::snprintf(buf, sizeof buf, "cs(s,s)=%.15f evm(2s,s)=%.15f rect pslr=%.3f dB", cs, e, pslr);
  return {ok, buf};
}

}  // namespace rim::checks
