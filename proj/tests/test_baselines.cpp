#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "property_checks.hpp"
#include "rim/baselines.hpp"
#include "rim/error.hpp"
#include "rim/experiments.hpp"
#include "rim/fft.hpp"
#include "rim/metrics.hpp"

using namespace rim;

namespace {

TimeMask mask_range(std::size_t n, std::size_t lo, std::size_t hi) {
  TimeMask m{std::vector<bool>(n, false)};
  for (std::size_t i = lo; i < hi; ++i) m.flags[i] = true;
  return m;
}

BasebandFrame frame_of(std::vector<double> x) {
  BasebandFrame f;
  f.sample_rate_hz = 50e6;
  f.ground_truth = x;
  f.samples = std::move(x);
  return f;
}

double gap_rel_error(std::span<const double> got, std::span<const double> want,
                     std::size_t lo, std::size_t hi) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("CFAR flags nothing on a constant envelope") {
  const std::vector<double> flat(500, 3.0);
  CHECK(cfar_detect(flat, CfarConfig{}).count() == 0);
}

TEST_CASE("CFAR flags a 30 dB impulse and only that") {
  std::vector<double> x(500, 1.0);
  x[250] = std::sqrt(1000.0);
  const auto m = cfar_detect(x, CfarConfig{});
  CHECK(m.count() == 1);
  CHECK(m.flags[250]);
}

TEST_CASE("CFAR false-alarm rate on Rayleigh noise") {
  std::mt19937_64 rng(21);
  std::exponential_distribution<double> power(1.0);
  const std::size_t n = 1'000'000;
  std::vector<double> mag(n);
  for (auto& v : mag) v = std::sqrt(power(rng));
  const CfarConfig cfg;
  const double rate = static_cast<double>(cfar_detect(mag, cfg).count()) / static_cast<double>(n);
  INFO("false-alarm rate " << rate);
  CHECK(rate >= cfg.pfa / 3.0);
  CHECK(rate <= cfg.pfa * 3.0);
}

TEST_CASE("CFAR scale matches the cell-averaging closed form") {
  // pfa = (1 + T/n)^-n for exponential noise.
  for (std::size_t n : {4u, 16u, 32u}) {
    const double t = CfarConfig::scale(n, 1e-3);
    CHECK(std::pow(1.0 + t / static_cast<double>(n), -static_cast<double>(n)) == doctest::Approx(1e-3));
  }
}

TEST_CASE("a fully masked frame is rejected") {
  const auto f = frame_of(checks::tone(64, 0.1));
  const TimeMask all{std::vector<bool>(64, true)};
  for (auto m : {TimeMethod::zeroing, TimeMethod::cw, TimeMethod::t_ar, TimeMethod::imat})
    CHECK_THROWS_AS(apply_time_baseline(m, f, all, TimeBaselineParams{}), ConfigError);
}

TEST_CASE("zeroing clears exactly the masked samples") {
  const auto x = checks::tone(300, 0.07, 2.0);
  const auto m = mask_range(x.size(), 100, 140);
  const auto y = apply_zeroing(x, m);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == (m.flags[i] ? 0.0 : x[i]));
}

TEST_CASE("the raised-cosine taper vanishes at the run centre") {
  const std::vector<double> x(100, 1.0);
  const auto y = apply_cw(x, mask_range(x.size(), 40, 49));
  CHECK(std::abs(y[44]) < 1e-15);
  CHECK(y[39] == 1.0);
  CHECK(y[49] == 1.0);
  for (std::size_t i = 40; i < 49; ++i) CHECK(y[i] < 1.0);
  CHECK(y[41] == doctest::Approx(y[47]));
}

TEST_CASE("time-domain AR refills a tone gap") {
  const auto x = checks::tone(400, 0.043, 1.0, 0.5);
  auto damaged = x;
  for (std::size_t i = 200; i < 230; ++i) damaged[i] = 40.0;
  const auto y = apply_time_ar(damaged, mask_range(x.size(), 200, 230), ArConfig{});
  CHECK(gap_rel_error(y, x, 200, 230) < 1e-3);
}

TEST_CASE("IMAT with a fixed low threshold reaches the sparse fill") {
  // Three bin-centred tones; a contiguous gap. The oracle is the exact
  // signal, which is also the least-squares fit on the known support.
  const std::size_t n = 256;
  std::vector<double> x(n, 0.0);
  const struct { double bin, amp, phase; } tones[] = {{9, 1.0, 0.2}, {31, 0.6, 1.4}, {70, 0.35, -0.8}};
  for (const auto& t : tones) {
    const auto c = checks::tone(n, t.bin / static_cast<double>(n), t.amp, t.phase);
    for (std::size_t i = 0; i < n; ++i) x[i] += c[i];
  }
  double min_coeff = 1e300;
  const auto spec = fft::forward(std::span<const double>(x));
  for (const auto& t : tones) min_coeff = std::min(min_coeff, std::abs(spec[static_cast<std::size_t>(t.bin)]));

  const auto mask = mask_range(n, 120, 136);
  auto damaged = x;
  for (std::size_t i = 120; i < 136; ++i) damaged[i] = -5.0;
  ImatConfig cfg;
  cfg.iterations = 200;
  cfg.decay = 0.0;
  cfg.lambda0 = 0.5 * min_coeff;
  const auto y = apply_imat(damaged, mask, cfg);
  const double err = gap_rel_error(y, x, 120, 136);
  INFO("gap error " << err);
  CHECK(err < 1e-3);
  for (std::size_t i = 0; i < n; ++i)
    if (!mask.flags[i]) CHECK(y[i] == x[i]);
}

TEST_CASE("CFAR-Burg leaves a clean tone alone") {
  const auto f = frame_of(checks::tone(5000, 0.06, 1.0, 0.3));
  BoolMatrix mask;
  const auto y = cfar_burg(f, CfarBurgConfig{}, &mask);
  CHECK(cosine_similarity(y.samples, f.samples) > 0.999);
}

TEST_CASE("STFT-AR rejects bad ranges") {
  const auto f = frame_of(checks::tone(1000, 0.06));
  const StftConfig s;
  const std::vector<FrameRange> overlap{{10, 20}, {15, 30}};
  CHECK_THROWS_AS(stft_ar_manual(f, s, ArConfig{}, overlap), ConfigError);
  const std::vector<FrameRange> past{{10, 5000}};
  CHECK_THROWS_AS(stft_ar_manual(f, s, ArConfig{}, past), ConfigError);
  const std::vector<FrameRange> empty_range{{10, 10}};
  CHECK_THROWS_AS(stft_ar_manual(f, s, ArConfig{}, empty_range), ConfigError);
}

TEST_CASE("oracle labels cover every frame touching the burst") {
  const std::size_t n = 5000;
  std::vector<double> interference(n, 0.0);
  const std::vector<double> echo(n, 1.0);
  for (std::size_t i = 1000; i < 1100; ++i) interference[i] = 10.0;
  const auto ranges = oracle_ranges(interference, echo, StftConfig{}, -20.0);
  REQUIRE(ranges.size() == 1);
  CHECK(ranges[0] == FrameRange{243, 275});
  CHECK(oracle_ranges(std::vector<double>(n, 0.0), echo, StftConfig{}, -20.0).empty());
}

TEST_CASE("wider STFT-AR ranges cost accuracy") {
  const auto rc = load_run_config(RIM_CONFIG_DIR "/noise_free.yaml");
  const auto sim = simulate_cases(rc).front();
  REQUIRE_FALSE(sim.oracle.empty());
  const auto& s = rc.params.proposed.stft;
  const std::size_t frames = s.frame_count(sim.frame.samples.size());

  std::vector<FrameRange> wide;
  for (const auto& [a, b] : sim.oracle) {
    const std::size_t half = (b - a + 1) / 2;
    const std::size_t lo = a > half ? a - half : 0, hi = std::min(frames, b + half);
    if (!wide.empty() && lo <= wide.back().second) wide.back().second = std::max(wide.back().second, hi);
    else wide.emplace_back(lo, hi);
  }
  const auto& truth = *sim.frame.ground_truth;
  const double e_oracle = evm(stft_ar_manual(sim.frame, s, rc.params.proposed.ar, sim.oracle).samples, truth);
  const double e_wide = evm(stft_ar_manual(sim.frame, s, rc.params.proposed.ar, wide).samples, truth);
  INFO("evm oracle " << e_oracle << ", doubled " << e_wide);
  CHECK(e_wide > e_oracle);
}

}
