#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "property_checks.hpp"
#include "rim/ar.hpp"
#include "rim/error.hpp"

using namespace rim;

namespace {

// std::vector<bool> has no contiguous storage for std::span.
struct GapMask {
  explicit GapMask(std::size_t n) : flags(new bool[n]()), size(n) {}
  void set(std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) flags[i] = true;
  }
  std::span<const bool> span() const { return {flags.get(), size}; }
  std::unique_ptr<bool[]> flags;
  std::size_t size;
};

std::vector<cdouble> ar2_process(std::size_t n, cdouble a1, cdouble a2, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  std::vector<cdouble> x(n + 200);
  for (std::size_t i = 2; i < x.size(); ++i)
    x[i] = a1 * x[i - 1] + a2 * x[i - 2] + cdouble(g(rng), g(rng));
  return {x.begin() + 200, x.end()};
}

// Coefficients of the model with poles p1, p2.
std::pair<cdouble, cdouble> from_poles(cdouble p1, cdouble p2) { return {p1 + p2, -p1 * p2}; }

const auto kPoles = from_poles(std::polar(0.9, 0.5), std::polar(0.8, -1.2));

std::vector<cdouble> complex_tone(std::size_t n, double w, double amp = 1.0) {
  std::vector<cdouble> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::polar(amp, w * static_cast<double>(i) + 0.7);
  return x;
}

}  // namespace

TEST_SUITE("ar") {

TEST_CASE("one pole fits a geometric sequence") {
  std::vector<cdouble> x(40);
  const cdouble r{0.9, 0.2};
  x[0] = {1.5, -0.5};
  for (std::size_t i = 1; i < x.size(); ++i) x[i] = r * x[i - 1];
  const auto fit = fit_ar(x, 1);
  CHECK(std::abs(fit.coeffs[0] - r) < 1e-12);
}

TEST_CASE("one pole fits a complex exponential") {
  const double w = 0.83;
  const auto fit = fit_ar(complex_tone(100, w), 1);
  CHECK(std::abs(fit.coeffs[0] - std::polar(1.0, w)) < 1e-12);
  CHECK(fit.residual_variance < 1e-10);
}

TEST_CASE("two poles fit a real sinusoid") {
  const auto r = checks::ar2_sinusoid();
  INFO(r.detail);
  CHECK(r.ok);
}

TEST_CASE("least squares recovers a noisy AR(2) generator") {
  std::mt19937_64 rng(11);
  const auto [a1, a2] = kPoles;
  const auto x = ar2_process(4096, a1, a2, rng);
  const auto fit = fit_ar(x, 2);
  CHECK(std::abs(fit.coeffs[0] - a1) < 0.05);
  CHECK(std::abs(fit.coeffs[1] - a2) < 0.05);
  CHECK(fit.residual_variance == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("AIC picks the generating order of an AR(2) process") {
  std::mt19937_64 rng(12);
  ArConfig cfg;
  int hits = 0;
  const int trials = 100;
  for (int k = 0; k < trials; ++k)
    hits += select_order(ar2_process(512, kPoles.first, kPoles.second, rng), cfg) == 2;
  INFO("q = 2 in " << hits << " of " << trials);
  CHECK(hits >= 90);
}

TEST_CASE("AIC keeps the order small on white noise") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  ArConfig cfg;
  int small = 0;
  for (int k = 0; k < 100; ++k) {
    std::vector<cdouble> x(512);
    for (auto& v : x) v = {g(rng), g(rng)};
    small += select_order(x, cfg) <= 2;
  }
  INFO("q <= 2 in " << small << " of 100");
  CHECK(small >= 90);
}

TEST_CASE("a constant sequence is an order-one unit pole") {
  const std::vector<cdouble> x(64, cdouble{2.0, -1.0});
  CHECK(select_order(x, ArConfig{}) == 1);
  const auto fit = fit_ar(x, 1);
  CHECK(std::abs(fit.coeffs[0] - 1.0) < 1e-12);
}

TEST_CASE("rank-deficient fits are regularised and flagged") {
  const std::vector<cdouble> x(64, cdouble{1.0, 0.0});
  const auto fit = fit_ar(x, 3);
  CHECK(fit.regularized);
  cdouble sum{};
  for (auto c : fit.coeffs) sum += c;
  CHECK(std::abs(sum - 1.0) < 1e-6);
  CHECK_THROWS_AS(fit_ar(x, 0), ConfigError);
  CHECK_THROWS_AS(fit_ar(std::span<const cdouble>(x).first(5), 3), DataError);
}

TEST_CASE("an empty gap mask leaves the slice untouched") {
  std::mt19937_64 rng(14);
  const auto x = ar2_process(93, {1.0, 0.0}, {-0.5, 0.0}, rng);
  const GapMask none(x.size());
  const auto rep = repair_slice(x, none.span(), ArConfig{});
  CHECK(rep.values == x);
  CHECK(rep.order == 0);
}

TEST_CASE("tone gaps are repaired almost exactly") {
  const auto r = checks::tone_gap_repair();
  INFO(r.detail);
  CHECK(r.ok);
}

TEST_CASE("gaps up to eight samples anywhere in the interior") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> w(0.05, 3.0);
  std::uniform_int_distribution<std::size_t> width(1, 8), start(20, 65);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const auto truth = complex_tone(93, w(rng), 1.5);
    const std::size_t lo = start(rng), hi = lo + width(rng);
    GapMask gap(truth.size());
    gap.set(lo, hi);
    auto damaged = truth;
    for (std::size_t i = lo; i < hi; ++i) damaged[i] = {30.0, 30.0};
    const auto rep = repair_slice(damaged, gap.span(), ArConfig{});
    double num = 0.0, den = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      num += std::norm(rep.values[i] - truth[i]);
      den += std::norm(truth[i]);
    }
    worst = std::max(worst, std::sqrt(num / den));
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (i < lo || i >= hi) REQUIRE(rep.values[i] == damaged[i]);
  }
  INFO("worst " << worst);
  CHECK(worst < 1e-3);
}

TEST_CASE("a gap at the slice start falls back to backward prediction") {
  const auto truth = complex_tone(93, 0.6);
  GapMask gap(truth.size());
  gap.set(0, 5);
  auto damaged = truth;
  for (std::size_t i = 0; i < 5; ++i) damaged[i] = 0.0;
  ArConfig cfg;
  cfg.direction = ArDirection::forward;
  const auto rep = repair_slice(damaged, gap.span(), cfg);
  CHECK(rep.backward_fallback);
  CHECK_FALSE(rep.zero_filled);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(rep.values[i] - truth[i]) < 1e-6);
}

TEST_CASE("too little clean context zero-fills and flags") {
  const auto truth = complex_tone(30, 0.6);
  GapMask gap(truth.size());
  gap.set(10, 20);  // clean runs of 10 < min_clean_run 16
  const auto rep = repair_slice(truth, gap.span(), ArConfig{});
  CHECK(rep.zero_filled);
  for (std::size_t i = 10; i < 20; ++i) CHECK(rep.values[i] == cdouble{});
}

TEST_CASE("repair error grows with gap width") {
  // Same tones and noise at every width; error measured against the clean tone.
  std::vector<double> mean_err;
  for (std::size_t width = 1; width <= 16; width += 3) {
    std::mt19937_64 rng(16);
    std::normal_distribution<double> g(0.0, 0.1);
    std::uniform_real_distribution<double> w(0.1, 3.0);
    double acc = 0.0;
    for (int k = 0; k < 100; ++k) {
      const auto clean = complex_tone(93, w(rng));
      auto noisy = clean;
      for (auto& v : noisy) v += cdouble(g(rng), g(rng));
      GapMask gap(noisy.size());
      gap.set(40, 40 + width);
      const auto rep = repair_slice(noisy, gap.span(), ArConfig{});
      double e = 0.0;
      for (std::size_t i = 40; i < 40 + width; ++i) e += std::norm(rep.values[i] - clean[i]);
      acc += e / static_cast<double>(width);
    }
    mean_err.push_back(acc / 100.0);
  }
  for (std::size_t i = 1; i < mean_err.size(); ++i) {
    INFO("width step " << i << ": " << mean_err[i - 1] << " -> " << mean_err[i]);
    CHECK(mean_err[i] >= mean_err[i - 1]);
  }
}

TEST_CASE("Burg and least squares agree on a long sinusoid") {
  const double w = 2.0 * kPi * 5.0 / 64.0;
  const auto x = checks::tone(513, w / (2.0 * kPi), 1.0, 0.3);
  const std::vector<cdouble> cx(x.begin(), x.end());
  const auto ls = fit_ar(cx, 2), burg = fit_burg(cx, 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(ls.coeffs[i] - burg.coeffs[i]) < 1e-6);
}

TEST_CASE("Burg matches least squares on a noisy AR(2) process") {
  std::mt19937_64 rng(17);
  const auto x = ar2_process(8192, kPoles.first, kPoles.second, rng);
  const auto ls = fit_ar(x, 2), burg = fit_burg(x, 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(ls.coeffs[i] - burg.coeffs[i]) < 0.01);
}

TEST_CASE("pole reflection keeps stable models and fixes unstable ones") {
  const std::vector<cdouble> stable{kPoles.first, kPoles.second};
  CHECK(stabilize_ar(stable) == stable);

  // Poles at 2 and 0.5: reflection gives a double pole at 0.5.
  const std::vector<cdouble> unstable{{2.5, 0.0}, {-1.0, 0.0}};
  const auto fixed = stabilize_ar(unstable);
  CHECK(std::abs(fixed[0] - 1.0) < 1e-9);
  CHECK(std::abs(fixed[1] + 0.25) < 1e-9);

  std::vector<cdouble> out(200);
  out[0] = 1.0;
  out[1] = 1.0;
  ar_extrapolate(fixed, out, 2, out.size());
  CHECK(std::abs(out.back()) < 1e-6);
}

}
