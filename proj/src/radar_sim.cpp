#include "rim/radar_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rim/error.hpp"

namespace rim {
namespace {

// exp(j 2 pi cycles), with the integer part removed first so that large
// phase accumulations keep full precision.
cdouble unit_phasor(double cycles) {
  const double frac = cycles - std::floor(cycles);
  const double arg = 2.0 * kPi * frac;
  return {std::cos(arg), std::sin(arg)};
}

// Raised-cosine edges of length `ramp` at both ends of [0, len].
double ramp_gain(double u, double len, double ramp) {
  if (ramp <= 0.0) return 1.0;
  const double edge = std::min(u, len - u);
  if (edge >= ramp) return 1.0;
  return 0.5 * (1.0 - std::cos(kPi * std::max(edge, 0.0) / ramp));
}

double total_echo_power(const ScenarioConfig& cfg) {
  double total = 0.0;
  for (const auto& target : cfg.targets) total += echo_power(cfg.victim, target);
  return total;
}

double received_interference_power(const ScenarioConfig& cfg,
                                   const InterfererSpec& intf) {
  if (!intf.sir_db) return interference_power(cfg.victim, intf);
  double reference = total_echo_power(cfg);
  if (reference <= 0.0) reference = 1.0 / (2.0 * cfg.victim.tx_power_w);
  return reference / std::pow(10.0, *intf.sir_db / 10.0);
}

// Variance of the circular complex noise added to the received record.
double noise_variance(const ScenarioConfig& cfg,
                      const std::vector<double>& taps) {
  if (!cfg.noise.snr_db) return 0.0;
  double echo = total_echo_power(cfg);
  // With no targets the reference is a unit-power dechirped echo.
  if (echo <= 0.0) echo = 1.0 / (2.0 * cfg.victim.tx_power_w);
  const double snr = std::pow(10.0, *cfg.noise.snr_db / 10.0);
  // Dechirped echo power is 2 P_t P_e; dechirped real noise variance is
  // P_t sigma^2 at the analog rate and P_t sigma^2 sum(h^2) after the LPF.
  double gain = 1.0;
  if (cfg.noise.reference == SnrReference::adc) {
    gain = 0.0;
    for (double h : taps) gain += h * h;
  }
  return 2.0 * echo / (snr * gain);
}

std::mt19937_64 chirp_rng(std::uint64_t seed, int chirp_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chirp_index), 0x5eedu};
  return std::mt19937_64(seq);
}

std::size_t analog_length(const RadarParams& victim) {
  return static_cast<std::size_t>(
      std::llround(victim.sweep_time_s * victim.analog_rate_hz));
}

AnalogRecord synthesize_with_taps(const ScenarioConfig& cfg, int chirp_index,
                                  const std::vector<double>& taps) {
  const RadarParams& victim = cfg.victim;
  const std::size_t n = analog_length(victim);
  const double fs = victim.analog_rate_hz;
  const double chirp_start = chirp_index * victim.prt_s;

  AnalogRecord rec;
  rec.sample_rate_hz = fs;
  rec.chirp_index = chirp_index;
  rec.received.assign(n, cdouble{});
  rec.echo_only.assign(n, cdouble{});

  const double k = victim.chirp_rate();
  const double fc = victim.carrier_hz;
  for (const auto& target : cfg.targets) {
    const double amp = std::sqrt(2.0 * echo_power(victim, target));
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      const double tau =
          2.0 * (target.range_m + target.velocity_mps * (chirp_start + t)) /
          kSpeedOfLight;
      const double u = t - tau;
      // Echo not yet arrived: zero-filled.
      if (u < 0.0 || u > victim.sweep_time_s) continue;
      const double cycles = -fc * tau + 0.5 * k * u * u;
      rec.echo_only[i] += amp * unit_phasor(cycles);
    }
  }
  rec.received = rec.echo_only;

  const double window_begin = chirp_start;
  const double window_end = chirp_start + victim.sweep_time_s;
  for (const auto& intf : cfg.interferers) {
    const RadarParams& radar = intf.radar;
    const double amp = std::sqrt(2.0 * received_interference_power(cfg, intf));
    const double delay = intf.distance_m / kSpeedOfLight;
    const double ki = radar.chirp_rate();
    const double first = std::ceil((window_begin - delay - radar.sweep_time_s -
                                    intf.start_offset_s) /
                                   radar.prt_s);
    const double last =
        std::floor((window_end - delay - intf.start_offset_s) / radar.prt_s);
    for (double c = first; c <= last; c += 1.0) {
      // Local victim time at which this interferer chirp arrives.
      const double arrival =
          intf.start_offset_s + c * radar.prt_s + delay - chirp_start;
      const double carrier_cycles = fc * arrival;
      const double offset_hz = radar.carrier_hz - fc;
      const auto i0 = static_cast<std::size_t>(
          std::max(0.0, std::ceil(arrival * fs)));
      for (std::size_t i = i0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double u = t - arrival;
        if (u > radar.sweep_time_s) break;
        if (u < 0.0) continue;
        const double cycles = offset_hz * u + 0.5 * ki * u * u - carrier_cycles;
        rec.received[i] += amp * ramp_gain(u, radar.sweep_time_s, intf.ramp_s) * unit_phasor(cycles);
      }
    }
  }

  const double var = noise_variance(cfg, taps);
  if (var > 0.0) {
    auto rng = chirp_rng(cfg.noise.seed, chirp_index);
    std::normal_distribution<double> normal(0.0, std::sqrt(var / 2.0));
    for (auto& v : rec.received) v += cdouble(normal(rng), normal(rng));
  }
  return rec;
}

// Real part of the dechirp product at the analog rate.
std::vector<double> mix_down(const RadarParams& victim,
                             const std::vector<cdouble>& signal) {
  const double fs = victim.analog_rate_hz;
  const double k = victim.chirp_rate();
  const double ref_amp = std::sqrt(2.0 * victim.tx_power_w);
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double t = static_cast<double>(i) / fs;
    const cdouble ref = ref_amp * unit_phasor(0.5 * k * t * t);
    out[i] = (signal[i] * std::conj(ref)).real();
  }
  return out;
}

// Group-delay compensated FIR evaluated only at the ADC instants.
std::vector<double> filter_decimate(const std::vector<double>& x,
                                    const std::vector<double>& taps,
                                    std::size_t factor, std::size_t n_out) {
  const auto len = static_cast<std::ptrdiff_t>(taps.size());
  const std::ptrdiff_t half = (len - 1) / 2;
  const auto n_in = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> y(n_out, 0.0);
  for (std::size_t j = 0; j < n_out; ++j) {
    // y[j] = sum_k h[k] x[j D + half - k]
    const std::ptrdiff_t centre = static_cast<std::ptrdiff_t>(j * factor) + half;
    const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, centre - (n_in - 1));
    const std::ptrdiff_t k_hi = std::min<std::ptrdiff_t>(len - 1, centre);
    double acc = 0.0;
    for (std::ptrdiff_t kk = k_lo; kk <= k_hi; ++kk) acc += taps[kk] * x[centre - kk];
    y[j] = acc;
  }
  return y;
}

std::vector<double> scenario_taps(const ScenarioConfig& cfg) {
  return design_lowpass(cfg.lpf.cutoff_hz, cfg.lpf.transition_hz,
                        cfg.lpf.stopband_db, cfg.victim.analog_rate_hz);
}

BasebandFrame dechirp_with_taps(const ScenarioConfig& cfg,
                                const AnalogRecord& record,
                                const std::vector<double>& taps) {
  const RadarParams& victim = cfg.victim;
  if (record.received.size() != analog_length(victim) ||
      record.echo_only.size() != record.received.size())
    throw DataError("analog record does not cover one sweep");
  const auto factor = static_cast<std::size_t>(
      std::llround(victim.analog_rate_hz / victim.if_rate_hz));
  const std::size_t n_out = samples_per_chirp(victim);

  BasebandFrame frame;
  frame.sample_rate_hz = victim.if_rate_hz;
  frame.chirp_index = record.chirp_index;
  frame.samples =
      filter_decimate(mix_down(victim, record.received), taps, factor, n_out);
  frame.ground_truth =
      filter_decimate(mix_down(victim, record.echo_only), taps, factor, n_out);
  return frame;
}

}  // namespace

double RadarParams::chirp_rate() const {
  const double k = bandwidth_hz / sweep_time_s;
  return direction == SweepDirection::up ? k : -k;
}

double RadarParams::wavelength() const { return kSpeedOfLight / carrier_hz; }

void RadarParams::validate(bool receiver) const {
  if (!(carrier_hz > 0.0)) throw ConfigError("carrier_hz must be positive");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be positive");
  if (!(sweep_time_s > 0.0)) throw ConfigError("sweep_time_s must be positive");
  if (!(tx_power_w > 0.0)) throw ConfigError("tx_power_w must be positive");
  if (!(antenna_gain > 0.0)) throw ConfigError("antenna_gain must be positive");
  if (!(prt_s >= sweep_time_s))
    throw ConfigError("prt_s must not be shorter than sweep_time_s");
  if (!receiver) return;
  if (!(analog_rate_hz > 0.0) || !(if_rate_hz > 0.0))
    throw ConfigError("sampling rates must be positive");
  const double ratio = analog_rate_hz / if_rate_hz;
  if (ratio < 1.0 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    throw ConfigError(
        "analog_rate_hz must be an integer multiple of if_rate_hz");
}

LpfSpec ScenarioConfig::default_lpf(double if_rate_hz) {
  const double nyquist = if_rate_hz / 2.0;
  return LpfSpec{0.8 * nyquist, 0.2 * nyquist, 100.0};
}

void ScenarioConfig::validate() const {
  victim.validate(true);
  for (const auto& t : targets) {
    if (!(t.range_m > 0.0)) throw ConfigError("target range_m must be positive");
    if (!(t.rcs_m2 > 0.0)) throw ConfigError("target rcs_m2 must be positive");
  }
  for (const auto& intf : interferers) {
    intf.radar.validate(false);
    if (!(intf.distance_m > 0.0))
      throw ConfigError("interferer distance_m must be positive");
    if (intf.ramp_s < 0.0 || 2.0 * intf.ramp_s > intf.radar.sweep_time_s)
      throw ConfigError("interferer ramp_s must lie in [0, sweep_time_s / 2]");
    if (!(std::abs(intf.start_offset_s) < victim.prt_s))
      throw ConfigError("interferer start_offset_s must be within one victim prt");
  }
  if (n_chirps < 1) throw ConfigError("n_chirps must be at least 1");
  if (!(lpf.cutoff_hz > 0.0) || !(lpf.transition_hz > 0.0))
    throw ConfigError("lpf cutoff_hz and transition_hz must be positive");
  if (lpf.cutoff_hz > victim.if_rate_hz / 2.0)
    throw ConfigError("lpf cutoff_hz exceeds if_rate_hz/2 (aliasing)");
  if (lpf.stopband_db < 60.0)
    throw ConfigError("lpf stopband_db must be at least 60 dB");
}

double chirp_phase(const RadarParams& params, double t) {
  if (!(t >= 0.0 && t <= params.sweep_time_s))
    throw std::domain_error("chirp_phase: t outside [0, T]");
  return params.carrier_hz * t + 0.5 * params.chirp_rate() * t * t;
}

double chirp_frequency(const RadarParams& params, double t) {
  if (!(t >= 0.0 && t <= params.sweep_time_s))
    throw std::domain_error("chirp_frequency: t outside [0, T]");
  return params.carrier_hz + params.chirp_rate() * t;
}

double echo_power(const RadarParams& radar, const TargetSpec& target) {
  const double lambda = radar.wavelength();
  const double g = radar.antenna_gain;
  const double r2 = target.range_m * target.range_m;
  return radar.tx_power_w * g * g * lambda * lambda * target.rcs_m2 /
         (std::pow(4.0 * kPi, 3) * r2 * r2);
}

double interference_power(const RadarParams& victim,
                          const InterfererSpec& intf) {
  const double lambda = intf.radar.wavelength();
  return intf.radar.tx_power_w * intf.radar.antenna_gain * victim.antenna_gain *
         lambda * lambda /
         (std::pow(4.0 * kPi, 2) * intf.distance_m * intf.distance_m);
}

double sir_db(double range_m, double interferer_range_m, double rcs_m2) {
  const double r2 = range_m * range_m;
  return 10.0 * std::log10(interferer_range_m * interferer_range_m * rcs_m2 /
                           (4.0 * kPi * r2 * r2));
}

double beat_frequency(const RadarParams& victim, double range_m) {
  return std::abs(victim.chirp_rate()) * 2.0 * range_m / kSpeedOfLight;
}

std::size_t samples_per_chirp(const RadarParams& victim) {
  return static_cast<std::size_t>(
      std::llround(victim.sweep_time_s * victim.if_rate_hz));
}

std::vector<double> design_lowpass(double cutoff_hz, double transition_hz,
                                   double stopband_db, double sample_rate_hz) {
  if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0))
    throw ConfigError("low-pass cutoff must lie in (0, fs/2)");
  if (!(transition_hz > 0.0))
    throw ConfigError("low-pass transition width must be positive");
  const double a = stopband_db;
  double beta = 0.0;
  if (a > 50.0)
    beta = 0.1102 * (a - 8.7);
  else if (a >= 21.0)
    beta = 0.5842 * std::pow(a - 21.0, 0.4) + 0.07886 * (a - 21.0);
  const double dw = 2.0 * kPi * transition_hz / sample_rate_hz;
  auto len = static_cast<std::size_t>(std::ceil((a - 7.95) / (2.285 * dw))) + 1;
  if (len % 2 == 0) ++len;
  const double mid = static_cast<double>(len - 1) / 2.0;
  const double fc = cutoff_hz / sample_rate_hz;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);

  std::vector<double> h(len);
  double sum = 0.0;
  for (std::size_t n = 0; n < len; ++n) {
    const double x = static_cast<double>(n) - mid;
    const double sinc =
        x == 0.0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * x) / (kPi * x);
    const double r = mid > 0.0 ? x / mid : 0.0;
    const double kaiser =
        std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) /
        i0_beta;
    h[n] = sinc * kaiser;
    sum += h[n];
  }
  for (auto& v : h) v /= sum;
  return h;
}

AnalogRecord synthesize_received(const ScenarioConfig& cfg, int chirp_index) {
  cfg.validate();
  if (chirp_index < 0 || chirp_index >= cfg.n_chirps)
    throw ConfigError("chirp_index " + std::to_string(chirp_index) +
                      " outside [0, n_chirps)");
  return synthesize_with_taps(cfg, chirp_index, scenario_taps(cfg));
}

BasebandFrame dechirp(const ScenarioConfig& cfg, const AnalogRecord& record) {
  cfg.validate();
  return dechirp_with_taps(cfg, record, scenario_taps(cfg));
}

std::vector<BasebandFrame> simulate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto taps = scenario_taps(cfg);
  std::vector<BasebandFrame> frames;
  frames.reserve(static_cast<std::size_t>(cfg.n_chirps));
  for (int c = 0; c < cfg.n_chirps; ++c)
    frames.push_back(
        dechirp_with_taps(cfg, synthesize_with_taps(cfg, c, taps), taps));
  return frames;
}

}  // namespace rim
