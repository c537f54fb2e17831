#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rim/types.hpp"

// FMCW scene synthesis: target echoes, interferer chirp trains and receiver
// noise at the analog simulation rate, followed by dechirp, anti-alias
// low-pass filtering and ADC decimation.
//
// All analog-rate signals are complex baseband equivalents referenced to the
// victim carrier: a signal with RF phase phi(t) is stored as
// exp(j 2 pi (phi(t) - f_c t)). The dechirp product r(t) conj(ref(t)) then
// carries exactly the difference-frequency term of the RF mixer output, and
// the real part is what the ADC samples.
namespace rim {

enum class SweepDirection { up, down };

struct RadarParams {
  double carrier_hz = 77e9;      // sweep start frequency
  double bandwidth_hz = 300e6;
  double sweep_time_s = 100e-6;
  SweepDirection direction = SweepDirection::up;
  double tx_power_w = 1.0;
  double antenna_gain = 1.0;     // linear
  double prt_s = 100e-6;
  double analog_rate_hz = 2e9;
  double if_rate_hz = 50e6;

  // Signed chirp rate, +B/T for up-chirps and -B/T for down-chirps.
  double chirp_rate() const;
  double wavelength() const;
  // Receiver checks (sampling rates, integer decimation) apply only when
  // `receiver` is set; interferers only need a valid waveform.
  void validate(bool receiver = true) const;
};

struct TargetSpec {
  double range_m = 100.0;
  double velocity_mps = 0.0;  // positive = receding
  double rcs_m2 = 10.0;
};

struct InterfererSpec {
  RadarParams radar;
  double distance_m = 100.0;
  // Start of the interferer's first chirp relative to the start of victim
  // chirp 0. Later chirps repeat at radar.prt_s.
  double start_offset_s = 0.0;
  // When set, the received interference power is pinned to
  // (total echo power) / 10^(sir_db/10) instead of the free-space value.
  std::optional<double> sir_db;
  // Raised-cosine rise and fall time of each interferer chirp envelope; 0
  // keeps the rectangular gate.
  double ramp_s = 0.0;
};

// Where the SNR is referenced. `analog`: echo power over noise variance of
// the dechirped signal at the analog rate, before the LPF. `adc`: the same
// ratio at the ADC output.
enum class SnrReference { analog, adc };

struct NoiseSpec {
  std::optional<double> snr_db;  // nullopt = noise-free
  std::uint64_t seed = 0;
  SnrReference reference = SnrReference::analog;
};

struct LpfSpec {
  double cutoff_hz = 20e6;       // -6 dB point
  double transition_hz = 5e6;    // full width, centred on the cutoff
  double stopband_db = 100.0;
};

struct ScenarioConfig {
  RadarParams victim;
  std::vector<TargetSpec> targets;
  std::vector<InterfererSpec> interferers;
  NoiseSpec noise;
  int n_chirps = 1;
  LpfSpec lpf;

  void validate() const;
  // Defaults derived from the victim IF rate: cutoff 0.8 Nyquist,
  // transition 0.2 Nyquist.
  static LpfSpec default_lpf(double if_rate_hz);
};

struct BasebandFrame {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;
  std::int64_t chirp_index = 0;
  std::optional<std::vector<double>> ground_truth;
};

struct AnalogRecord {
  std::vector<cdouble> received;   // echoes + interference + noise
  std::vector<cdouble> echo_only;  // ground-truth echoes
  double sample_rate_hz = 0.0;
  int chirp_index = 0;
};

// Transmit phase in cycles, f_c t + k t^2 / 2, for 0 <= t <= T.
double chirp_phase(const RadarParams& params, double t);
// Instantaneous transmit frequency f_c + k t.
double chirp_frequency(const RadarParams& params, double t);

// Received echo power, P_t G^2 lambda^2 sigma / ((4 pi)^3 R^4).
double echo_power(const RadarParams& radar, const TargetSpec& target);
// One-way interference power at the victim receiver,
// P_t G_i G_v lambda^2 / ((4 pi)^2 R_i^2); equals P_t G^2 lambda^2 /
// ((4 pi)^2 R_i^2) when both radars share power, gain and carrier.
double interference_power(const RadarParams& victim,
                          const InterfererSpec& intf);
// Signal-to-interference ratio in dB for co-located radars sharing P_t, G
// and lambda.
double sir_db(double range_m, double interferer_range_m, double rcs_m2);

// Beat frequency k * tau of a stationary target at range R.
double beat_frequency(const RadarParams& victim, double range_m);
// Number of ADC samples per chirp, round(T f_if).
std::size_t samples_per_chirp(const RadarParams& victim);

AnalogRecord synthesize_received(const ScenarioConfig& cfg, int chirp_index);
BasebandFrame dechirp(const ScenarioConfig& cfg, const AnalogRecord& record);
std::vector<BasebandFrame> simulate_scenario(const ScenarioConfig& cfg);

// Kaiser-windowed-sinc low-pass taps, odd length, unit DC gain.
std::vector<double> design_lowpass(double cutoff_hz, double transition_hz,
                                   double stopband_db, double sample_rate_hz);

}  // namespace rim
