#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rim/metrics.hpp"
#include "rim/scenario_io.hpp"

// Experiment drivers shared by the CLI and the acceptance tests.
namespace rim {

struct SimulatedCase {
  BasebandFrame frame;                // received, with ground truth
  std::vector<double> interference;  // noise-free interference component
  std::vector<FrameRange> oracle;    // hand-label substitute for stft_ar
};

// Simulates every chirp of the scenario. `seed` and `snr_db` override the
// noise block when given.
std::vector<SimulatedCase> simulate_cases(const RunConfig& rc,
                                          std::optional<std::uint64_t> seed = {},
                                          std::optional<double> snr_db = {});

struct MethodRun {
  Method method;
  std::vector<BasebandFrame> frames;
  std::vector<MitigationDiagnostics> diagnostics;  // proposed only
  double seconds = 0.0;
};

MethodRun run_on_cases(Method m, const RunConfig& rc, std::span<const SimulatedCase> cases);

// One metrics row per frame.
std::vector<MetricsRow> score_run(const RunConfig& rc, const MethodRun& run,
                                  std::span<const SimulatedCase> cases, std::uint64_t seed);

struct SweepTrial {
  double snr_db = 0.0;
  Method method = Method::proposed;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  MetricsReport report;
};

struct SweepSummary {
  double snr_db = 0.0;
  Method method = Method::proposed;
  std::size_t trials = 0;
  double cs_mean = 0, cs_std = 0, evm_mean = 0, evm_std = 0;
  double pslr_mean = 0, pslr_std = 0, islr_mean = 0, islr_std = 0;
};

struct SweepResult {
  std::vector<SweepTrial> trials;  // ordered by (snr, method, trial)
  std::vector<SweepSummary> summary;
  std::vector<std::pair<double, double>> alpha_by_snr;  // (snr dB, fitted alpha)
};

using Progress = std::function<void(const std::string&)>;

// Trial seeds are base_seed + trial index, shared across SNR points and
// methods. `trials` overrides the spec when nonzero.
SweepResult run_sweep(const RunConfig& rc, std::size_t trials = 0, const Progress& progress = {});
std::vector<SweepSummary> summarize(std::span<const SweepTrial> trials);
// trials.csv, summary.csv and summary.json.
void write_sweep(const SweepResult& res, const std::string& scenario,
                 const std::filesystem::path& dir);

struct RdReport {
  Method method = Method::proposed;
  std::size_t peak_range_bin = 0, peak_velocity_bin = 0;
  double peak_range_m = 0.0, peak_velocity_mps = 0.0;
  std::size_t expected_range_bin = 0, expected_velocity_bin = 0;
  double velocity_pslr_db = 0.0, velocity_islr_db = 0.0;
};

// RD processing of one multi-chirp run; the expected bins come from the first
// target. `method` nullopt scores the ground truth.
RdReport rd_report(const RunConfig& rc, std::span<const BasebandFrame> frames,
                   std::optional<Method> method);
std::vector<BasebandFrame> truth_frames(std::span<const SimulatedCase> cases);
void write_rd_reports(std::span<const RdReport> reports, const std::filesystem::path& path);

struct Calibration {
  double max_allowed_score = 0.0;  // largest allowed-angle accumulator value
  double reference_power = 0.0;    // echo power P_e(rcs_max, range)
  double alpha = 0.0;              // margin * max_allowed_score / reference_power
};

// Runs the Hough accumulator on interference-free versions of the scenario
// (interferers removed) over `trials` noise seeds.
Calibration calibrate_threshold(const RunConfig& rc, std::size_t trials, double margin,
                                const PhysThreshold& reference);

}  // namespace rim
