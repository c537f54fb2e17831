// rimctl: simulate, mitigate and evaluate FMCW interference scenarios.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rim/error.hpp"
#include "rim/experiments.hpp"
#include "rim/frame_io.hpp"
#include "rim/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace rim;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::string in;
  std::string truth;
  std::string method = "proposed";
  std::optional<std::uint64_t> seed;
  std::size_t trials = 0;
  bool dump_tf = false;
  std::string format = "bin";
  double margin = 2.0;
};

RunConfig need_config(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required for this command");
  RunConfig rc = load_run_config(o.config);
  if (o.seed) rc.scenario.noise.seed = *o.seed;
  return rc;
}

void print_summary(const RunConfig& rc) {
  const auto& sc = rc.scenario;
  const auto& v = sc.victim;
  std::printf("scenario %s: %d chirp(s), %zu samples at %.6g Hz, k = %.6g Hz/s\n", rc.name.c_str(),
              sc.n_chirps, samples_per_chirp(v), v.if_rate_hz, v.chirp_rate());
  for (std::size_t i = 0; i < sc.targets.size(); ++i) {
    const auto& t = sc.targets[i];
    std::printf("  target %zu: R = %.6g m, v = %.6g m/s, rcs = %.6g m^2, P_e = %.6g W, f_b = %.6g Hz\n", i,
                t.range_m, t.velocity_mps, t.rcs_m2, echo_power(v, t), beat_frequency(v, t.range_m));
  }
  for (std::size_t i = 0; i < sc.interferers.size(); ++i) {
    const auto& f = sc.interferers[i];
    const double ki = f.radar.chirp_rate();
    std::printf("  interferer %zu: k_i = %.6g Hz/s, k - k_i = %.6g Hz/s, R_i = %.6g m", i, ki,
                v.chirp_rate() - ki, f.distance_m);
    if (f.sir_db) std::printf(", SIR pinned to %.6g dB", *f.sir_db);
    for (std::size_t t = 0; t < sc.targets.size(); ++t)
      std::printf(", SIR(target %zu) = %.4g dB", t,
                  sir_db(sc.targets[t].range_m, f.distance_m, sc.targets[t].rcs_m2));
    std::printf("\n");
  }
}

void write_output_frames(const std::vector<BasebandFrame>& frames, const fs::path& dir,
                         const std::string& stem, const std::string& format) {
  fs::create_directories(dir);
  if (format == "csv")
    write_frames_csv(frames, dir / (stem + ".csv"));
  else if (format == "bin")
    write_frames(frames, dir / (stem + ".cwf"));
  else
    throw ConfigError("--format must be 'bin' or 'csv'");
}

int cmd_simulate(const Options& o) {
  const RunConfig rc = need_config(o);
  print_summary(rc);
  const auto frames = simulate_scenario(rc.scenario);
  write_output_frames(frames, o.out, "frames", o.format);
  std::printf("wrote %zu frame(s) to %s\n", frames.size(), o.out.c_str());
  return 0;
}

int cmd_mitigate(const Options& o) {
  const RunConfig rc = need_config(o);
  const Method m = parse_method(o.method);
  rc.params.require(m);

  std::vector<SimulatedCase> cases;
  if (!o.in.empty()) {
    for (auto& f : read_frames(o.in)) cases.push_back({std::move(f), {}, {}});
    if (m == Method::stft_ar && rc.params.manual_ranges.empty())
      throw ConfigError("stft_ar on recorded frames needs stft_ar.ranges in the config");
  } else {
    cases = simulate_cases(rc);
  }
  const MethodRun run = run_on_cases(m, rc, cases);
  write_output_frames(run.frames, o.out, "mitigated", o.format);

  for (std::size_t i = 0; i < run.diagnostics.size(); ++i) {
    const auto& d = run.diagnostics[i];
    std::printf("frame %zu: %zu line(s)", i, d.lines.size());
    for (const auto& l : d.lines)
      std::printf(" [rho %.0f, theta %.0f, score %.4g]", l.rho, l.theta_deg, l.score);
    std::printf("; stft %.3f s, detect %.3f s, repair %.3f s, istft %.3f s\n", d.seconds_stft,
                d.seconds_detect, d.seconds_repair, d.seconds_istft);
    if (o.dump_tf) {
      const fs::path dir = fs::path(o.out) / ("tf_" + std::to_string(i));
      write_diagnostics(d, dir);
      const Spectrogram s = stft(cases[i].frame.samples, rc.params.proposed.stft,
                                 cases[i].frame.sample_rate_hz);
      write_spectrogram_bin(s, dir / "spectrogram.cws");
      const auto cfg = resolve_proposed(rc.params, rc.scenario.victim);
      write_accumulator_csv(hough_accumulate(half_power(s), cfg.hough), dir / "accumulator.csv");
    }
  }
  std::printf("%s: %zu frame(s) in %.3f s\n", to_string(m).c_str(), run.frames.size(), run.seconds);
  return 0;
}

int cmd_evaluate(const Options& o) {
  if (o.in.empty()) throw ConfigError("--in is required for evaluate");
  const auto rec = read_frames(o.in);
  std::vector<BasebandFrame> truth;
  if (!o.truth.empty()) {
    truth = read_frames(o.truth);
  } else {
    truth = rec;
    for (auto& f : truth) {
      if (!f.ground_truth) throw DataError("frame " + std::to_string(f.chirp_index) + " carries no ground truth; pass --truth");
      f.samples = *f.ground_truth;
    }
  }
  if (rec.size() != truth.size()) throw DataError("frame counts differ between --in and --truth");

  std::optional<RunConfig> rc;
  if (!o.config.empty()) rc = need_config(o);
  const double k = rc ? rc->scenario.victim.chirp_rate() : 1.0;
  const std::size_t nfft = rc ? rc->params.range_nfft : 0;

  std::vector<MetricsRow> rows;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (rec[i].samples.size() != truth[i].samples.size())
      throw DataError("frame " + std::to_string(i) + ": length differs from truth");
    rows.push_back({rc ? rc->name : "frames", o.method, o.seed.value_or(0), rec[i].chirp_index,
                    evaluate_frame(rec[i].samples, truth[i].samples, rec[i].sample_rate_hz, k, nfft)});
  }
  fs::create_directories(o.out);
  write_metrics_csv(rows, fs::path(o.out) / "metrics.csv");
  if (rc && rec.size() >= 2) {
    std::vector<RdReport> reps{rd_report(*rc, truth, std::nullopt), rd_report(*rc, rec, parse_method(o.method))};
    write_rd_reports(reps, fs::path(o.out) / "rd.csv");
  }
  std::printf("wrote %zu row(s) to %s\n", rows.size(), (fs::path(o.out) / "metrics.csv").c_str());
  return 0;
}

int cmd_run(const Options& o) {
  const RunConfig rc = need_config(o);
  print_summary(rc);
  const auto cases = simulate_cases(rc);
  std::vector<MetricsRow> rows;
  std::vector<RdReport> rd;
  if (rc.scenario.n_chirps >= 2) rd.push_back(rd_report(rc, truth_frames(cases), std::nullopt));
  for (Method m : rc.methods) {
    if (m == Method::stft_ar && rc.scenario.n_chirps >= 2) continue;
    const MethodRun run = run_on_cases(m, rc, cases);
    auto r = score_run(rc, run, cases, rc.scenario.noise.seed);
    if (rc.scenario.n_chirps >= 2) rd.push_back(rd_report(rc, run.frames, m));
    if (rc.scenario.n_chirps == 1) {
      const auto& rep = r.front().report;
      std::printf("%-10s cs %.4f  evm %.4f  pslr %.2f dB  islr %.2f dB  (%.3f s)", to_string(m).c_str(),
                  rep.cs, rep.evm, rep.pslr_db, rep.islr_db, run.seconds);
      if (!run.diagnostics.empty()) std::printf("  lines %zu", run.diagnostics.front().lines.size());
      std::printf("\n");
    } else {
      std::printf("%-10s %zu chirps in %.3f s\n", to_string(m).c_str(), run.frames.size(), run.seconds);
    }
    rows.insert(rows.end(), r.begin(), r.end());
  }
  fs::create_directories(o.out);
  write_metrics_csv(rows, fs::path(o.out) / "metrics.csv");
  if (!rd.empty()) {
    write_rd_reports(rd, fs::path(o.out) / "rd.csv");
    for (const auto& r : rd)
      std::printf("rd %-10s peak (%zu, %zu) = %.2f m, %.2f m/s; expected (%zu, %zu); velocity pslr %.2f dB islr %.2f dB\n",
                  r.method == Method::proposed && &r == &rd.front() ? "truth" : to_string(r.method).c_str(),
                  r.peak_range_bin, r.peak_velocity_bin, r.peak_range_m, r.peak_velocity_mps,
                  r.expected_range_bin, r.expected_velocity_bin, r.velocity_pslr_db, r.velocity_islr_db);
  }
  return 0;
}

int cmd_sweep(const Options& o) {
  RunConfig rc = need_config(o);
  if (!rc.sweep) throw ConfigError(o.config + ": no 'sweep' block");
  if (o.seed) rc.sweep->base_seed = *o.seed;
  const auto res = run_sweep(rc, o.trials, [](const std::string& msg) {
    std::fprintf(stderr, "%s\n", msg.c_str());
  });
  write_sweep(res, rc.name, o.out);
  for (const auto& s : res.summary)
    std::printf("snr %6.1f  %-10s cs %.4f +- %.4f  evm %.4f +- %.4f  pslr %.2f  islr %.2f\n", s.snr_db,
                to_string(s.method).c_str(), s.cs_mean, s.cs_std, s.evm_mean, s.evm_std, s.pslr_mean,
                s.islr_mean);
  return 0;
}

int cmd_calibrate(const Options& o) {
  const RunConfig rc = need_config(o);
  const PhysThreshold ref = rc.params.phys.value_or(PhysThreshold{});
  const Calibration cal = calibrate_threshold(rc, o.trials ? o.trials : 16, o.margin, ref);
  std::printf("max allowed-angle score %.6g, reference echo power %.6g W, alpha %.6g (margin %.3g)\n",
              cal.max_allowed_score, cal.reference_power, cal.alpha, o.margin);
  fs::create_directories(o.out);
  nlohmann::ordered_json js{{"max_allowed_score", cal.max_allowed_score},
                            {"reference_power_w", cal.reference_power},
                            {"margin", o.margin},
                            {"alpha", cal.alpha},
                            {"rcs_max_m2", ref.rcs_max_m2},
                            {"range_m", ref.range_m}};
  std::ofstream(fs::path(o.out) / "calibration.json") << js.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FMCW radar mutual-interference simulation and mitigation"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "scenario YAML file");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "noise seed (sweep: base seed)");
  };
  auto* sim = app.add_subcommand("simulate", "simulate frames with ground truth");
  common(sim);
  sim->add_option("--format", o.format, "bin or csv")->check(CLI::IsMember({"bin", "csv"}));

  auto* mit = app.add_subcommand("mitigate", "run one mitigation method");
  common(mit);
  mit->add_option("--in", o.in, "frame file (default: simulate from --config)");
  mit->add_option("--method", o.method, "method name");
  mit->add_flag("--dump-tf", o.dump_tf, "write spectrogram, accumulator and mask per frame");
  mit->add_option("--format", o.format, "bin or csv")->check(CLI::IsMember({"bin", "csv"}));

  auto* ev = app.add_subcommand("evaluate", "score recovered frames against ground truth");
  common(ev);
  ev->add_option("--in", o.in, "recovered frame file")->required();
  ev->add_option("--truth", o.truth, "truth frame file (default: embedded ground truth)");
  ev->add_option("--method", o.method, "method label for the report");

  auto* run = app.add_subcommand("run", "simulate and score every configured method");
  common(run);

  auto* sw = app.add_subcommand("sweep", "Monte-Carlo SNR sweep");
  common(sw);
  sw->add_option("--trials", o.trials, "trials per SNR point (default from config)");

  auto* cal = app.add_subcommand("calibrate-threshold", "fit the physical Hough threshold factor");
  common(cal);
  cal->add_option("--trials", o.trials, "interference-free runs (default 16)");
  cal->add_option("--margin", o.margin, "multiplier on the largest observed score");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*mit) return cmd_mitigate(o);
    if (*ev) return cmd_evaluate(o);
    if (*run) return cmd_run(o);
    if (*sw) return cmd_sweep(o);
    if (*cal) return cmd_calibrate(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
