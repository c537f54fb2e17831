#include "rim/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"

#include "rim/error.hpp"

namespace rim {

std::vector<SimulatedCase> simulate_cases(const RunConfig& rc, std::optional<std::uint64_t> seed,
                                          std::optional<double> snr_db) {
  ScenarioConfig sc = rc.scenario;
  if (seed) sc.noise.seed = *seed;
  if (snr_db) sc.noise.snr_db = *snr_db;
  const auto frames = simulate_scenario(sc);

  // The chain is linear, so the noise-free received minus the echo is the
  // interference alone.
  ScenarioConfig quiet = sc;
  quiet.noise.snr_db.reset();
  const auto clean = sc.noise.snr_db ? simulate_scenario(quiet) : frames;

  std::vector<SimulatedCase> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    SimulatedCase c;
    c.frame = frames[i];
    const auto& rx = clean[i].samples;
    const auto& gt = *clean[i].ground_truth;
    c.interference.resize(rx.size());
    for (std::size_t j = 0; j < rx.size(); ++j) c.interference[j] = rx[j] - gt[j];
    c.oracle = oracle_ranges(c.interference, gt, rc.params.proposed.stft, rc.params.oracle_rel_db);
    out.push_back(std::move(c));
  }
  return out;
}

MethodRun run_on_cases(Method m, const RunConfig& rc, std::span<const SimulatedCase> cases) {
  MethodRun run{m, {}, {}, 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& c : cases) {
    auto out = run_method(m, c.frame, rc.params, rc.scenario.victim, c.oracle);
    run.frames.push_back(std::move(out.frame));
    if (out.diag) run.diagnostics.push_back(std::move(*out.diag));
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

std::vector<MetricsRow> score_run(const RunConfig& rc, const MethodRun& run,
                                  std::span<const SimulatedCase> cases, std::uint64_t seed) {
  std::vector<MetricsRow> rows;
  for (std::size_t i = 0; i < run.frames.size(); ++i) {
    const auto& truth = *cases[i].frame.ground_truth;
    rows.push_back({rc.name, to_string(run.method), seed, run.frames[i].chirp_index,
                    evaluate_frame(run.frames[i].samples, truth, run.frames[i].sample_rate_hz,
                                   rc.scenario.victim.chirp_rate(), rc.params.range_nfft)});
  }
  return rows;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  // Population standard deviation over the trials.
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace

std::vector<SweepSummary> summarize(std::span<const SweepTrial> trials) {
  std::map<std::pair<double, int>, std::vector<const SweepTrial*>> groups;
  std::vector<std::pair<double, int>> order;
  for (const auto& t : trials) {
    const std::pair key{t.snr_db, static_cast<int>(t.method)};
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&t);
  }
  std::vector<SweepSummary> out;
  for (const auto& key : order) {
    const auto& g = groups[key];
    std::vector<double> cs, ev, ps, is;
    for (const auto* t : g) {
      cs.push_back(t->report.cs);
      ev.push_back(t->report.evm);
      ps.push_back(t->report.pslr_db);
      is.push_back(t->report.islr_db);
    }
    SweepSummary s;
    s.snr_db = key.first;
    s.method = g.front()->method;
    s.trials = g.size();
    std::tie(s.cs_mean, s.cs_std) = mean_std(cs);
    std::tie(s.evm_mean, s.evm_std) = mean_std(ev);
    std::tie(s.pslr_mean, s.pslr_std) = mean_std(ps);
    std::tie(s.islr_mean, s.islr_std) = mean_std(is);
    out.push_back(s);
  }
  return out;
}

SweepResult run_sweep(const RunConfig& rc, std::size_t trials, const Progress& progress) {
  if (!rc.sweep) throw ConfigError("config has no 'sweep' block");
  const SweepSpec& spec = *rc.sweep;
  const std::size_t n_trials = trials ? trials : spec.trials;
  for (Method m : spec.methods) rc.params.require(m);

  // Trials are stored per (snr, trial, method) while running and reordered
  // to (snr, method, trial) afterwards.
  SweepResult res;
  for (double snr : spec.snr_db) {
    RunConfig point = rc;
    point.scenario.n_chirps = 1;
    if (spec.calibrate) {
      const PhysThreshold ref = rc.params.phys.value_or(PhysThreshold{});
      RunConfig cal_cfg = point;
      cal_cfg.scenario.noise.snr_db = snr;
      cal_cfg.scenario.noise.seed = spec.calibration_seed;
      const Calibration cal =
          calibrate_threshold(cal_cfg, spec.calibrate->trials, spec.calibrate->margin, ref);
      point.params.phys = PhysThreshold{cal.alpha, ref.rcs_max_m2, ref.range_m};
      res.alpha_by_snr.emplace_back(snr, cal.alpha);
    }
    std::vector<std::vector<SweepTrial>> per_method(spec.methods.size());
    for (std::size_t t = 0; t < n_trials; ++t) {
      const std::uint64_t seed = spec.base_seed + t;
      const RunConfig& one = point;
      const auto cases = simulate_cases(one, seed, snr);
      for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
        const auto run = run_on_cases(spec.methods[mi], one, cases);
        const auto rows = score_run(one, run, cases, seed);
        per_method[mi].push_back({snr, spec.methods[mi], t, seed, rows.front().report});
      }
      if (progress && (t + 1) % 8 == 0)
        progress("snr " + format_metric(snr) + " dB: " + std::to_string(t + 1) + "/" +
                 std::to_string(n_trials) + " trials");
    }
    for (auto& v : per_method) res.trials.insert(res.trials.end(), v.begin(), v.end());
  }
  res.summary = summarize(res.trials);
  return res;
}

void write_sweep(const SweepResult& res, const std::string& scenario,
                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream trials(dir / "trials.csv");
  if (!trials) throw DataError("cannot write " + (dir / "trials.csv").string());
  trials << "scenario,snr_db,method,trial,seed,cs,evm,pslr_db,islr_db\n";
  for (const auto& t : res.trials)
    trials << scenario << ',' << format_metric(t.snr_db) << ',' << to_string(t.method) << ','
           << t.trial << ',' << t.seed << ',' << format_metric(t.report.cs) << ','
           << format_metric(t.report.evm) << ',' << format_metric(t.report.pslr_db) << ','
           << format_metric(t.report.islr_db) << '\n';

  std::ofstream summary(dir / "summary.csv");
  if (!summary) throw DataError("cannot write " + (dir / "summary.csv").string());
  summary << "scenario,snr_db,method,trials,cs_mean,cs_std,evm_mean,evm_std,pslr_mean,pslr_std,"
             "islr_mean,islr_std\n";
  nlohmann::ordered_json js;
  js["scenario"] = scenario;
  js["points"] = nlohmann::ordered_json::array();
  for (const auto& s : res.summary) {
    summary << scenario << ',' << format_metric(s.snr_db) << ',' << to_string(s.method) << ','
            << s.trials << ',' << format_metric(s.cs_mean) << ',' << format_metric(s.cs_std) << ','
            << format_metric(s.evm_mean) << ',' << format_metric(s.evm_std) << ','
            << format_metric(s.pslr_mean) << ',' << format_metric(s.pslr_std) << ','
            << format_metric(s.islr_mean) << ',' << format_metric(s.islr_std) << '\n';
    // Values go through the same fixed formatting as the CSV.
    const auto num = [](double v) { return std::stod(format_metric(v)); };
    js["points"].push_back({{"snr_db", num(s.snr_db)},
                            {"method", to_string(s.method)},
                            {"trials", s.trials},
                            {"cs", {{"mean", num(s.cs_mean)}, {"std", num(s.cs_std)}}},
                            {"evm", {{"mean", num(s.evm_mean)}, {"std", num(s.evm_std)}}},
                            {"pslr_db", {{"mean", num(s.pslr_mean)}, {"std", num(s.pslr_std)}}},
                            {"islr_db", {{"mean", num(s.islr_mean)}, {"std", num(s.islr_std)}}}});
  }
  if (!res.alpha_by_snr.empty()) {
    js["threshold_alpha"] = nlohmann::ordered_json::array();
    for (const auto& [snr, alpha] : res.alpha_by_snr)
      js["threshold_alpha"].push_back({{"snr_db", snr}, {"alpha", alpha}});
  }
  std::ofstream json(dir / "summary.json");
  if (!json) throw DataError("cannot write " + (dir / "summary.json").string());
  json << js.dump(2) << '\n';
}

std::vector<BasebandFrame> truth_frames(std::span<const SimulatedCase> cases) {
  std::vector<BasebandFrame> out;
  for (const auto& c : cases) {
    BasebandFrame f = c.frame;
    f.samples = *c.frame.ground_truth;
    out.push_back(std::move(f));
  }
  return out;
}

RdReport rd_report(const RunConfig& rc, std::span<const BasebandFrame> frames,
                   std::optional<Method> method) {
  const RdMap rd = rd_map(frames, rc.scenario.victim, rc.params.range_nfft);
  RdReport rep;
  if (method) rep.method = *method;
  Eigen::Index r = 0, v = 0;
  rd.power.maxCoeff(&r, &v);
  rep.peak_range_bin = static_cast<std::size_t>(r);
  rep.peak_velocity_bin = static_cast<std::size_t>(v);
  rep.peak_range_m = rd.range_axis[rep.peak_range_bin];
  rep.peak_velocity_mps = rd.velocity_axis[rep.peak_velocity_bin];

  if (!rc.scenario.targets.empty()) {
    const auto& t = rc.scenario.targets.front();
    const auto nearest = [](const std::vector<double>& axis, double x) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < axis.size(); ++i)
        if (std::abs(axis[i] - x) < std::abs(axis[best] - x)) best = i;
      return best;
    };
    rep.expected_range_bin = nearest(rd.range_axis, t.range_m);
    rep.expected_velocity_bin = nearest(rd.velocity_axis, t.velocity_mps);
  }
  // The velocity cut is taken at the expected target range.
  const Profile vp = velocity_profile(rd, rep.expected_range_bin);
  const Lobe lobe = auto_mainlobe(vp.power);
  rep.velocity_pslr_db = pslr_db(vp.power, lobe);
  rep.velocity_islr_db = islr_db(vp.power, lobe);
  return rep;
}

void write_rd_reports(std::span<const RdReport> reports, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path.string());
  os << "method,peak_range_bin,peak_velocity_bin,peak_range_m,peak_velocity_mps,"
        "expected_range_bin,expected_velocity_bin,velocity_pslr_db,velocity_islr_db\n";
  for (const auto& r : reports)
    os << to_string(r.method) << ',' << r.peak_range_bin << ',' << r.peak_velocity_bin << ','
       << format_metric(r.peak_range_m) << ',' << format_metric(r.peak_velocity_mps) << ','
       << r.expected_range_bin << ',' << r.expected_velocity_bin << ','
       << format_metric(r.velocity_pslr_db) << ',' << format_metric(r.velocity_islr_db) << '\n';
}

Calibration calibrate_threshold(const RunConfig& rc, std::size_t trials, double margin,
                                const PhysThreshold& reference) {
  if (trials == 0) throw ConfigError("calibration needs at least one trial");
  RunConfig quiet = rc;
  quiet.scenario.interferers.clear();
  quiet.scenario.n_chirps = 1;
  Calibration cal;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto frames = simulate_scenario([&] {
      ScenarioConfig sc = quiet.scenario;
      sc.noise.seed = rc.scenario.noise.seed + t;
      return sc;
    }());
    const Spectrogram s = stft(frames.front().samples, rc.params.proposed.stft,
                               frames.front().sample_rate_hz);
    const auto acc = hough_accumulate(half_power(s), rc.params.proposed.hough);
    cal.max_allowed_score = std::max(cal.max_allowed_score, allowed_peak(acc, rc.params.proposed.hough));
  }
  cal.reference_power = echo_power(rc.scenario.victim, {reference.range_m, 0.0, reference.rcs_max_m2});
  cal.alpha = margin * cal.max_allowed_score / cal.reference_power;
  return cal;
}

}  // namespace rim
