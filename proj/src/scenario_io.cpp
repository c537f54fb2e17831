#include "rim/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "rim/error.hpp"

namespace rim {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    const int line = at.Mark().line >= 0 ? at.Mark().line + 1 : 0;
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + what);
  }

  YAML::Node need(const YAML::Node& parent, const std::string& key, const std::string& path) const {
    const YAML::Node n = parent[key];
    if (!n) fail(parent, "missing required field '" + path + key + "'");
    return n;
  }

  template <class T>
  T as(const YAML::Node& n, const std::string& name) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "field '" + name + "' has the wrong type");
    }
  }

  template <class T>
  T req(const YAML::Node& parent, const std::string& key, const std::string& path) const {
    return as<T>(need(parent, key, path), path + key);
  }

  template <class T>
  void opt(const YAML::Node& parent, const std::string& key, const std::string& path, T& out) const {
    if (const YAML::Node n = parent[key]) out = as<T>(n, path + key);
  }

 private:
  std::string source_;
};

SweepDirection parse_direction(const Reader& r, const YAML::Node& n, const std::string& name) {
  const auto s = r.as<std::string>(n, name);
  if (s == "up") return SweepDirection::up;
  if (s == "down") return SweepDirection::down;
  r.fail(n, "field '" + name + "' must be 'up' or 'down'");
}

RadarParams parse_radar(const Reader& r, const YAML::Node& n, const std::string& path) {
  if (!n.IsMap()) r.fail(n, "'" + path + "' must be a mapping");
  RadarParams p;
  p.carrier_hz = r.req<double>(n, "carrier_hz", path + ".");
  p.bandwidth_hz = r.req<double>(n, "bandwidth_hz", path + ".");
  p.sweep_time_s = r.req<double>(n, "sweep_time_s", path + ".");
  p.direction = parse_direction(r, r.need(n, "direction", path + "."), path + ".direction");
  p.prt_s = p.sweep_time_s;
  r.opt(n, "tx_power_w", path + ".", p.tx_power_w);
  r.opt(n, "antenna_gain", path + ".", p.antenna_gain);
  r.opt(n, "prt_s", path + ".", p.prt_s);
  r.opt(n, "analog_rate_hz", path + ".", p.analog_rate_hz);
  r.opt(n, "if_rate_hz", path + ".", p.if_rate_hz);
  return p;
}

void parse_stft(const Reader& r, const YAML::Node& n, StftConfig& c) {
  r.opt(n, "window_len", "stft.", c.window_len);
  r.opt(n, "hop", "stft.", c.hop);
  r.opt(n, "n_fft", "stft.", c.n_fft);
  if (const auto w = n["window"]) {
    try {
      c.window = parse_window_kind(r.as<std::string>(w, "stft.window"));
    } catch (const ConfigError& e) {
      r.fail(w, e.what());
    }
  }
}

void parse_ar(const Reader& r, const YAML::Node& n, const std::string& path, ArConfig& c) {
  r.opt(n, "max_order", path, c.max_order);
  r.opt(n, "fixed_order", path, c.fixed_order);
  r.opt(n, "min_clean_run", path, c.min_clean_run);
  if (const auto o = n["order_rule"]) {
    const auto s = r.as<std::string>(o, path + "order_rule");
    if (s == "aic") c.order_rule = OrderRule::aic;
    else if (s == "fixed") c.order_rule = OrderRule::fixed;
    else r.fail(o, "'" + path + "order_rule' must be 'aic' or 'fixed'");
  }
  if (const auto d = n["direction"]) {
    const auto s = r.as<std::string>(d, path + "direction");
    if (s == "forward") c.direction = ArDirection::forward;
    else if (s == "bidirectional") c.direction = ArDirection::bidirectional;
    else r.fail(d, "'" + path + "direction' must be 'forward' or 'bidirectional'");
  }
}

void parse_cfar(const Reader& r, const YAML::Node& n, const std::string& path, CfarConfig& c) {
  r.opt(n, "n_train", path, c.n_train);
  r.opt(n, "n_guard", path, c.n_guard);
  r.opt(n, "pfa", path, c.pfa);
}

void parse_hough(const Reader& r, const YAML::Node& n, MethodParams& mp) {
  HoughConfig& c = mp.proposed.hough;
  r.opt(n, "rho_res", "hough.", c.rho_res);
  r.opt(n, "exclusion_half_width_deg", "hough.", c.exclusion_half_width_deg);
  r.opt(n, "rel_threshold", "hough.", c.rel_threshold);
  r.opt(n, "nms_rho", "hough.", c.nms_rho);
  r.opt(n, "nms_theta", "hough.", c.nms_theta);
  r.opt(n, "max_lines", "hough.", c.max_lines);
  r.opt(n, "dilation", "hough.", c.dilation);
  r.opt(n, "bin_dilation", "hough.", c.bin_dilation);
  r.opt(n, "sequential", "hough.", c.sequential);
  if (const auto t = n["phys_threshold"]) c.phys_threshold = r.as<double>(t, "hough.phys_threshold");
  if (const auto step = n["theta_step_deg"]) {
    const double d = r.as<double>(step, "hough.theta_step_deg");
    if (!(d > 0.0 && d <= 90.0)) r.fail(step, "'hough.theta_step_deg' must lie in (0, 90]");
    c.theta_deg.clear();
    for (double th = -90.0; th < 90.0 - 1e-9; th += d) c.theta_deg.push_back(th);
  }
  if (const auto p = n["phys"]) {
    PhysThreshold ph;
    ph.alpha = r.req<double>(p, "alpha", "hough.phys.");
    r.opt(p, "rcs_max_m2", "hough.phys.", ph.rcs_max_m2);
    r.opt(p, "range_m", "hough.phys.", ph.range_m);
    mp.phys = ph;
  }
}

std::vector<Method> parse_methods(const Reader& r, const YAML::Node& n, const std::string& name) {
  if (!n.IsSequence()) r.fail(n, "'" + name + "' must be a list of method names");
  std::vector<Method> out;
  for (const auto& item : n) {
    try {
      out.push_back(parse_method(r.as<std::string>(item, name)));
    } catch (const ConfigError& e) {
      r.fail(item, e.what());
    }
  }
  return out;
}

RunConfig parse_root(const Reader& r, const YAML::Node& root) {
  if (!root.IsMap()) r.fail(root, "top level must be a mapping");
  RunConfig rc;
  r.opt(root, "name", "", rc.name);
  ScenarioConfig& sc = rc.scenario;
  sc.victim = parse_radar(r, r.need(root, "victim", ""), "victim");
  sc.lpf = ScenarioConfig::default_lpf(sc.victim.if_rate_hz);

  if (const auto ts = root["targets"]) {
    if (!ts.IsSequence()) r.fail(ts, "'targets' must be a list");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const std::string p = "targets[" + std::to_string(i) + "].";
      TargetSpec t;
      t.range_m = r.req<double>(ts[i], "range_m", p);
      t.rcs_m2 = r.req<double>(ts[i], "rcs_m2", p);
      r.opt(ts[i], "velocity_mps", p, t.velocity_mps);
      sc.targets.push_back(t);
    }
  }
  if (const auto is = root["interferers"]) {
    if (!is.IsSequence()) r.fail(is, "'interferers' must be a list");
    for (std::size_t i = 0; i < is.size(); ++i) {
      const std::string p = "interferers[" + std::to_string(i) + "]";
      InterfererSpec s;
      s.radar = parse_radar(r, r.need(is[i], "radar", p + "."), p + ".radar");
      s.distance_m = r.req<double>(is[i], "distance_m", p + ".");
      r.opt(is[i], "start_offset_s", p + ".", s.start_offset_s);
      r.opt(is[i], "ramp_s", p + ".", s.ramp_s);
      if (const auto sir = is[i]["sir_db"]) s.sir_db = r.as<double>(sir, p + ".sir_db");
      sc.interferers.push_back(s);
    }
  }
  if (const auto nz = root["noise"]) {
    if (const auto snr = nz["snr_db"]) {
      if (!(snr.IsScalar() && snr.Scalar() == "none")) sc.noise.snr_db = r.as<double>(snr, "noise.snr_db");
    }
    r.opt(nz, "seed", "noise.", sc.noise.seed);
    if (const auto ref = nz["reference"]) {
      const auto s = r.as<std::string>(ref, "noise.reference");
      if (s == "analog") sc.noise.reference = SnrReference::analog;
      else if (s == "adc") sc.noise.reference = SnrReference::adc;
      else r.fail(ref, "'noise.reference' must be 'analog' or 'adc'");
    }
  }
  r.opt(root, "n_chirps", "", sc.n_chirps);
  if (const auto lpf = root["lpf"]) {
    r.opt(lpf, "cutoff_hz", "lpf.", sc.lpf.cutoff_hz);
    r.opt(lpf, "transition_hz", "lpf.", sc.lpf.transition_hz);
    r.opt(lpf, "stopband_db", "lpf.", sc.lpf.stopband_db);
  }

  MethodParams& mp = rc.params;
  if (const auto s = root["stft"]) parse_stft(r, s, mp.proposed.stft);
  mp.cfar_burg.stft = mp.proposed.stft;
  if (const auto h = root["hough"]) parse_hough(r, h, mp);
  if (const auto a = root["ar"]) parse_ar(r, a, "ar.", mp.proposed.ar);
  mp.time.ar = mp.proposed.ar;
  mp.time.ar.direction = ArDirection::forward;
  if (const auto c = root["cfar"]) {
    CfarConfig cc;
    parse_cfar(r, c, "cfar.", cc);
    mp.time_cfar = cc;
  }
  if (const auto cb = root["cfar_burg"]) {
    parse_cfar(r, cb, "cfar_burg.", mp.cfar_burg.cfar);
    parse_ar(r, cb, "cfar_burg.", mp.cfar_burg.ar);
  }
  if (const auto im = root["imat"]) {
    r.opt(im, "iterations", "imat.", mp.time.imat.iterations);
    r.opt(im, "decay", "imat.", mp.time.imat.decay);
    if (const auto l = im["lambda0"]) mp.time.imat.lambda0 = r.as<double>(l, "imat.lambda0");
  }
  if (const auto sa = root["stft_ar"]) {
    r.opt(sa, "oracle_rel_db", "stft_ar.", mp.oracle_rel_db);
    if (const auto rg = sa["ranges"]) {
      if (!rg.IsSequence()) r.fail(rg, "'stft_ar.ranges' must be a list of [first, last) pairs");
      for (const auto& p : rg) {
        if (!p.IsSequence() || p.size() != 2) r.fail(p, "each stft_ar range must be [first, last]");
        mp.manual_ranges.emplace_back(r.as<std::size_t>(p[0], "stft_ar.ranges"),
                                      r.as<std::size_t>(p[1], "stft_ar.ranges"));
      }
    }
  }
  if (const auto m = root["metrics"]) r.opt(m, "range_nfft", "metrics.", mp.range_nfft);

  if (const auto ms = root["methods"]) rc.methods = parse_methods(r, ms, "methods");
  else rc.methods.assign(all_methods().begin(), all_methods().end());

  if (const auto sw = root["sweep"]) {
    SweepSpec s;
    const auto grid = r.need(sw, "snr_db", "sweep.");
    if (!grid.IsSequence()) r.fail(grid, "'sweep.snr_db' must be a list");
    for (const auto& g : grid) s.snr_db.push_back(r.as<double>(g, "sweep.snr_db"));
    r.opt(sw, "trials", "sweep.", s.trials);
    r.opt(sw, "base_seed", "sweep.", s.base_seed);
    if (const auto c = sw["calibrate"]) {
      SweepSpec::Calibrate cal;
      r.opt(c, "trials", "sweep.calibrate.", cal.trials);
      r.opt(c, "margin", "sweep.calibrate.", cal.margin);
      r.opt(c, "seed", "sweep.calibrate.", s.calibration_seed);
      s.calibrate = cal;
    }
    if (const auto ms = sw["methods"]) s.methods = parse_methods(r, ms, "sweep.methods");
    else s.methods = rc.methods;
    try {
      s.validate();
    } catch (const ConfigError& e) {
      r.fail(sw, e.what());
    }
    rc.sweep = s;
  }

  for (Method m : rc.methods) {
    try {
      mp.require(m);
    } catch (const ConfigError& e) {
      r.fail(root, e.what());
    }
  }
  try {
    sc.validate();
    mp.proposed.stft.validate();
    mp.proposed.hough.validate();
    mp.proposed.ar.validate();
    mp.cfar_burg.cfar.validate();
    mp.cfar_burg.ar.validate();
    if (mp.time_cfar) mp.time_cfar->validate();
    mp.time.imat.validate();
  } catch (const ConfigError& e) {
    r.fail(root, e.what());
  }
  return rc;
}

}  // namespace

void SweepSpec::validate() const {
  if (snr_db.empty()) throw ConfigError("sweep: empty SNR grid");
  if (trials < 1) throw ConfigError("sweep: trials must be >= 1");
  if (calibrate && (calibrate->trials < 1 || !(calibrate->margin > 0.0)))
    throw ConfigError("sweep.calibrate: trials must be >= 1 and margin > 0");
  if (methods.empty()) throw ConfigError("sweep: no methods");
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return parse_root(r, root);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  RunConfig rc = parse_run_config(ss.str(), path.string());
  if (rc.name == "scenario") rc.name = path.stem().string();
  return rc;
}

}  // namespace rim
