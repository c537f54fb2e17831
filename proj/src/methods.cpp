#include "rim/methods.hpp"

#include <array>
#include <cmath>

#include "rim/error.hpp"

namespace rim {

namespace {

constexpr std::array kMethods{Method::proposed, Method::zeroing,   Method::cw,
                              Method::t_ar,     Method::imat,      Method::cfar_burg,
                              Method::stft_ar};

}  // namespace

std::span<const Method> all_methods() { return kMethods; }

std::string to_string(Method m) {
  switch (m) {
    case Method::proposed: return "proposed";
    case Method::zeroing: return "zeroing";
    case Method::cw: return "cw";
    case Method::t_ar: return "t_ar";
    case Method::imat: return "imat";
    case Method::cfar_burg: return "cfar_burg";
    case Method::stft_ar: return "stft_ar";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : kMethods)
    if (to_string(m) == name) return m;
  std::string valid;
  for (Method m : kMethods) valid += (valid.empty() ? "" : ", ") + to_string(m);
  throw ConfigError("unknown method '" + std::string(name) + "' (valid: " + valid + ")");
}

bool is_time_domain(Method m) {
  return m == Method::zeroing || m == Method::cw || m == Method::t_ar || m == Method::imat;
}

void MethodParams::require(Method m) const {
  if (is_time_domain(m) && !time_cfar)
    throw ConfigError("method " + to_string(m) + " requires a 'cfar' parameter block");
}

MitigationConfig resolve_proposed(const MethodParams& params, const RadarParams& victim) {
  MitigationConfig cfg = params.proposed;
  if (params.phys) {
    const double pe = echo_power(victim, {params.phys->range_m, 0.0, params.phys->rcs_max_m2});
    const double thd = params.phys->alpha * pe;
    cfg.hough.phys_threshold = cfg.hough.phys_threshold ? std::max(*cfg.hough.phys_threshold, thd) : thd;
  }
  return cfg;
}

MethodOutput run_method(Method m, const BasebandFrame& frame, const MethodParams& params,
                        const RadarParams& victim, std::span<const FrameRange> ranges) {
  params.require(m);
  MethodOutput out;
  if (is_time_domain(m)) {
    std::vector<double> mag(frame.samples.size());
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(frame.samples[i]);
    const TimeMask mask = cfar_detect(mag, *params.time_cfar);
    const TimeMethod tm = m == Method::zeroing ? TimeMethod::zeroing
                          : m == Method::cw    ? TimeMethod::cw
                          : m == Method::t_ar  ? TimeMethod::t_ar
                                               : TimeMethod::imat;
    out.frame = apply_time_baseline(tm, frame, mask, params.time);
    return out;
  }
  switch (m) {
    case Method::proposed: {
      auto res = mitigate(frame, resolve_proposed(params, victim));
      out.frame = std::move(res.frame);
      out.diag = std::move(res.diag);
      break;
    }
    case Method::cfar_burg:
      out.frame = cfar_burg(frame, params.cfar_burg);
      break;
    case Method::stft_ar:
      out.frame = stft_ar_manual(frame, params.proposed.stft, params.proposed.ar,
                                 params.manual_ranges.empty() ? ranges
                                                              : std::span<const FrameRange>(params.manual_ranges));
      break;
    default:
      break;
  }
  return out;
}

}  // namespace rim
