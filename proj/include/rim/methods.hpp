#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rim/baselines.hpp"
#include "rim/mitigate.hpp"

namespace rim {

enum class Method { proposed, zeroing, cw, t_ar, imat, cfar_burg, stft_ar };

std::span<const Method> all_methods();
std::string to_string(Method m);
// Throws ConfigError listing the valid names.
Method parse_method(std::string_view name);
bool is_time_domain(Method m);

// Hough threshold derived from a reference echo: alpha * P_e(rcs_max, range).
struct PhysThreshold {
  double alpha = 1.0;
  double rcs_max_m2 = 10.0;
  double range_m = 150.0;
};

struct MethodParams {
  MitigationConfig proposed;
  std::optional<PhysThreshold> phys;
  std::optional<CfarConfig> time_cfar;  // required by the time-domain methods
  TimeBaselineParams time;
  CfarBurgConfig cfar_burg;
  std::vector<FrameRange> manual_ranges;  // stft_ar; empty = use oracle labels
  double oracle_rel_db = -20.0;
  std::size_t range_nfft = 0;             // 0 = frame length

  // Throws ConfigError when `m` lacks its parameter block.
  void require(Method m) const;
};

struct MethodOutput {
  BasebandFrame frame;
  std::optional<MitigationDiagnostics> diag;  // proposed only
};

// `victim` resolves the physical Hough threshold when params.phys is set.
// `ranges` feeds stft_ar when params.manual_ranges is empty.
MethodOutput run_method(Method m, const BasebandFrame& frame, const MethodParams& params,
                        const RadarParams& victim, std::span<const FrameRange> ranges = {});

// Proposed configuration with the physical threshold filled in.
MitigationConfig resolve_proposed(const MethodParams& params, const RadarParams& victim);

}  // namespace rim
