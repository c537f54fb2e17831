#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rim/methods.hpp"
#include "rim/radar_sim.hpp"

namespace rim {

struct SweepSpec {
  std::vector<double> snr_db;
  std::size_t trials = 64;
  std::vector<Method> methods;
  std::uint64_t base_seed = 0;
  // When set, the physical Hough threshold is refitted at every SNR point
  // from interference-free frames (seeds from calibration_seed up).
  struct Calibrate {
    std::size_t trials = 16;
    double margin = 1.0;
  };
  std::optional<Calibrate> calibrate;
  std::uint64_t calibration_seed = 1000000;

  void validate() const;
};

struct RunConfig {
  std::string name = "scenario";
  ScenarioConfig scenario;
  MethodParams params;
  std::vector<Method> methods;  // methods evaluated by default
  std::optional<SweepSpec> sweep;
};

// Parses the YAML scenario format (see configs/SCHEMA.md). Errors are
// ConfigError with "<source>:<line>: " prefixes.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace rim
