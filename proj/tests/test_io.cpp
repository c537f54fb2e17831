#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rim/error.hpp"
#include "rim/frame_io.hpp"
#include "rim/scenario_io.hpp"

using namespace rim;
namespace fs = std::filesystem;

namespace {

BasebandFrame random_frame(std::size_t n, std::int64_t index, bool truth, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1e-3);
  BasebandFrame f;
  f.sample_rate_hz = 50e6;
  f.chirp_index = index;
  f.samples.resize(n);
  for (auto& v : f.samples) v = g(rng);
  if (truth) {
    f.ground_truth.emplace(n);
    for (auto& v : *f.ground_truth) v = g(rng);
  }
  return f;
}

fs::path temp(const std::string& name) { return fs::temp_directory_path() / name; }

const char* kMinimal = R"(name: minimal
methods: [proposed]
victim:
  carrier_hz: 77.0e9
  bandwidth_hz: 300.0e6
  sweep_time_s: 100.0e-6
  direction: up
targets:
  - {range_m: 150.0, rcs_m2: 10.0}
)";

}  // namespace

TEST_SUITE("io") {

TEST_CASE("frames survive a file round trip at float32 precision") {
  std::vector<BasebandFrame> frames{random_frame(5000, 0, true, 1), random_frame(5000, 1, true, 2),
                                    random_frame(123, 7, false, 3)};
  const auto path = temp("rim_test_frames.cwf");
  write_frames(frames, path);
  const auto back = read_frames(path);
  fs::remove(path);
  REQUIRE(back.size() == frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto want = quantize_to_file_precision(frames[i]);
    CHECK(back[i].chirp_index == want.chirp_index);
    CHECK(back[i].sample_rate_hz == want.sample_rate_hz);
    CHECK(back[i].samples == want.samples);
    CHECK(back[i].ground_truth.has_value() == want.ground_truth.has_value());
    if (want.ground_truth) CHECK(*back[i].ground_truth == *want.ground_truth);
  }
}

TEST_CASE("quantisation is idempotent and within float rounding") {
  const auto f = random_frame(1000, 0, true, 4);
  const auto q = quantize_to_file_precision(f);
  CHECK(quantize_to_file_precision(q).samples == q.samples);
  for (std::size_t i = 0; i < f.samples.size(); ++i)
    CHECK(std::abs(q.samples[i] - f.samples[i]) <= 0x1p-24 * std::abs(f.samples[i]));
}

TEST_CASE("corrupt or truncated frame files are rejected") {
  const auto path = temp("rim_test_bad.cwf");
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOPE and some more bytes to fill a header............................";
  }
  CHECK_THROWS_AS(read_frames(path), DataError);

  write_frames(std::vector<BasebandFrame>{random_frame(100, 0, false, 5)}, path);
  fs::resize_file(path, fs::file_size(path) - 10);
  CHECK_THROWS_AS(read_frames(path), DataError);
  fs::remove(path);
  CHECK_THROWS_AS(read_frames(path), DataError);
}

TEST_CASE("CSV frames carry a truth column when present") {
  const auto path = temp("rim_test_frames.csv");
  write_frames_csv(std::vector<BasebandFrame>{random_frame(3, 0, true, 6)}, path);
  std::ifstream is(path);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(is, line))
    if (!line.empty() && line.find(',') != std::string::npos) ++rows;
  fs::remove(path);
  CHECK(rows >= 3);
}

TEST_CASE("a minimal scenario parses with defaults filled in") {
  const auto rc = parse_run_config(kMinimal);
  CHECK(rc.name == "minimal");
  CHECK(rc.scenario.victim.prt_s == rc.scenario.victim.sweep_time_s);
  REQUIRE(rc.scenario.targets.size() == 1);
  CHECK(rc.scenario.targets[0].velocity_mps == 0.0);
  CHECK_FALSE(rc.scenario.noise.snr_db.has_value());
  CHECK(rc.scenario.n_chirps == 1);
}

TEST_CASE("a missing required field names the field and its line") {
  std::string text = kMinimal;
  text.replace(text.find("  bandwidth_hz: 300.0e6\n"), 23, "");
  try {
    parse_run_config(text, "bad.yaml");
    FAIL("no error raised");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    INFO(msg);
    CHECK(msg.find("victim.bandwidth_hz") != std::string::npos);
    CHECK(msg.rfind("bad.yaml:", 0) == 0);
    // The victim mapping starts on line 4.
    CHECK(msg.find("bad.yaml:4:") == 0);
  }
}

TEST_CASE("wrong types and unknown names are configuration errors") {
  std::string text = kMinimal;
  text.replace(text.find("direction: up"), 13, "direction: sideways");
  CHECK_THROWS_AS(parse_run_config(text), ConfigError);
  CHECK_THROWS_AS(parse_run_config("methods: [magic]\n" + std::string(kMinimal).substr(std::string(kMinimal).find("victim:"))), ConfigError);
  CHECK_THROWS_AS(parse_run_config(std::string(kMinimal) + "stft: {window_len: many}\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("victim: [1, 2"), ConfigError);
}

TEST_CASE("every shipped configuration parses") {
  for (const char* name : {"noise_free.yaml", "snr_sweep.yaml", "moving_target.yaml"}) {
    INFO(name);
    CHECK_NOTHROW(load_run_config(fs::path(RIM_CONFIG_DIR) / name));
  }
  const auto sweep = load_run_config(fs::path(RIM_CONFIG_DIR) / "snr_sweep.yaml");
  REQUIRE(sweep.sweep.has_value());
  CHECK(sweep.sweep->snr_db == std::vector<double>{-25.0, -15.0, -5.0, 5.0});
  CHECK(sweep.sweep->trials == 64);
  CHECK(sweep.sweep->calibrate.has_value());
  const auto nf = load_run_config(fs::path(RIM_CONFIG_DIR) / "noise_free.yaml");
  CHECK(nf.params.proposed.hough.bin_dilation == 64);
  CHECK(nf.params.proposed.hough.sequential);
  CHECK(nf.scenario.interferers.at(0).ramp_s == 0.5e-6);
}

TEST_CASE("a missing config file is a configuration error") {
  CHECK_THROWS_AS(load_run_config("/nonexistent/rim.yaml"), ConfigError);
}

}
