#include "rim/stft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "rim/error.hpp"
#include "rim/fft.hpp"

namespace rim {

void StftConfig::validate() const {
  if (hop == 0 || window_len == 0 || n_fft == 0)
    throw ConfigError("stft sizes must be positive");
  if (!(hop <= window_len && window_len <= n_fft))
    throw ConfigError("stft requires hop <= window_len <= n_fft");
  const auto w = make_window(window, window_len);
  // Every residue class modulo the hop must see some nonzero window tap.
  for (std::size_t r = 0; r < hop; ++r) {
    double acc = 0.0;
    for (std::size_t n = r; n < window_len; n += hop) acc += w[n] * w[n];
    if (acc <= 0.0)
      throw ConfigError("window/hop pair has a zero overlap-add denominator");
  }
}

std::size_t StftConfig::frame_count(std::size_t source_len) const {
  if (source_len < window_len) return 0;
  return (source_len - window_len) / hop + 1;
}

Spectrogram stft(std::span<const double> x, const StftConfig& cfg,
                 double sample_rate_hz) {
  cfg.validate();
  if (x.size() < cfg.window_len)
    throw DataError("stft: sequence shorter than one window");
  const std::size_t frames = cfg.frame_count(x.size());
  const std::size_t n = cfg.n_fft;
  const auto w = make_window(cfg.window, cfg.window_len);

  Spectrogram s;
  s.cfg = cfg;
  s.source_len = x.size();
  s.sample_rate_hz = sample_rate_hz;
  s.data.resize(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(n));

  std::vector<cdouble> buf(n), spec(n);
  for (std::size_t z = 0; z < frames; ++z) {
    const std::size_t start = z * cfg.hop;
    std::fill(buf.begin(), buf.end(), cdouble{});
    // Segment sample l sits at absolute time start + l; fold it into the
    // DFT slot (start + l) mod N so the phase reference is absolute.
    for (std::size_t l = 0; l < cfg.window_len; ++l)
      buf[(start + l) % n] += x[start + l] * w[l];
    fft::forward(buf, spec);
    for (std::size_t m = 0; m < n; ++m)
      s.data(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(m)) = spec[m];
  }
  return s;
}

RealMatrix power_spectrogram(const Spectrogram& s) {
  return s.data.cwiseAbs2();
}

std::vector<double> ola_weights(const StftConfig& cfg, std::size_t source_len) {
  const auto w = make_window(cfg.window, cfg.window_len);
  std::vector<double> weight(source_len, 0.0);
  const std::size_t frames = cfg.frame_count(source_len);
  for (std::size_t z = 0; z < frames; ++z)
    for (std::size_t l = 0; l < cfg.window_len; ++l)
      weight[z * cfg.hop + l] += w[l] * w[l];
  return weight;
}

namespace {

double interior_weight(const StftConfig& cfg) {
  const auto w = make_window(cfg.window, cfg.window_len);
  double best = 0.0;
  for (std::size_t r = 0; r < cfg.hop; ++r) {
    double acc = 0.0;
    for (std::size_t n = r; n < cfg.window_len; n += cfg.hop) acc += w[n] * w[n];
    best = std::max(best, acc);
  }
  return best;
}

}  // namespace

std::vector<bool> weak_ola_samples(const StftConfig& cfg,
                                   std::size_t source_len) {
  const auto weight = ola_weights(cfg, source_len);
  const double floor = 1e-6 * interior_weight(cfg);
  std::vector<bool> weak(source_len);
  for (std::size_t i = 0; i < source_len; ++i) weak[i] = weight[i] < floor;
  return weak;
}

std::vector<double> istft(const Spectrogram& s, const StftConfig& cfg) {
  cfg.validate();
  if (cfg.window_len != s.cfg.window_len || cfg.hop != s.cfg.hop ||
      cfg.n_fft != s.cfg.n_fft || cfg.window != s.cfg.window)
    throw DataError("istft: configuration does not match spectrogram");
  const std::size_t frames = cfg.frame_count(s.source_len);
  if (s.frames() != frames || s.bins() != cfg.n_fft)
    throw DataError("istft: spectrogram shape does not match configuration");

  const std::size_t n = cfg.n_fft;
  const auto w = make_window(cfg.window, cfg.window_len);
  std::vector<double> out(s.source_len, 0.0);
  std::vector<cdouble> spec(n), time(n);
  for (std::size_t z = 0; z < frames; ++z) {
    for (std::size_t m = 0; m < n; ++m)
      spec[m] = s.data(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(m));
    fft::backward(spec, time);
    const std::size_t start = z * cfg.hop;
    for (std::size_t l = 0; l < cfg.window_len; ++l)
      out[start + l] += w[l] * time[(start + l) % n].real() / static_cast<double>(n);
  }

  const auto weight = ola_weights(cfg, s.source_len);
  const double floor = 1e-6 * interior_weight(cfg);
  // Weak samples borrow the weight of the nearest well-covered sample.
  std::ptrdiff_t last_valid = -1;
  std::vector<double> norm(weight);
  for (std::size_t i = 0; i < norm.size(); ++i) {
    if (weight[i] >= floor) {
      last_valid = static_cast<std::ptrdiff_t>(i);
    } else if (last_valid >= 0) {
      norm[i] = weight[static_cast<std::size_t>(last_valid)];
    }
  }
  std::ptrdiff_t next_valid = -1;
  for (std::size_t i = norm.size(); i-- > 0;) {
    if (weight[i] >= floor) {
      next_valid = static_cast<std::ptrdiff_t>(i);
    } else if (next_valid >= 0 &&
               (norm[i] < floor ||
                next_valid - static_cast<std::ptrdiff_t>(i) <
                    static_cast<std::ptrdiff_t>(i) - last_valid)) {
      norm[i] = weight[static_cast<std::size_t>(next_valid)];
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = norm[i] > 0.0 ? out[i] / norm[i] : 0.0;
  return out;
}

void write_spectrogram_csv(const Spectrogram& s,
                           const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path.string());
  os << "zeta,m,re,im\n";
  os.precision(9);
  for (Eigen::Index z = 0; z < s.data.rows(); ++z)
    for (Eigen::Index m = 0; m < s.data.cols(); ++m)
      os << z << ',' << m << ',' << s.data(z, m).real() << ','
         << s.data(z, m).imag() << '\n';
}

namespace {

struct SpectrogramHeader {
  char magic[4];
  std::uint32_t frames;
  std::uint32_t bins;
  std::uint32_t window_len;
  std::uint32_t hop;
  std::uint32_t n_fft;
  std::uint32_t window_kind;
  std::uint32_t reserved0;
  std::uint64_t source_len;
  double sample_rate_hz;
  std::uint8_t reserved[16];
};
static_assert(sizeof(SpectrogramHeader) == 64);

}  // namespace

void write_spectrogram_bin(const Spectrogram& s,
                           const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path.string());
  SpectrogramHeader h{};
  std::memcpy(h.magic, "CWS1", 4);
  h.frames = static_cast<std::uint32_t>(s.frames());
  h.bins = static_cast<std::uint32_t>(s.bins());
  h.window_len = static_cast<std::uint32_t>(s.cfg.window_len);
  h.hop = static_cast<std::uint32_t>(s.cfg.hop);
  h.n_fft = static_cast<std::uint32_t>(s.cfg.n_fft);
  h.window_kind = static_cast<std::uint32_t>(s.cfg.window);
  h.source_len = s.source_len;
  h.sample_rate_hz = s.sample_rate_hz;
  os.write(reinterpret_cast<const char*>(&h), sizeof h);
  for (Eigen::Index z = 0; z < s.data.rows(); ++z)
    for (Eigen::Index m = 0; m < s.data.cols(); ++m) {
      const float v[2] = {static_cast<float>(s.data(z, m).real()),
                          static_cast<float>(s.data(z, m).imag())};
      os.write(reinterpret_cast<const char*>(v), sizeof v);
    }
}

Spectrogram read_spectrogram_bin(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  SpectrogramHeader h{};
  if (!is.read(reinterpret_cast<char*>(&h), sizeof h) ||
      std::memcmp(h.magic, "CWS1", 4) != 0)
    throw DataError(path.string() + ": not a CWS1 spectrogram");
  Spectrogram s;
  s.cfg.window_len = h.window_len;
  s.cfg.hop = h.hop;
  s.cfg.n_fft = h.n_fft;
  s.cfg.window = static_cast<WindowKind>(h.window_kind);
  s.source_len = h.source_len;
  s.sample_rate_hz = h.sample_rate_hz;
  s.data.resize(h.frames, h.bins);
  for (Eigen::Index z = 0; z < s.data.rows(); ++z)
    for (Eigen::Index m = 0; m < s.data.cols(); ++m) {
      float v[2];
      if (!is.read(reinterpret_cast<char*>(v), sizeof v))
        throw DataError(path.string() + ": truncated spectrogram");
      s.data(z, m) = cdouble(v[0], v[1]);
    }
  return s;
}

}  // namespace rim
