#include "rim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "rim/error.hpp"
#include "rim/fft.hpp"

namespace rim {

namespace {

template <class T>
double norm2(std::span<const T> x) {
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(cdouble(v));
  return std::sqrt(acc);
}

template <class T>
void check_pair(std::span<const T> rec, std::span<const T> ref) {
  if (rec.size() != ref.size()) throw DataError("metric: length mismatch");
}

double to_db(double ratio) {
  if (!(ratio > 0.0)) return kDbFloor;
  return std::max(10.0 * std::log10(ratio), kDbFloor);
}

}  // namespace

double cosine_similarity(std::span<const cdouble> rec, std::span<const cdouble> ref) {
  check_pair(rec, ref);
  const double a = norm2(rec), b = norm2(ref);
  if (a == 0.0 || b == 0.0) throw DataError("cosine similarity: zero-norm input");
  cdouble dot{};
  for (std::size_t i = 0; i < rec.size(); ++i) dot += std::conj(rec[i]) * ref[i];
  return dot.real() / (a * b);
}

double cosine_similarity(std::span<const double> rec, std::span<const double> ref) {
  check_pair(rec, ref);
  const double a = norm2(rec), b = norm2(ref);
  if (a == 0.0 || b == 0.0) throw DataError("cosine similarity: zero-norm input");
  double dot = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) dot += rec[i] * ref[i];
  return dot / (a * b);
}

double evm(std::span<const cdouble> rec, std::span<const cdouble> ref) {
  check_pair(rec, ref);
  const double b = norm2(ref);
  if (b == 0.0) throw DataError("evm: zero-norm reference");
  double acc = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) acc += std::norm(rec[i] - ref[i]);
  return std::sqrt(acc) / b;
}

double evm(std::span<const double> rec, std::span<const double> ref) {
  check_pair(rec, ref);
  const double b = norm2(ref);
  if (b == 0.0) throw DataError("evm: zero-norm reference");
  double acc = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) acc += (rec[i] - ref[i]) * (rec[i] - ref[i]);
  return std::sqrt(acc) / b;
}

namespace {

void fill_db(Profile& p) {
  const double peak = p.power.empty() ? 0.0 : *std::max_element(p.power.begin(), p.power.end());
  p.power_db.resize(p.power.size());
  for (std::size_t i = 0; i < p.power.size(); ++i)
    p.power_db[i] = peak > 0.0 ? to_db(p.power[i] / peak) : kDbFloor;
}

std::vector<cdouble> windowed_fft(std::span<const double> x, WindowKind kind, std::size_t nfft) {
  const auto w = make_window(kind, x.size());
  std::vector<cdouble> buf(nfft, cdouble{});
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = x[i] * w[i];
  return fft::forward(std::span<const cdouble>(buf));
}

}  // namespace

Profile range_profile(std::span<const double> samples, double sample_rate_hz,
                      double chirp_rate, WindowKind window, std::size_t nfft) {
  if (samples.empty()) throw DataError("range profile: empty frame");
  if (nfft == 0) nfft = samples.size();
  if (nfft < samples.size()) throw ConfigError("range profile: nfft shorter than frame");
  const auto spec = windowed_fft(samples, window, nfft);
  Profile p;
  for (std::size_t i = 0; i <= nfft / 2; ++i) {
    p.power.push_back(std::norm(spec[i]));
    const double f = static_cast<double>(i) * sample_rate_hz / static_cast<double>(nfft);
    p.axis.push_back(f * kSpeedOfLight / (2.0 * std::abs(chirp_rate)));
  }
  fill_db(p);
  return p;
}

Lobe auto_mainlobe(std::span<const double> power) {
  if (power.empty()) throw DataError("mainlobe: empty spectrum");
  const std::size_t peak = static_cast<std::size_t>(
      std::max_element(power.begin(), power.end()) - power.begin());
  std::size_t a = peak, b = peak;
  while (a > 0 && power[a - 1] < power[a]) --a;
  while (b + 1 < power.size() && power[b + 1] < power[b]) ++b;
  return {a, b};
}

double pslr_db(std::span<const double> power, Lobe lobe) {
  const auto [a, b] = lobe;
  if (a > b || b >= power.size()) throw DataError("pslr: mainlobe outside spectrum");
  double main = 0.0, side = 0.0;
  for (std::size_t i = 0; i < power.size(); ++i) {
    double& slot = (i >= a && i <= b) ? main : side;
    slot = std::max(slot, power[i]);
  }
  if (main <= 0.0) throw DataError("pslr: zero mainlobe");
  return to_db(side / main);
}

double islr_db(std::span<const double> power, Lobe lobe) {
  const auto [a, b] = lobe;
  if (a > b || b >= power.size()) throw DataError("islr: mainlobe outside spectrum");
  double main = 0.0, side = 0.0;
  for (std::size_t i = 0; i < power.size(); ++i) (i >= a && i <= b ? main : side) += power[i];
  if (main <= 0.0) throw DataError("islr: zero mainlobe energy");
  return to_db(side / main);
}

MetricsReport evaluate_frame(std::span<const double> rec, std::span<const double> truth,
                             double sample_rate_hz, double chirp_rate, std::size_t nfft) {
  MetricsReport r;
  r.cs = cosine_similarity(rec, truth);
  r.evm = evm(rec, truth);
  const Profile p = range_profile(rec, sample_rate_hz, chirp_rate, WindowKind::hamming, nfft);
  r.mainlobe = auto_mainlobe(p.power);
  r.pslr_db = pslr_db(p.power, r.mainlobe);
  r.islr_db = islr_db(p.power, r.mainlobe);
  return r;
}

RdMap rd_map(std::span<const BasebandFrame> frames, const RadarParams& victim,
             std::size_t range_nfft) {
  if (frames.size() < 2) throw DataError("rd map: need at least two chirps");
  const std::size_t len = frames.front().samples.size();
  const double fs = frames.front().sample_rate_hz;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].samples.size() != len || frames[i].sample_rate_hz != fs)
      throw DataError("rd map: chirp " + std::to_string(i) + " differs in length or rate");
    if (frames[i].chirp_index != frames.front().chirp_index + static_cast<std::int64_t>(i))
      throw DataError("rd map: chirp indices are not consecutive");
  }
  if (range_nfft == 0) range_nfft = len;
  const std::size_t n_range = range_nfft / 2 + 1;
  const std::size_t n_chirps = frames.size();

  Eigen::MatrixXcd range_fft(static_cast<Eigen::Index>(n_range), static_cast<Eigen::Index>(n_chirps));
  for (std::size_t c = 0; c < n_chirps; ++c) {
    const auto spec = windowed_fft(frames[c].samples, WindowKind::hamming, range_nfft);
    for (std::size_t r = 0; r < n_range; ++r)
      range_fft(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = spec[r];
  }

  const auto w = make_window(WindowKind::hamming, n_chirps);
  RdMap rd;
  rd.power.resize(static_cast<Eigen::Index>(n_range), static_cast<Eigen::Index>(n_chirps));
  std::vector<cdouble> slow(n_chirps);
  for (std::size_t r = 0; r < n_range; ++r) {
    for (std::size_t c = 0; c < n_chirps; ++c)
      slow[c] = range_fft(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * w[c];
    const auto dop = fft::forward(std::span<const cdouble>(slow));
    for (std::size_t v = 0; v < n_chirps; ++v) {
      const std::size_t src = (v + (n_chirps + 1) / 2) % n_chirps;  // fftshift
      rd.power(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(v)) = std::norm(dop[src]);
    }
  }

  const double k = victim.chirp_rate();
  for (std::size_t r = 0; r < n_range; ++r)
    rd.range_axis.push_back(static_cast<double>(r) * fs / static_cast<double>(range_nfft) *
                            kSpeedOfLight / (2.0 * std::abs(k)));
  // Positive Doppler is a receding target for up-chirps; down-chirps see the
  // conjugate tone in the positive range half.
  const double sign = k > 0 ? 1.0 : -1.0;
  const double half = static_cast<double>(n_chirps / 2);
  for (std::size_t v = 0; v < n_chirps; ++v) {
    const double fd = (static_cast<double>(v) - half) / (static_cast<double>(n_chirps) * victim.prt_s);
    rd.velocity_axis.push_back(sign * fd * victim.wavelength() / 2.0);
  }
  return rd;
}

Profile velocity_profile(const RdMap& rd, std::size_t range_bin) {
  if (range_bin >= static_cast<std::size_t>(rd.power.rows()))
    throw DataError("velocity profile: range bin out of bounds");
  Profile p;
  const auto row = rd.power.row(static_cast<Eigen::Index>(range_bin));
  p.power.assign(row.data(), row.data() + row.size());
  p.axis = rd.velocity_axis;
  fill_db(p);
  return p;
}

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path.string());
  os << "scenario,method,seed,frame,cs,evm,pslr_db,islr_db\n";
  for (const auto& r : rows)
    os << r.scenario << ',' << r.method << ',' << r.seed << ',' << r.frame << ','
       << format_metric(r.report.cs) << ',' << format_metric(r.report.evm) << ','
       << format_metric(r.report.pslr_db) << ',' << format_metric(r.report.islr_db) << '\n';
}

}  // namespace rim
