#include "rim/frame_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "rim/error.hpp"

namespace rim {

static_assert(std::endian::native == std::endian::little,
              "frame files are little-endian; big-endian hosts need byte swapping");

namespace {

constexpr std::uint32_t kHeaderSize = 64;
constexpr std::uint32_t kHasTruth = 1u;

template <class T>
void put(unsigned char* buf, std::size_t off, T v) {
  std::memcpy(buf + off, &v, sizeof v);
}

template <class T>
T get(const unsigned char* buf, std::size_t off) {
  T v;
  std::memcpy(&v, buf + off, sizeof v);
  return v;
}

void write_floats(std::ostream& os, const std::vector<double>& v) {
  std::vector<float> f(v.begin(), v.end());
  os.write(reinterpret_cast<const char*>(f.data()),
           static_cast<std::streamsize>(f.size() * sizeof(float)));
}

std::vector<double> read_floats(std::istream& is, std::size_t n, const std::string& where) {
  std::vector<float> f(n);
  if (!is.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(n * sizeof(float))))
    throw DataError(where + ": truncated sample data");
  return {f.begin(), f.end()};
}

}  // namespace

void write_frames(std::span<const BasebandFrame> frames, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path.string());
  for (const auto& fr : frames) {
    if (fr.ground_truth && fr.ground_truth->size() != fr.samples.size())
      throw DataError("frame " + std::to_string(fr.chirp_index) + ": ground truth length differs");
    unsigned char header[kHeaderSize] = {};
    std::memcpy(header, "CWF1", 4);
    put<std::uint32_t>(header, 4, kHeaderSize);
    put<double>(header, 8, fr.sample_rate_hz);
    put<std::uint64_t>(header, 16, fr.samples.size());
    put<std::int64_t>(header, 24, fr.chirp_index);
    put<std::uint32_t>(header, 32, fr.ground_truth ? kHasTruth : 0u);
    os.write(reinterpret_cast<const char*>(header), kHeaderSize);
    write_floats(os, fr.samples);
    if (fr.ground_truth) write_floats(os, *fr.ground_truth);
  }
  if (!os) throw DataError("write failed: " + path.string());
}

std::vector<BasebandFrame> read_frames(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  std::vector<BasebandFrame> out;
  unsigned char header[kHeaderSize];
  while (is.peek() != std::char_traits<char>::eof()) {
    const std::string where = path.string() + " frame " + std::to_string(out.size());
    if (!is.read(reinterpret_cast<char*>(header), kHeaderSize))
      throw DataError(where + ": truncated header");
    if (std::memcmp(header, "CWF1", 4) != 0) throw DataError(where + ": bad magic");
    const auto hsize = get<std::uint32_t>(header, 4);
    if (hsize < kHeaderSize) throw DataError(where + ": header size too small");
    is.ignore(hsize - kHeaderSize);
    BasebandFrame fr;
    fr.sample_rate_hz = get<double>(header, 8);
    const auto n = get<std::uint64_t>(header, 16);
    fr.chirp_index = get<std::int64_t>(header, 24);
    const auto flags = get<std::uint32_t>(header, 32);
    fr.samples = read_floats(is, n, where);
    if (flags & kHasTruth) fr.ground_truth = read_floats(is, n, where);
    out.push_back(std::move(fr));
  }
  return out;
}

void write_frames_csv(std::span<const BasebandFrame> frames, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path.string());
  os.precision(9);
  for (const auto& fr : frames) {
    os << "# chirp " << fr.chirp_index << " fs " << fr.sample_rate_hz << '\n';
    for (std::size_t i = 0; i < fr.samples.size(); ++i) {
      os << fr.samples[i];
      if (fr.ground_truth) os << ',' << (*fr.ground_truth)[i];
      os << '\n';
    }
  }
}

BasebandFrame quantize_to_file_precision(BasebandFrame frame) {
  for (auto& v : frame.samples) v = static_cast<float>(v);
  if (frame.ground_truth)
    for (auto& v : *frame.ground_truth) v = static_cast<float>(v);
  return frame;
}

}  // namespace rim
