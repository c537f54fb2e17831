#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "rim/radar_sim.hpp"

// Frame files: any number of records, each a 64-byte little-endian header
//   0  char[4] "CWF1"
//   4  u32     header size (64)
//   8  f64     sample rate (Hz)
//   16 u64     sample count
//   24 i64     chirp index
//   32 u32     flags (bit 0: ground truth follows)
//   36 ...     zero padding
// followed by float32 samples and, when flagged, float32 ground truth.
namespace rim {

void write_frames(std::span<const BasebandFrame> frames, const std::filesystem::path& path);
std::vector<BasebandFrame> read_frames(const std::filesystem::path& path);

// One sample per line; a second column carries the ground truth when present.
void write_frames_csv(std::span<const BasebandFrame> frames, const std::filesystem::path& path);

// Rounds every sample through float32, the precision of the binary format.
BasebandFrame quantize_to_file_precision(BasebandFrame frame);

}  // namespace rim
