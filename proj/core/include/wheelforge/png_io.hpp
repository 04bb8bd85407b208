#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wheelforge::pngio {

struct GrayImage8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  ///< row-major, one byte per pixel
};

struct GrayImage16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;  ///< row-major
};

/// 8-bit grayscale PNG. Masks use 0 = void, 255 = solid.
void write_gray8(const std::string& path, const GrayImage8& img);
GrayImage8 read_gray8(const std::string& path);

/// 16-bit grayscale PNG (big-endian samples on disk, host order in memory).
void write_gray16(const std::string& path, const GrayImage16& img);
GrayImage16 read_gray16(const std::string& path);

/// Depth map persisted as a 16-bit PNG plus a key=value sidecar recording
/// the millimeter scale. Invalid pixels store sample 0; valid pixels map
/// min_mm..max_mm onto 1..65535. The sidecar lands at path + ".txt".
struct DepthScale {
  double min_mm = 0.0;
  double max_mm = 0.0;
};

void write_depth16(const std::string& path, int width, int height,
                   const std::vector<float>& depth_mm,
                   const std::vector<std::uint8_t>& valid);
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> depth_mm;        ///< meaningful only where valid
  std::vector<std::uint8_t> valid;    ///< 0 or 1
  DepthScale scale;
};
DepthImage read_depth16(const std::string& path);

}  // namespace wheelforge::pngio
