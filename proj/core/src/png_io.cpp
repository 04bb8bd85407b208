#include "wheelforge/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "wheelforge/errors.hpp"

namespace wheelforge::pngio {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void check_dims(int width, int height, std::size_t n, const char* who) {
  if (width < 1 || height < 1)
    throw IoError(std::string(who) + ": empty image");
  if (n != std::size_t(width) * std::size_t(height))
    throw DimensionMismatch(std::string(who) + ": pixel count mismatch");
}

template <typename Row>
void write_png(const std::string& path, int width, int height, int bit_depth,
               Row&& row_bytes) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open for writing: " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng write error: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(std::size_t(width) * (bit_depth / 8));
  for (int y = 0; y < height; ++y) {
    row_bytes(y, row.data());
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FilePtr fp;

  explicit PngReader(const std::string& path) : fp(std::fopen(path.c_str(), "rb")) {
    if (!fp) throw IoError("cannot open for reading: " + path);
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_read_struct failed");
    info = png_create_info_struct(png);
    if (!info) throw IoError("png_create_info_struct failed");
  }
  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;
};

}  // namespace

void write_gray8(const std::string& path, const GrayImage8& img) {
  check_dims(img.width, img.height, img.pixels.size(), "write_gray8");
  write_png(path, img.width, img.height, 8, [&](int y, png_byte* row) {
    const std::uint8_t* src = img.pixels.data() + std::size_t(y) * img.width;
    std::copy(src, src + img.width, row);
  });
}

GrayImage8 read_gray8(const std::string& path) {
  PngReader r(path);
  if (setjmp(png_jmpbuf(r.png))) throw IoError("libpng read error: " + path);
  png_init_io(r.png, r.fp.get());
  png_read_info(r.png, r.info);
  const int width = png_get_image_width(r.png, r.info);
  const int height = png_get_image_height(r.png, r.info);
  const int color = png_get_color_type(r.png, r.info);
  const int depth = png_get_bit_depth(r.png, r.info);
  // Normalize whatever arrives to 8-bit gray.
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
  if (depth == 16) png_set_strip_16(r.png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);
  png_read_update_info(r.png, r.info);

  GrayImage8 img;
  img.width = width;
  img.height = height;
  img.pixels.resize(std::size_t(width) * height);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = img.pixels.data() + std::size_t(y) * width;
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return img;
}

void write_gray16(const std::string& path, const GrayImage16& img) {
  check_dims(img.width, img.height, img.pixels.size(), "write_gray16");
  write_png(path, img.width, img.height, 16, [&](int y, png_byte* row) {
    const std::uint16_t* src = img.pixels.data() + std::size_t(y) * img.width;
    for (int x = 0; x < img.width; ++x) {
      row[2 * x] = png_byte(src[x] >> 8);
      row[2 * x + 1] = png_byte(src[x] & 0xff);
    }
  });
}

GrayImage16 read_gray16(const std::string& path) {
  PngReader r(path);
  if (setjmp(png_jmpbuf(r.png))) throw IoError("libpng read error: " + path);
  png_init_io(r.png, r.fp.get());
  png_read_info(r.png, r.info);
  if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(r.png, r.info) != 16)
    throw IoError("expected 16-bit grayscale PNG: " + path);
  png_read_update_info(r.png, r.info);

  GrayImage16 img;
  img.width = png_get_image_width(r.png, r.info);
  img.height = png_get_image_height(r.png, r.info);
  img.pixels.resize(std::size_t(img.width) * img.height);
  std::vector<std::uint8_t> raw(std::size_t(img.width) * 2);
  for (int y = 0; y < img.height; ++y) {
    png_read_row(r.png, raw.data(), nullptr);
    std::uint16_t* dst = img.pixels.data() + std::size_t(y) * img.width;
    for (int x = 0; x < img.width; ++x)
      dst[x] = std::uint16_t((raw[2 * x] << 8) | raw[2 * x + 1]);
  }
  png_read_end(r.png, nullptr);
  return img;
}

void write_depth16(const std::string& path, int width, int height,
                   const std::vector<float>& depth_mm,
                   const std::vector<std::uint8_t>& valid) {
  check_dims(width, height, depth_mm.size(), "write_depth16");
  if (valid.size() != depth_mm.size())
    throw DimensionMismatch("write_depth16: valid mask size mismatch");

  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < depth_mm.size(); ++i) {
    if (!valid[i]) continue;
    const double d = depth_mm[i];
    if (!any || d < lo) lo = d;
    if (!any || d > hi) hi = d;
    any = true;
  }
  if (!any) throw EmptyMask("write_depth16: no valid pixels");

  GrayImage16 img;
  img.width = width;
  img.height = height;
  img.pixels.assign(depth_mm.size(), 0);
  const double span = hi - lo;
  for (std::size_t i = 0; i < depth_mm.size(); ++i) {
    if (!valid[i]) continue;
    const double t = span > 0.0 ? (depth_mm[i] - lo) / span : 0.0;
    img.pixels[i] = std::uint16_t(1 + std::lround(t * 65534.0));
  }
  write_gray16(path, img);

  std::ofstream sidecar(path + ".txt");
  if (!sidecar) throw IoError("cannot write sidecar: " + path + ".txt");
  char buf[128];
  std::snprintf(buf, sizeof buf, "min_mm=%.9g\nmax_mm=%.9g\n", lo, hi);
  sidecar << buf;
  if (!sidecar.good()) throw IoError("sidecar write failed: " + path + ".txt");
}

DepthImage read_depth16(const std::string& path) {
  GrayImage16 img = read_gray16(path);

  DepthScale scale;
  std::ifstream sidecar(path + ".txt");
  if (!sidecar) throw IoError("missing depth sidecar: " + path + ".txt");
  std::string line;
  bool have_min = false, have_max = false;
  while (std::getline(sidecar, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const double value = std::stod(line.substr(eq + 1));
    if (key == "min_mm") scale.min_mm = value, have_min = true;
    if (key == "max_mm") scale.max_mm = value, have_max = true;
  }
  if (!have_min || !have_max)
    throw IoError("sidecar lacks min_mm/max_mm: " + path + ".txt");

  DepthImage out;
  out.width = img.width;
  out.height = img.height;
  out.scale = scale;
  out.depth_mm.assign(img.pixels.size(), 0.0f);
  out.valid.assign(img.pixels.size(), 0);
  const double span = scale.max_mm - scale.min_mm;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    if (img.pixels[i] == 0) continue;
    out.valid[i] = 1;
    const double t = (img.pixels[i] - 1) / 65534.0;
    out.depth_mm[i] = float(scale.min_mm + t * span);
  }
  return out;
}

}  // namespace wheelforge::pngio
