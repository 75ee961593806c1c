#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dtsynth/error.hpp"

namespace dtsynth {

/// Row-major RGB raster, 8 bits per channel.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  RasterImage() = default;
  RasterImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  bool operator==(const RasterImage&) const = default;
};

/// Per-pixel object coverage, paired with a RasterImage of the same size.
struct SilhouetteMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // 0 or 1, row-major

  SilhouetteMask() = default;
  SilhouetteMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }

  bool operator==(const SilhouetteMask&) const = default;
};

struct BoundingBox {
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  bool empty = true;

  bool operator==(const BoundingBox&) const = default;
};

/// Tight axis-aligned box over the true bits. Empty mask gives an empty box.
inline BoundingBox bbox_from_mask(const SilhouetteMask& mask) {
  BoundingBox box;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.get(x, y)) continue;
      if (box.empty) {
        box = {x, y, x, y, false};
      } else {
        box.min_x = std::min(box.min_x, x);
        box.min_y = std::min(box.min_y, y);
        box.max_x = std::max(box.max_x, x);
        box.max_y = std::max(box.max_y, y);
      }
    }
  }
  return box;
}

// --- PPM (P6), used for bit-exact goldens ---

inline void save_ppm(const RasterImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

inline RasterImage load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || maxval != 255 || w <= 0 || h <= 0)
    throw DataError("unsupported PPM: " + path.string());
  in.get();  // single whitespace after header
  RasterImage img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!in) throw DataError("truncated PPM: " + path.string());
  return img;
}

// PNG I/O lives in image_png.hpp (pulls in libpng); load_image/save_image
// dispatch on extension.
void save_png(const RasterImage& img, const std::filesystem::path& path);
RasterImage load_png(const std::filesystem::path& path);

inline void save_image(const RasterImage& img, const std::filesystem::path& path) {
  if (path.extension() == ".ppm") save_ppm(img, path);
  else if (path.extension() == ".png") save_png(img, path);
  else throw DataError("unsupported image extension: " + path.string());
}

inline RasterImage load_image(const std::filesystem::path& path) {
  if (path.extension() == ".ppm") return load_ppm(path);
  if (path.extension() == ".png") return load_png(path);
  throw DataError("unsupported image extension: " + path.string());
}

}  // namespace dtsynth
