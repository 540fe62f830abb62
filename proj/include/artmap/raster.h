#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace artmap {

// 16-bit depth raster in millimeters; 0 marks a missing return.
class DepthImage {
 public:
  DepthImage() = default;
  DepthImage(int width, int height)
      : width_(width), height_(height),
        mm_(static_cast<size_t>(width) * height, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  uint16_t at(int u, int v) const { return mm_[index(u, v)]; }
  void set(int u, int v, uint16_t mm) { mm_[index(u, v)] = mm; }
  double meters(int u, int v) const { return at(u, v) * 1e-3; }
  const std::vector<uint16_t>& data() const { return mm_; }
  std::vector<uint16_t>& data() { return mm_; }

  bool operator==(const DepthImage&) const = default;

 private:
  size_t index(int u, int v) const {
    return static_cast<size_t>(v) * width_ + u;
  }
  int width_ = 0;
  int height_ = 0;
  std::vector<uint16_t> mm_;
};

struct PixelRect {
  int u0 = 0, v0 = 0, u1 = 0, v1 = 0;  // half-open [u0,u1) x [v0,v1)
  bool empty() const { return u1 <= u0 || v1 <= v0; }
  bool contains(int u, int v) const {
    return u >= u0 && u < u1 && v >= v0 && v < v1;
  }
  bool operator==(const PixelRect&) const = default;
};

// Binary raster of full image size. Only the bounding region of set pixels is
// stored; everything outside it reads as 0.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height) : width_(width), height_(height) {}

  // Builds from a dense width*height buffer (nonzero = set).
  static BinaryMask from_dense(int width, int height,
                               const std::vector<uint8_t>& dense);
  // Builds from a sub-raster covering `roi` (row-major, nonzero = set).
  static BinaryMask from_roi(int width, int height, const PixelRect& roi,
                             const std::vector<uint8_t>& bits);

  int width() const { return width_; }
  int height() const { return height_; }
  const PixelRect& roi() const { return roi_; }
  bool at(int u, int v) const {
    if (!roi_.contains(u, v)) return false;
    return bits_[static_cast<size_t>(v - roi_.v0) * (roi_.u1 - roi_.u0) +
                 (u - roi_.u0)] != 0;
  }
  size_t count() const;
  std::vector<uint8_t> to_dense() const;

  // Removes every set pixel with an unset (or out-of-image) 4-neighbour.
  BinaryMask eroded(int iterations) const;

  bool operator==(const BinaryMask& o) const;

 private:
  int width_ = 0;
  int height_ = 0;
  PixelRect roi_;
  std::vector<uint8_t> bits_;
};

// Binary PGM (P5) I/O. 16-bit samples are big-endian per the format.
void write_pgm16(const std::filesystem::path& path, const DepthImage& img);
DepthImage read_pgm16(const std::filesystem::path& path);
void write_pgm8(const std::filesystem::path& path, int width, int height,
                const std::vector<uint8_t>& pixels);
std::vector<uint8_t> read_pgm8(const std::filesystem::path& path, int* width,
                               int* height);

}  // namespace artmap
