#include "artmap/raster.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "artmap/error.h"

namespace artmap {

BinaryMask BinaryMask::from_dense(int width, int height,
                                  const std::vector<uint8_t>& dense) {
  if (dense.size() != static_cast<size_t>(width) * height) {
    throw InputError("mask buffer size does not match its dimensions");
  }
  BinaryMask m(width, height);
  int u0 = width, v0 = height, u1 = 0, v1 = 0;
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      if (dense[static_cast<size_t>(v) * width + u]) {
        u0 = std::min(u0, u);
        v0 = std::min(v0, v);
        u1 = std::max(u1, u + 1);
        v1 = std::max(v1, v + 1);
      }
    }
  }
  if (u1 <= u0) return m;
  m.roi_ = {u0, v0, u1, v1};
  const int rw = u1 - u0;
  m.bits_.assign(static_cast<size_t>(rw) * (v1 - v0), 0);
  for (int v = v0; v < v1; ++v) {
    for (int u = u0; u < u1; ++u) {
      m.bits_[static_cast<size_t>(v - v0) * rw + (u - u0)] =
          dense[static_cast<size_t>(v) * width + u] ? 1 : 0;
    }
  }
  return m;
}

BinaryMask BinaryMask::from_roi(int width, int height, const PixelRect& roi,
                                const std::vector<uint8_t>& bits) {
  const int rw = roi.u1 - roi.u0;
  if (roi.empty() || bits.size() != static_cast<size_t>(rw) * (roi.v1 - roi.v0)) {
    return BinaryMask(width, height);
  }
  int u0 = roi.u1, v0 = roi.v1, u1 = roi.u0, v1 = roi.v0;
  for (int v = roi.v0; v < roi.v1; ++v) {
    for (int u = roi.u0; u < roi.u1; ++u) {
      if (bits[static_cast<size_t>(v - roi.v0) * rw + (u - roi.u0)]) {
        u0 = std::min(u0, u);
        v0 = std::min(v0, v);
        u1 = std::max(u1, u + 1);
        v1 = std::max(v1, v + 1);
      }
    }
  }
  BinaryMask m(width, height);
  if (u1 <= u0) return m;
  m.roi_ = {u0, v0, u1, v1};
  const int tw = u1 - u0;
  m.bits_.assign(static_cast<size_t>(tw) * (v1 - v0), 0);
  for (int v = v0; v < v1; ++v) {
    for (int u = u0; u < u1; ++u) {
      m.bits_[static_cast<size_t>(v - v0) * tw + (u - u0)] =
          bits[static_cast<size_t>(v - roi.v0) * rw + (u - roi.u0)] ? 1 : 0;
    }
  }
  return m;
}

size_t BinaryMask::count() const {
  return static_cast<size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<uint8_t> BinaryMask::to_dense() const {
  std::vector<uint8_t> dense(static_cast<size_t>(width_) * height_, 0);
  for (int v = roi_.v0; v < roi_.v1; ++v) {
    for (int u = roi_.u0; u < roi_.u1; ++u) {
      if (at(u, v)) dense[static_cast<size_t>(v) * width_ + u] = 1;
    }
  }
  return dense;
}

BinaryMask BinaryMask::eroded(int iterations) const {
  BinaryMask cur = *this;
  for (int it = 0; it < iterations && !cur.roi_.empty(); ++it) {
    const PixelRect roi = cur.roi_;
    const int rw = roi.u1 - roi.u0;
    std::vector<uint8_t> bits(static_cast<size_t>(rw) * (roi.v1 - roi.v0), 0);
    for (int v = roi.v0; v < roi.v1; ++v) {
      for (int u = roi.u0; u < roi.u1; ++u) {
        if (cur.at(u, v) && cur.at(u - 1, v) && cur.at(u + 1, v) &&
            cur.at(u, v - 1) && cur.at(u, v + 1)) {
          bits[static_cast<size_t>(v - roi.v0) * rw + (u - roi.u0)] = 1;
        }
      }
    }
    cur = from_roi(width_, height_, roi, bits);
  }
  return cur;
}

bool BinaryMask::operator==(const BinaryMask& o) const {
  return width_ == o.width_ && height_ == o.height_ && roi_ == o.roi_ &&
         bits_ == o.bits_;
}

namespace {

// Reads the P5 header and returns (width, height, maxval); the stream is left
// positioned at the first sample byte.
void read_header(std::istream& in, const std::filesystem::path& path,
                 int* width, int* height, int* maxval) {
  std::string magic;
  in >> magic;
  if (magic != "P5") {
    throw IngestionError("not a binary PGM: " + path.string());
  }
  auto next_int = [&](int* out) {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      in >> std::ws;
    }
    if (!(in >> *out)) {
      throw IngestionError("malformed PGM header: " + path.string());
    }
  };
  next_int(width);
  next_int(height);
  next_int(maxval);
  in.get();  // single whitespace before raster
  if (*width <= 0 || *height <= 0 || *maxval <= 0 || *maxval > 65535) {
    throw IngestionError("invalid PGM header values: " + path.string());
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_pgm16(const std::filesystem::path& path, const DepthImage& img) {
  auto out = open_out(path);
  out << "P5\n" << img.width() << ' ' << img.height() << "\n65535\n";
  std::vector<char> buf(img.data().size() * 2);
  for (size_t i = 0; i < img.data().size(); ++i) {
    buf[2 * i] = static_cast<char>(img.data()[i] >> 8);
    buf[2 * i + 1] = static_cast<char>(img.data()[i] & 0xff);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

DepthImage read_pgm16(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path.string());
  int w = 0, h = 0, maxval = 0;
  read_header(in, path, &w, &h, &maxval);
  if (maxval < 256) {
    throw IngestionError("depth PGM must be 16-bit: " + path.string());
  }
  DepthImage img(w, h);
  std::vector<unsigned char> buf(static_cast<size_t>(w) * h * 2);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw IngestionError("truncated PGM raster: " + path.string());
  }
  for (size_t i = 0; i < img.data().size(); ++i) {
    img.data()[i] = static_cast<uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
  }
  return img;
}

void write_pgm8(const std::filesystem::path& path, int width, int height,
                const std::vector<uint8_t>& pixels) {
  auto out = open_out(path);
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
}

std::vector<uint8_t> read_pgm8(const std::filesystem::path& path, int* width,
                               int* height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path.string());
  int maxval = 0;
  read_header(in, path, width, height, &maxval);
  if (maxval > 255) {
    throw IngestionError("mask PGM must be 8-bit: " + path.string());
  }
  std::vector<uint8_t> px(static_cast<size_t>(*width) * *height);
  in.read(reinterpret_cast<char*>(px.data()),
          static_cast<std::streamsize>(px.size()));
  if (in.gcount() != static_cast<std::streamsize>(px.size())) {
    throw IngestionError("truncated PGM raster: " + path.string());
  }
  return px;
}

}  // namespace artmap
