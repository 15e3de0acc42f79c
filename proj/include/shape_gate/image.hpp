#pragma once

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "shape_gate/error.hpp"

namespace shape_gate {

struct Point {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(const Point&, const Point&) = default;
  friend constexpr auto operator<=>(const Point& a, const Point& b) {
    // raster order: row first
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

/// Dense row-major raster. Width and height are at least 1 for any
/// non-default-constructed image.
template <typename Pixel>
class Raster {
 public:
  using value_type = Pixel;

  Raster() = default;
  Raster(int width, int height, Pixel fill = Pixel{})
      : width_(width), height_(height) {
    if (width < 1 || height < 1)
      throw Error("raster dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Raster(int width, int height, std::vector<Pixel> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1)
      throw Error("raster dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(width) * height)
      throw Error("raster data length does not match width * height");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  Pixel& at(int x, int y) noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  const Pixel& at(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<Pixel> row(int y) noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }
  std::span<const Pixel> row(int y) const noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }

  std::span<Pixel> pixels() noexcept { return data_; }
  std::span<const Pixel> pixels() const noexcept { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Pixel> data_;
};

using GrayImage = Raster<std::uint8_t>;
using RealImage = Raster<double>;

/// Bit raster; any nonzero byte is foreground.
class BinaryImage : public Raster<std::uint8_t> {
 public:
  using Raster::Raster;

  bool test(int x, int y) const noexcept { return at(x, y) != 0; }
  void set(int x, int y, bool on = true) noexcept { at(x, y) = on ? 1 : 0; }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto v : pixels()) n += v != 0;
    return n;
  }

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;
};

inline RealImage to_real(const GrayImage& img) {
  RealImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] / 255.0;
  return out;
}

// ---------------------------------------------------------------------------
// PGM (P2 ascii / P5 binary, maxval 255)

namespace detail {

inline void skip_pnm_space(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

inline int read_pnm_int(std::istream& in, const char* what) {
  skip_pnm_space(in);
  int v = -1;
  if (!(in >> v) || v < 0)
    throw FormatError(std::string("pgm: bad ") + what);
  return v;
}

}  // namespace detail

inline GrayImage read_pgm(std::istream& in) {
  char magic[2] = {0, 0};
  if (!in.read(magic, 2) || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5'))
    throw FormatError("pgm: expected P2 or P5 magic");
  const int width = detail::read_pnm_int(in, "width");
  const int height = detail::read_pnm_int(in, "height");
  const int maxval = detail::read_pnm_int(in, "maxval");
  if (width < 1 || height < 1) throw FormatError("pgm: empty image");
  if (maxval != 255) throw FormatError("pgm: only maxval 255 is supported");

  std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height);
  if (magic[1] == '5') {
    // exactly one whitespace byte separates header and raster
    if (!std::isspace(in.get())) throw FormatError("pgm: malformed header");
    if (!in.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(data.size())))
      throw FormatError("pgm: truncated raster");
  } else {
    for (auto& v : data) {
      const int value = detail::read_pnm_int(in, "sample");
      if (value > maxval) throw FormatError("pgm: sample exceeds maxval");
      v = static_cast<std::uint8_t>(value);
    }
  }
  return GrayImage(width, height, std::move(data));
}

inline GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open image " + path);
  return read_pgm(in);
}

inline void write_pgm(std::ostream& out, const GrayImage& img, bool binary = true) {
  out << (binary ? "P5" : "P2") << '\n'
      << img.width() << ' ' << img.height() << "\n255\n";
  if (binary) {
    auto px = img.pixels();
    out.write(reinterpret_cast<const char*>(px.data()),
              static_cast<std::streamsize>(px.size()));
    return;
  }
  for (int y = 0; y < img.height(); ++y) {
    auto r = img.row(y);
    for (std::size_t x = 0; x < r.size(); ++x)
      out << (x ? " " : "") << static_cast<int>(r[x]);
    out << '\n';
  }
}

inline void write_pgm(const std::string& path, const GrayImage& img, bool binary = true) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write image " + path);
  write_pgm(out, img, binary);
}

}  // namespace shape_gate
