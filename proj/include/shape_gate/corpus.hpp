#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "shape_gate/features.hpp"
#include "shape_gate/image.hpp"

namespace shape_gate {

/// Synthetic stand-in for a shape sample database: one rasterized primitive
/// per scene at a random size, rotation and position.
struct CorpusOptions {
  int canvas = 128;
  int min_size = 24;  // characteristic extent (longest dimension) in pixels
  int max_size = 72;
  double noise = 0.0;  // salt-and-pepper rate
  std::uint8_t background = 24;
  std::uint8_t foreground = 224;
  std::vector<ShapeClass> classes{kAllShapes.begin(), kAllShapes.end()};
};

struct CorpusItem {
  std::string name;   // file stem, e.g. "circle_017"
  std::string label;  // object label used in training manifests
  ShapeClass truth = ShapeClass::blob;
  GrayImage image;
};

namespace detail {

using Inside = std::function<bool(double, double)>;

inline GrayImage rasterize(int canvas, const CorpusOptions& opts, const Inside& inside) {
  GrayImage img(canvas, canvas, opts.background);
  for (int y = 0; y < canvas; ++y)
    for (int x = 0; x < canvas; ++x)
      if (inside(x, y)) img.at(x, y) = opts.foreground;
  return img;
}

inline bool in_polygon(double x, double y, const std::vector<std::array<double, 2>>& poly) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto [xi, yi] = poly[i];
    const auto [xj, yj] = poly[j];
    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) in = !in;
  }
  return in;
}

}  // namespace detail

/// Renders one scene containing a single primitive of class `cls`.
inline GrayImage render_shape(ShapeClass cls, std::mt19937_64& rng, const CorpusOptions& opts) {
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  // some primitives only read as themselves above a minimum extent
  const int floor = cls == ShapeClass::line ? 40 : cls == ShapeClass::rectangle ? 32
                  : cls == ShapeClass::square ? 30 : 0;
  const double lo = std::max(opts.min_size, floor);
  const double size = uni(lo, std::max<double>(lo, opts.max_size));
  const double theta = uni(0.0, std::numbers::pi);
  const double c = std::cos(theta), s = std::sin(theta);
  const double margin = size / 2 + 4;
  const double cx = uni(margin, opts.canvas - margin), cy = uni(margin, opts.canvas - margin);
  // rotated frame coordinates of a pixel centre
  auto u_of = [=](double x, double y) { return (x - cx) * c + (y - cy) * s; };
  auto v_of = [=](double x, double y) { return -(x - cx) * s + (y - cy) * c; };

  detail::Inside inside;
  switch (cls) {
    case ShapeClass::line: {
      const double half_len = size / 2, half_t = uni(3.0, 4.0) / 2;
      inside = [=](double x, double y) {
        return std::abs(u_of(x, y)) <= half_len && std::abs(v_of(x, y)) <= half_t;
      };
      break;
    }
    case ShapeClass::rectangle: {
      const double a = size / 2, b = a * uni(0.35, 0.65);
      inside = [=](double x, double y) {
        return std::abs(u_of(x, y)) <= a && std::abs(v_of(x, y)) <= b;
      };
      break;
    }
    case ShapeClass::square: {
      const double a = size / (2 * std::numbers::sqrt2) * uni(1.0, 1.3);
      inside = [=](double x, double y) {
        return std::abs(u_of(x, y)) <= a && std::abs(v_of(x, y)) <= a;
      };
      break;
    }
    case ShapeClass::circle: {
      const double r = size / 2;
      inside = [=](double x, double y) { return std::hypot(x - cx, y - cy) <= r; };
      break;
    }
    case ShapeClass::triangle: {
      const double r = size / 2;
      std::vector<std::array<double, 2>> poly;
      for (int k = 0; k < 3; ++k) {
        const double ang = theta + k * 2 * std::numbers::pi / 3 + uni(-0.2, 0.2);
        poly.push_back({cx + r * std::cos(ang), cy + r * std::sin(ang)});
      }
      inside = [poly](double x, double y) { return detail::in_polygon(x, y, poly); };
      break;
    }
    case ShapeClass::arc: {
      const double r = size / 2, half_t = uni(4.0, 5.0) / 2;
      const double span = uni(150.0, 210.0) * std::numbers::pi / 180;
      inside = [=](double x, double y) {
        const double d = std::hypot(x - cx, y - cy);
        if (std::abs(d - r) > half_t) return false;
        double a = std::atan2(y - cy, x - cx) - theta;
        a = std::fmod(a + 4 * std::numbers::pi, 2 * std::numbers::pi);
        return a <= span;
      };
      break;
    }
    case ShapeClass::blob: {
      const int points = std::uniform_int_distribution<int>(5, 7)(rng);
      const double outer = size / 2, inner = outer * uni(0.45, 0.6);
      std::vector<std::array<double, 2>> poly;
      for (int k = 0; k < 2 * points; ++k) {
        const double ang = theta + k * std::numbers::pi / points;
        const double rad = (k % 2) ? inner : outer;
        poly.push_back({cx + rad * std::cos(ang), cy + rad * std::sin(ang)});
      }
      inside = [poly](double x, double y) { return detail::in_polygon(x, y, poly); };
      break;
    }
  }
  GrayImage img = detail::rasterize(opts.canvas, opts, inside);

  if (opts.noise > 0) {
    std::bernoulli_distribution flip(opts.noise), coin(0.5);
    for (auto& v : img.pixels())
      if (flip(rng)) v = coin(rng) ? 255 : 0;
  }
  return img;
}

inline std::string lowercase_name(ShapeClass s) {
  std::string n(shape_name(s));
  for (auto& ch : n) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return n;
}

/// per_class scenes for each class in opts.classes; deterministic per seed.
inline std::vector<CorpusItem> generate_corpus(std::uint64_t seed, int per_class,
                                               const CorpusOptions& opts = {}) {
  std::mt19937_64 rng(seed);
  std::vector<CorpusItem> items;
  items.reserve(static_cast<std::size_t>(per_class) * opts.classes.size());
  for (auto cls : opts.classes)
    for (int i = 0; i < per_class; ++i) {
      char idx[16];
      std::snprintf(idx, sizeof idx, "%03d", i);
      const std::string name = lowercase_name(cls) + "_" + idx;
      items.push_back({name, name, cls, render_shape(cls, rng, opts)});
    }
  return items;
}

}  // namespace shape_gate
