#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shape_gate/preprocess.hpp"

namespace shape_gate {

// ---------------------------------------------------------------------------
// Shape classes

enum class ShapeClass : int {
  line = 1,
  rectangle = 2,
  square = 3,
  circle = 4,
  triangle = 5,
  arc = 6,
  blob = 7,
};

inline constexpr std::array<ShapeClass, 7> kAllShapes = {
    ShapeClass::line,     ShapeClass::rectangle, ShapeClass::square, ShapeClass::circle,
    ShapeClass::triangle, ShapeClass::arc,       ShapeClass::blob};

inline constexpr int shape_code(ShapeClass s) noexcept { return static_cast<int>(s); }

inline std::optional<ShapeClass> shape_from_code(int code) noexcept {
  if (code < 1 || code > 7) return std::nullopt;
  return static_cast<ShapeClass>(code);
}

inline std::string_view shape_name(ShapeClass s) noexcept {
  switch (s) {
    case ShapeClass::line: return "LINE";
    case ShapeClass::rectangle: return "RECTANGLE";
    case ShapeClass::square: return "SQUARE";
    case ShapeClass::circle: return "CIRCLE";
    case ShapeClass::triangle: return "TRIANGLE";
    case ShapeClass::arc: return "ARC";
    case ShapeClass::blob: return "BLOB";
  }
  return "BLOB";
}

inline std::optional<ShapeClass> shape_from_name(std::string_view name) noexcept {
  for (auto s : kAllShapes) {
    auto n = shape_name(s);
    if (n.size() == name.size() &&
        std::equal(n.begin(), n.end(), name.begin(), [](char a, char b) {
          return a == std::toupper(static_cast<unsigned char>(b));
        }))
      return s;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Feature vector

/// Fixed-layout descriptor: 12 base components, optionally followed by the
/// three keypoint statistics.
///
///   0 circularity 4*pi*A/P^2      6..12 compressed Hu moments h1..h7
///   1 extent A / (w*h)
///   2 aspect min(w,h)/max(w,h)
///   3 solidity A / hull area
///   4 eccentricity
///
/// w and h are the sides of the minimum-area rectangle around the blob, so
/// extent and aspect do not depend on the blob's orientation.
class FeatureVector {
 public:
  static constexpr std::size_t kBaseDims = 12;
  static constexpr std::size_t kMaxDims = 15;

  FeatureVector() : size_(kBaseDims) { values_.fill(0.0); }
  explicit FeatureVector(std::span<const double> values) {
    if (values.size() > kMaxDims) throw Error("feature vector too long");
    values_.fill(0.0);
    std::copy(values.begin(), values.end(), values_.begin());
    size_ = static_cast<std::uint8_t>(values.size());
  }
  FeatureVector(std::initializer_list<double> values)
      : FeatureVector(std::span<const double>(values.begin(), values.size())) {}

  std::size_t size() const noexcept { return size_; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return {values_.data(), size_}; }

  void append(double v) {
    if (size_ >= kMaxDims) throw Error("feature vector full");
    values_[size_++] = v;
  }

  double circularity() const noexcept { return values_[0]; }
  double extent() const noexcept { return values_[1]; }
  double aspect() const noexcept { return values_[2]; }
  double solidity() const noexcept { return values_[3]; }
  double eccentricity() const noexcept { return values_[4]; }

  friend bool operator==(const FeatureVector& a, const FeatureVector& b) noexcept {
    return a.size_ == b.size_ &&
           std::equal(a.values_.begin(), a.values_.begin() + a.size_, b.values_.begin());
  }

 private:
  std::array<double, kMaxDims> values_;
  std::uint8_t size_ = kBaseDims;
};

inline double squared_distance(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) throw Error("feature vectors differ in dimension");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double distance(const FeatureVector& a, const FeatureVector& b) {
  return std::sqrt(squared_distance(a, b));
}

// ---------------------------------------------------------------------------
// Geometry helpers

namespace geometry {

struct IPoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend bool operator==(const IPoint&, const IPoint&) = default;
};

inline std::int64_t cross(IPoint o, IPoint a, IPoint b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Convex hull (counter-clockwise in y-up terms, no collinear points) by
/// monotone chain.
inline std::vector<IPoint> convex_hull(std::vector<IPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](IPoint a, IPoint b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<IPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline double polygon_area(const std::vector<IPoint>& poly) {
  if (poly.size() < 3) return 0.0;
  std::int64_t twice = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::abs(static_cast<double>(twice)) / 2.0;
}

/// Hull of the pixel squares (corner points), in coordinates relative to
/// the bounding box origin. Only the extreme pixels of each row matter.
inline std::vector<IPoint> pixel_hull(const ObjectBlob& blob) {
  const BBox& box = blob.bbox();
  std::vector<int> lo(box.h, box.w), hi(box.h, -1);
  for (auto p : blob.pixels()) {
    const int ry = p.y - box.y0, rx = p.x - box.x0;
    lo[ry] = std::min(lo[ry], rx);
    hi[ry] = std::max(hi[ry], rx);
  }
  std::vector<IPoint> corners;
  corners.reserve(4 * box.h);
  for (int y = 0; y < box.h; ++y) {
    if (hi[y] < 0) continue;
    corners.push_back({lo[y], y});
    corners.push_back({lo[y], y + 1});
    corners.push_back({hi[y] + 1, y});
    corners.push_back({hi[y] + 1, y + 1});
  }
  return convex_hull(std::move(corners));
}

struct OrientedBox {
  double long_side = 0;
  double short_side = 0;
  double area() const noexcept { return long_side * short_side; }
};

/// Minimum-area enclosing rectangle of a convex polygon; one side is always
/// collinear with a hull edge.
inline OrientedBox min_area_rect(const std::vector<IPoint>& hull) {
  OrientedBox best{0, 0};
  double best_area = std::numeric_limits<double>::max();
  const std::size_t n = hull.size();
  for (std::size_t i = 0; i < n; ++i) {
    const IPoint a = hull[i], b = hull[(i + 1) % n];
    const double ex = static_cast<double>(b.x - a.x), ey = static_cast<double>(b.y - a.y);
    const double len = std::hypot(ex, ey);
    if (len == 0) continue;
    const double ux = ex / len, uy = ey / len;
    double umin = 0, umax = 0, vmin = 0, vmax = 0;
    for (const auto& p : hull) {
      const double dx = static_cast<double>(p.x - a.x), dy = static_cast<double>(p.y - a.y);
      const double u = dx * ux + dy * uy, v = -dx * uy + dy * ux;
      umin = std::min(umin, u);
      umax = std::max(umax, u);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
    const double w = umax - umin, h = vmax - vmin;
    if (w * h < best_area) {
      best_area = w * h;
      best = {std::max(w, h), std::min(w, h)};
    }
  }
  return best;
}

// Moore neighbourhood, clockwise on screen (y down), starting east.
inline constexpr std::array<Point, 8> kMoore = {
    {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

inline int moore_direction(int dx, int dy) {
  for (int d = 0; d < 8; ++d)
    if (kMoore[d].x == dx && kMoore[d].y == dy) return d;
  return -1;
}

/// Length of the outer 8-connected boundary through pixel centres of the
/// component containing `start` (which must be its first pixel in raster
/// order). Axis steps count 1, diagonal steps sqrt(2).
inline double trace_outer_boundary(const BinaryImage& m, Point start) {
  int first_dir = -1;
  Point cur = start;
  int back = 4;  // the west neighbour of the raster-first pixel is background
  double length = 0;
  const std::size_t guard = 4 * m.size() + 16;
  for (std::size_t step = 0; step < guard; ++step) {
    int dir = -1;
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      const int nx = cur.x + kMoore[d].x, ny = cur.y + kMoore[d].y;
      if (m.contains(nx, ny) && m.test(nx, ny)) {
        dir = d;
        break;
      }
    }
    if (dir < 0) return 0.0;  // isolated pixel
    if (cur == start) {
      if (first_dir < 0)
        first_dir = dir;
      else if (dir == first_dir)
        break;
    }
    const Point prev_probe{cur.x + kMoore[(dir + 7) % 8].x, cur.y + kMoore[(dir + 7) % 8].y};
    const Point next{cur.x + kMoore[dir].x, cur.y + kMoore[dir].y};
    length += (dir % 2) ? std::numbers::sqrt2 : 1.0;
    back = moore_direction(prev_probe.x - next.x, prev_probe.y - next.y);
    cur = next;
  }
  return length;
}

/// Perimeter estimate of a pixel set: the centre-line boundary length of each
/// 8-connected component plus pi, the length added by offsetting a closed
/// curve outward by half a pixel.
inline double perimeter(const ObjectBlob& blob) {
  const BinaryImage m = blob.mask(1);
  const auto comps = segment(m, {Connectivity::eight, 1});
  double total = 0;
  for (const auto& c : comps)
    total += trace_outer_boundary(m, c.pixels().front()) + std::numbers::pi;
  return total;
}

struct CentralMoments {
  double m00 = 0;
  double mu20 = 0, mu02 = 0, mu11 = 0;
  double mu30 = 0, mu03 = 0, mu21 = 0, mu12 = 0;
};

inline CentralMoments central_moments(const ObjectBlob& blob) {
  const BBox& box = blob.bbox();
  std::int64_t sx = 0, sy = 0;
  for (auto p : blob.pixels()) {
    sx += p.x - box.x0;
    sy += p.y - box.y0;
  }
  CentralMoments m;
  m.m00 = static_cast<double>(blob.area());
  const double cx = static_cast<double>(sx) / m.m00, cy = static_cast<double>(sy) / m.m00;
  for (auto p : blob.pixels()) {
    const double dx = (p.x - box.x0) - cx, dy = (p.y - box.y0) - cy;
    m.mu20 += dx * dx;
    m.mu02 += dy * dy;
    m.mu11 += dx * dy;
    m.mu30 += dx * dx * dx;
    m.mu03 += dy * dy * dy;
    m.mu21 += dx * dx * dy;
    m.mu12 += dx * dy * dy;
  }
  return m;
}

}  // namespace geometry

// ---------------------------------------------------------------------------
// Moments and features

/// The seven rotation-invariant moment combinations of the normalized
/// central moments.
inline std::array<double, 7> hu_moments(const ObjectBlob& blob) {
  if (blob.empty()) return {};
  const auto m = geometry::central_moments(blob);
  const double a = m.m00;
  const double n2 = a * a, n3 = std::pow(a, 2.5);
  const double e20 = m.mu20 / n2, e02 = m.mu02 / n2, e11 = m.mu11 / n2;
  const double e30 = m.mu30 / n3, e03 = m.mu03 / n3, e21 = m.mu21 / n3, e12 = m.mu12 / n3;

  const double s1 = e30 + e12, s2 = e21 + e03;
  const double d1 = e30 - 3 * e12, d2 = 3 * e21 - e03;
  return {
      e20 + e02,
      (e20 - e02) * (e20 - e02) + 4 * e11 * e11,
      d1 * d1 + d2 * d2,
      s1 * s1 + s2 * s2,
      d1 * s1 * (s1 * s1 - 3 * s2 * s2) + d2 * s2 * (3 * s1 * s1 - s2 * s2),
      (e20 - e02) * (s1 * s1 - s2 * s2) + 4 * e11 * s1 * s2,
      d2 * s1 * (s1 * s1 - 3 * s2 * s2) - d1 * s2 * (3 * s1 * s1 - s2 * s2),
  };
}

/// sign(h) * log10(1 + |h| * 1e12) / 12, clamped to [-1, 1].
inline double compress_moment(double h) {
  const double v = std::log10(1.0 + std::abs(h) * 1e12) / 12.0;
  return std::copysign(std::min(v, 1.0), h);
}

inline constexpr double kShapeStatCap = 1.05;

inline FeatureVector extract_features(const ObjectBlob& blob) {
  FeatureVector fv;
  if (blob.empty()) return fv;
  const double area = static_cast<double>(blob.area());

  const double perim = geometry::perimeter(blob);
  fv[0] = std::min(kShapeStatCap, 4.0 * std::numbers::pi * area / (perim * perim));

  const auto hull = geometry::pixel_hull(blob);
  const auto box = geometry::min_area_rect(hull);
  fv[1] = std::min(kShapeStatCap, area / box.area());
  fv[2] = box.short_side / box.long_side;
  fv[3] = std::min(kShapeStatCap, area / geometry::polygon_area(hull));

  const auto m = geometry::central_moments(blob);
  const double tr = m.mu20 + m.mu02;
  const double root = std::sqrt((m.mu20 - m.mu02) * (m.mu20 - m.mu02) + 4 * m.mu11 * m.mu11);
  const double lmax = (tr + root) / 2, lmin = std::max(0.0, (tr - root) / 2);
  fv[4] = lmax > 0 ? std::sqrt(std::max(0.0, 1.0 - lmin / lmax)) : 1.0;
  if (blob.bbox().w == 1 || blob.bbox().h == 1) fv[4] = 1.0;

  const auto hu = hu_moments(blob);
  for (std::size_t i = 0; i < hu.size(); ++i) fv[5 + i] = compress_moment(hu[i]);
  return fv;
}

// ---------------------------------------------------------------------------
// Classification

/// Ordered decision list thresholds.
struct ShapeThresholds {
  double line_aspect_max = 0.15;
  double circle_circularity_min = 0.82;
  double circle_solidity_min = 0.9;
  double square_extent_min = 0.85;
  double square_aspect_min = 0.9;
  double rectangle_extent_min = 0.85;
  double triangle_solidity_min = 0.85;
  double triangle_extent_lo = 0.40;
  double triangle_extent_hi = 0.60;
  double arc_solidity_max = 0.5;
  int arc_endpoints = 2;

  friend bool operator==(const ShapeThresholds&, const ShapeThresholds&) = default;
};

inline ShapeClass classify_shape(const FeatureVector& fv, const ObjectBlob& blob,
                                 const ShapeThresholds& t = {}) {
  const double circ = fv.circularity(), ext = fv.extent(), asp = fv.aspect(), sol = fv.solidity();
  if (asp < t.line_aspect_max) return ShapeClass::line;
  if (circ > t.circle_circularity_min && sol > t.circle_solidity_min) return ShapeClass::circle;
  if (ext > t.square_extent_min && asp > t.square_aspect_min) return ShapeClass::square;
  if (ext > t.rectangle_extent_min) return ShapeClass::rectangle;
  if (sol > t.triangle_solidity_min && ext >= t.triangle_extent_lo && ext <= t.triangle_extent_hi)
    return ShapeClass::triangle;
  if (sol < t.arc_solidity_max && asp >= t.line_aspect_max &&
      count_endpoints(thin(blob)) == t.arc_endpoints)
    return ShapeClass::arc;
  return ShapeClass::blob;
}

}  // namespace shape_gate
