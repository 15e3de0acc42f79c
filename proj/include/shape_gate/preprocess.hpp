#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <variant>
#include <vector>

#include "shape_gate/image.hpp"

namespace shape_gate {

struct BBox {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  int x1() const noexcept { return x0 + w; }  // exclusive
  int y1() const noexcept { return y0 + h; }  // exclusive
  bool contains(Point p) const noexcept {
    return p.x >= x0 && p.y >= y0 && p.x < x1() && p.y < y1();
  }
  friend bool operator==(const BBox&, const BBox&) = default;
};

/// One connected foreground component. Pixels are kept in raster order and
/// the bounding box is the tightest one around them.
class ObjectBlob {
 public:
  ObjectBlob() = default;
  explicit ObjectBlob(std::vector<Point> pixels) : pixels_(std::move(pixels)) {
    std::sort(pixels_.begin(), pixels_.end());
    pixels_.erase(std::unique(pixels_.begin(), pixels_.end()), pixels_.end());
    if (pixels_.empty()) return;
    int x0 = std::numeric_limits<int>::max(), y0 = x0;
    int x1 = std::numeric_limits<int>::min(), y1 = x1;
    for (auto p : pixels_) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
    bbox_ = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
  }

  const std::vector<Point>& pixels() const noexcept { return pixels_; }
  const BBox& bbox() const noexcept { return bbox_; }
  std::size_t area() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  /// The blob rasterized into its own bounding box, with `pad` background
  /// pixels on every side.
  BinaryImage mask(int pad = 0) const {
    BinaryImage out(bbox_.w + 2 * pad, bbox_.h + 2 * pad);
    for (auto p : pixels_) out.set(p.x - bbox_.x0 + pad, p.y - bbox_.y0 + pad);
    return out;
  }

  ObjectBlob translated(int dx, int dy) const {
    std::vector<Point> moved;
    moved.reserve(pixels_.size());
    for (auto p : pixels_) moved.push_back({p.x + dx, p.y + dy});
    return ObjectBlob(std::move(moved));
  }

  friend bool operator==(const ObjectBlob&, const ObjectBlob&) = default;

 private:
  std::vector<Point> pixels_;
  BBox bbox_;
};

/// Every foreground pixel of `img` as one pixel set (not necessarily
/// connected).
inline ObjectBlob blob_from_image(const BinaryImage& img) {
  std::vector<Point> pts;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img.test(x, y)) pts.push_back({x, y});
  return ObjectBlob(std::move(pts));
}

// ---------------------------------------------------------------------------
// Thresholding

struct FixedThreshold {
  int level = 128;
};
struct OtsuThreshold {};
using ThresholdMode = std::variant<FixedThreshold, OtsuThreshold>;

struct OtsuResult {
  int threshold = 0;
  bool degenerate = false;  // fewer than two distinct levels
};

/// Threshold t (pixel is foreground iff value >= t) maximizing the
/// between-class variance. Ties over a plateau resolve to its midpoint.
inline OtsuResult otsu_threshold(const GrayImage& img) {
  std::array<std::uint64_t, 256> hist{};
  for (auto v : img.pixels()) ++hist[v];

  int lo = 255, hi = 0;
  for (int v = 0; v < 256; ++v)
    if (hist[v]) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (lo == hi) return {lo, true};

  const double total = static_cast<double>(img.size());
  double sum_all = 0;
  for (int v = 0; v < 256; ++v) sum_all += static_cast<double>(v) * hist[v];

  double w0 = 0, sum0 = 0, best = -1;
  int first = 0, last = 0;
  for (int t = 1; t < 256; ++t) {
    w0 += static_cast<double>(hist[t - 1]);
    sum0 += static_cast<double>(t - 1) * hist[t - 1];
    const double w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    const double diff = sum_all * w0 - sum0 * total;
    const double between = diff * diff / (w0 * w1);
    if (between > best) {
      best = between;
      first = last = t;
    } else if (between == best) {
      last = t;
    }
  }
  return {(first + last) / 2, false};
}

inline BinaryImage binarize(const GrayImage& img, ThresholdMode mode = OtsuThreshold{}) {
  BinaryImage out(img.width(), img.height());
  int threshold = 0;
  if (const auto* fixed = std::get_if<FixedThreshold>(&mode)) {
    threshold = fixed->level;
  } else {
    const auto otsu = otsu_threshold(img);
    if (otsu.degenerate) return out;  // one grey level: all background
    threshold = otsu.threshold;
  }
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= threshold ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Majority (binary median) filter

/// Each output pixel is the majority value of its (2r+1)^2 neighbourhood,
/// borders replicated. radius < 1 returns the input.
inline BinaryImage denoise_median(const BinaryImage& img, int radius = 1) {
  if (radius < 1) return img;
  const int w = img.width(), h = img.height();
  const int pw = w + 2 * radius, ph = h + 2 * radius;

  // summed-area table over the replicate-padded image
  std::vector<std::int64_t> sat(static_cast<std::size_t>(pw + 1) * (ph + 1), 0);
  auto s = [&](int x, int y) -> std::int64_t& {
    return sat[static_cast<std::size_t>(y) * (pw + 1) + x];
  };
  for (int y = 0; y < ph; ++y) {
    const int sy = std::clamp(y - radius, 0, h - 1);
    std::int64_t run = 0;
    for (int x = 0; x < pw; ++x) {
      const int sx = std::clamp(x - radius, 0, w - 1);
      run += img.test(sx, sy) ? 1 : 0;
      s(x + 1, y + 1) = s(x + 1, y) + run;
    }
  }

  const int side = 2 * radius + 1;
  const std::int64_t majority = static_cast<std::int64_t>(side) * side / 2 + 1;
  BinaryImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::int64_t n = s(x + side, y + side) - s(x, y + side) - s(x + side, y) + s(x, y);
      out.set(x, y, n >= majority);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Connected components

enum class Connectivity { four = 4, eight = 8 };

struct SegmentOptions {
  Connectivity connectivity = Connectivity::eight;
  std::size_t min_area = 8;
};

/// Labels foreground components. Result is ordered by (y0, x0) of the
/// bounding box, ties by raster position of the first pixel; components
/// smaller than min_area are dropped.
inline std::vector<ObjectBlob> segment(const BinaryImage& img, SegmentOptions opts = {}) {
  const int w = img.width(), h = img.height();
  std::vector<std::uint8_t> seen(img.size(), 0);
  std::vector<ObjectBlob> blobs;
  std::vector<Point> stack, component;

  static constexpr std::array<Point, 8> kNeighbours = {
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};
  const std::size_t n_neighbours = opts.connectivity == Connectivity::eight ? 8 : 4;

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto idx = static_cast<std::size_t>(y) * w + x;
      if (!img.test(x, y) || seen[idx]) continue;
      seen[idx] = 1;
      stack.assign(1, {x, y});
      component.clear();
      while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        component.push_back(p);
        for (std::size_t k = 0; k < n_neighbours; ++k) {
          const int nx = p.x + kNeighbours[k].x, ny = p.y + kNeighbours[k].y;
          if (!img.contains(nx, ny) || !img.test(nx, ny)) continue;
          auto& flag = seen[static_cast<std::size_t>(ny) * w + nx];
          if (flag) continue;
          flag = 1;
          stack.push_back({nx, ny});
        }
      }
      if (component.size() >= opts.min_area) blobs.emplace_back(component);
    }

  std::stable_sort(blobs.begin(), blobs.end(), [](const ObjectBlob& a, const ObjectBlob& b) {
    if (a.bbox().y0 != b.bbox().y0) return a.bbox().y0 < b.bbox().y0;
    return a.bbox().x0 < b.bbox().x0;
  });
  return blobs;
}

// ---------------------------------------------------------------------------
// Zhang-Suen thinning

namespace detail {

// neighbours P2..P9, clockwise from north
inline std::array<std::uint8_t, 8> ring(const BinaryImage& m, int x, int y) {
  return {m.at(x, y - 1),     m.at(x + 1, y - 1), m.at(x + 1, y), m.at(x + 1, y + 1),
          m.at(x, y + 1),     m.at(x - 1, y + 1), m.at(x - 1, y), m.at(x - 1, y - 1)};
}

inline int zs_pass(BinaryImage& m, int sub, std::vector<Point>& doomed) {
  doomed.clear();
  for (int y = 1; y < m.height() - 1; ++y)
    for (int x = 1; x < m.width() - 1; ++x) {
      if (!m.at(x, y)) continue;
      const auto p = ring(m, x, y);
      int b = 0, a = 0;
      for (int i = 0; i < 8; ++i) {
        b += p[i];
        a += (!p[i] && p[(i + 1) % 8]);
      }
      if (b < 2 || b > 6 || a != 1) continue;
      const auto [p2, p4, p6, p8] = std::array{p[0], p[2], p[4], p[6]};
      const bool ok = sub == 0 ? (!(p2 && p4 && p6) && !(p4 && p6 && p8))
                               : (!(p2 && p4 && p8) && !(p2 && p6 && p8));
      if (ok) doomed.push_back({x, y});
    }
  for (auto q : doomed) m.at(q.x, q.y) = 0;
  return static_cast<int>(doomed.size());
}

}  // namespace detail

/// Zhang-Suen skeleton. A blob the rule would erase entirely (2x2 blocks,
/// for instance) keeps the pixel nearest its centroid.
inline ObjectBlob thin(const ObjectBlob& blob) {
  if (blob.empty()) return blob;
  BinaryImage m = blob.mask(1);
  std::vector<Point> doomed;
  for (;;) {
    const int removed = detail::zs_pass(m, 0, doomed) + detail::zs_pass(m, 1, doomed);
    if (removed == 0) break;
  }
  const auto& box = blob.bbox();
  std::vector<Point> kept;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.test(x, y)) kept.push_back({x - 1 + box.x0, y - 1 + box.y0});

  if (kept.empty()) {
    double cx = 0, cy = 0;
    for (auto p : blob.pixels()) {
      cx += p.x;
      cy += p.y;
    }
    cx /= static_cast<double>(blob.area());
    cy /= static_cast<double>(blob.area());
    Point best = blob.pixels().front();
    double best_d = std::numeric_limits<double>::max();
    for (auto p : blob.pixels()) {
      const double d = (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
      if (d < best_d) {
        best_d = d;
        best = p;
      }
    }
    kept.push_back(best);
  }
  return ObjectBlob(std::move(kept));
}

/// Skeleton pixels with exactly one 8-neighbour.
inline int count_endpoints(const ObjectBlob& skeleton) {
  if (skeleton.empty()) return 0;
  const BinaryImage m = skeleton.mask(1);
  int ends = 0;
  for (int y = 1; y < m.height() - 1; ++y)
    for (int x = 1; x < m.width() - 1; ++x) {
      if (!m.test(x, y)) continue;
      int n = 0;
      for (auto v : detail::ring(m, x, y)) n += v;
      ends += n == 1;
    }
  return ends;
}

// ---------------------------------------------------------------------------
// Normalization

/// Nearest-neighbour rescale of the blob into a side x side raster: the
/// longer bbox side spans the window, the shorter axis is centred.
inline BinaryImage normalize(const ObjectBlob& blob, int side) {
  if (side < 1) throw Error("normalize: window side must be >= 1");
  BinaryImage out(side, side);
  if (blob.empty()) return out;

  const BBox& box = blob.bbox();
  const BinaryImage src = blob.mask();
  const int longer = std::max(box.w, box.h);
  const double scale = static_cast<double>(side) / longer;
  const int cw = std::clamp(static_cast<int>(std::lround(box.w * scale)), 1, side);
  const int ch = std::clamp(static_cast<int>(std::lround(box.h * scale)), 1, side);
  const int ox = (side - cw) / 2, oy = (side - ch) / 2;

  bool any = false;
  for (int v = 0; v < ch; ++v) {
    const int sy = std::min(box.h - 1, static_cast<int>((v + 0.5) * box.h / ch));
    for (int u = 0; u < cw; ++u) {
      const int sx = std::min(box.w - 1, static_cast<int>((u + 0.5) * box.w / cw));
      if (src.test(sx, sy)) {
        out.set(ox + u, oy + v);
        any = true;
      }
    }
  }
  if (!any) {
    // thin structures can fall between samples; splat forward instead
    for (auto p : blob.pixels()) {
      const int u = std::min(cw - 1, static_cast<int>((p.x - box.x0) * static_cast<double>(cw) / box.w));
      const int v = std::min(ch - 1, static_cast<int>((p.y - box.y0) * static_cast<double>(ch) / box.h));
      out.set(ox + u, oy + v);
    }
  }
  return out;
}

}  // namespace shape_gate
