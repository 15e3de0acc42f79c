#pragma once

// Raster builders and fixtures shared by the unit tests and the acceptance
// runner.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "shape_gate/shape_gate.hpp"

namespace shape_gate::testing {

inline BinaryImage draw(int w, int h, const std::function<bool(int, int)>& inside) {
  BinaryImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (inside(x, y)) img.set(x, y);
  return img;
}

inline GrayImage to_gray(const BinaryImage& bin, std::uint8_t bg = 20, std::uint8_t fg = 230) {
  GrayImage g(bin.width(), bin.height(), bg);
  for (int y = 0; y < bin.height(); ++y)
    for (int x = 0; x < bin.width(); ++x)
      if (bin.test(x, y)) g.at(x, y) = fg;
  return g;
}

inline ObjectBlob rect_blob(int x0, int y0, int w, int h) {
  std::vector<Point> pts;
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) pts.push_back({x, y});
  return ObjectBlob(std::move(pts));
}

/// Pixels whose centre lies within r of (cx, cy).
inline ObjectBlob disk_blob(int cx, int cy, double r) {
  std::vector<Point> pts;
  const int R = static_cast<int>(std::ceil(r));
  for (int y = cy - R; y <= cy + R; ++y)
    for (int x = cx - R; x <= cx + R; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) pts.push_back({x, y});
  return ObjectBlob(std::move(pts));
}

/// w x h rectangle rotated by `angle` about (cx, cy), sampled at pixel centres.
inline ObjectBlob rotated_rect_blob(double cx, double cy, double w, double h, double angle) {
  std::vector<Point> pts;
  const double c = std::cos(angle), s = std::sin(angle);
  const int R = static_cast<int>(std::ceil(std::hypot(w, h) / 2)) + 1;
  for (int y = static_cast<int>(cy) - R; y <= static_cast<int>(cy) + R; ++y)
    for (int x = static_cast<int>(cx) - R; x <= static_cast<int>(cx) + R; ++x) {
      const double u = (x - cx) * c + (y - cy) * s, v = -(x - cx) * s + (y - cy) * c;
      if (std::abs(u) <= w / 2 && std::abs(v) <= h / 2) pts.push_back({x, y});
    }
  return ObjectBlob(std::move(pts));
}

inline BinaryImage blob_on_canvas(const ObjectBlob& blob, int w, int h) {
  BinaryImage img(w, h);
  for (auto p : blob.pixels()) img.set(p.x, p.y);
  return img;
}

inline BinaryImage random_binary(int w, int h, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution on(density);
  BinaryImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, on(rng));
  return img;
}

inline RealImage random_real(int w, int h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealImage img(w, h);
  for (auto& v : img.pixels()) v = u(rng);
  return img;
}

/// Benchmark fixture: five shape classes with `per_class` training members
/// each, every member in the same scale window, plus fresh queries drawn
/// uniformly over the same classes and window.
struct SyntheticBench {
  Config cfg;
  GlobalIndex index;
  std::vector<BenchQuery> queries;
};

inline constexpr std::array<ShapeClass, 5> kBenchClasses = {
    ShapeClass::line, ShapeClass::rectangle, ShapeClass::square, ShapeClass::circle,
    ShapeClass::triangle};

inline SyntheticBench make_synthetic_bench(int per_class = 20, int queries_per_class = 20,
                                           std::uint64_t seed = 2024) {
  SyntheticBench b;
  CorpusOptions opts;
  opts.canvas = 96;
  opts.min_size = 40;
  opts.max_size = 58;
  opts.classes.assign(kBenchClasses.begin(), kBenchClasses.end());

  const int window = map_to_window(64, 64, b.cfg.scale.family(), true).index;
  auto usable = [&](const CorpusItem& item) -> std::optional<BlobProbe> {
    auto blobs = preprocess_scene(item.image, b.cfg.preprocess);
    if (blobs.size() != 1) return std::nullopt;
    auto probe = probe_blob(std::move(blobs[0]), 0, b.cfg, true);
    if (probe.shape != item.truth || probe.window.index != window) return std::nullopt;
    return probe;
  };

  // Oversample, then keep the first items per class that land in the window.
  const auto train_pool = generate_corpus(seed, per_class * 3, opts);
  const auto query_pool = generate_corpus(seed + 1, queries_per_class * 3, opts);
  std::map<ShapeClass, int> trained, queried;
  for (const auto& item : train_pool) {
    if (trained[item.truth] >= per_class) continue;
    if (!usable(item)) continue;
    const std::vector<std::string> labels{item.label};
    train_scene(item.image, labels, b.index, b.cfg, item.name);
    ++trained[item.truth];
  }
  for (const auto& item : query_pool) {
    if (queried[item.truth] >= queries_per_class) continue;
    auto probe = usable(item);
    if (!probe) continue;
    BenchQuery q;
    q.query = b.queries.size();
    q.features = describe_blob(*probe, b.cfg).features;
    q.probe = std::move(*probe);
    b.queries.push_back(std::move(q));
    ++queried[item.truth];
  }
  return b;
}

}  // namespace shape_gate::testing
