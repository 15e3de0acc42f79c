#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "shape_gate/image.hpp"

namespace shape_gate {

// ---------------------------------------------------------------------------
// Gaussian blur

/// Kernel half-width in units of sigma. Wide enough that the tail mass
/// (about 2e-9) leaves repeated blurring indistinguishable from one blur.
inline constexpr double kGaussianTruncate = 6.0;

/// Sampled 1-D Gaussian truncated at ceil(truncate * sigma), renormalized
/// to sum 1.
inline std::vector<double> gaussian_kernel(double sigma, double truncate = kGaussianTruncate) {
  if (sigma <= 0) return {1.0};
  const int radius = std::max(1, static_cast<int>(std::ceil(truncate * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

namespace detail {

// Half-sample symmetric reflection (x[-1] = x[0]), periodic with 2n.
inline int reflect(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

}  // namespace detail

/// Separable Gaussian convolution with mirrored borders. sigma == 0 returns
/// the input unchanged.
inline RealImage gaussian_blur(const RealImage& img, double sigma,
                               double truncate = kGaussianTruncate) {
  if (sigma < 0) throw Error("gaussian_blur: sigma must be >= 0");
  if (sigma == 0) return img;
  const auto k = gaussian_kernel(sigma, truncate);
  const int r = static_cast<int>(k.size() / 2);
  const int w = img.width(), h = img.height();

  std::vector<int> xs(w + 2 * r), ys(h + 2 * r);
  for (int i = 0; i < w + 2 * r; ++i) xs[i] = detail::reflect(i - r, w);
  for (int i = 0; i < h + 2 * r; ++i) ys[i] = detail::reflect(i - r, h);

  RealImage tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    auto src = img.row(y);
    auto dst = tmp.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int j = 0; j <= 2 * r; ++j) acc += k[j] * src[xs[x + j]];
      dst[x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int j = 0; j <= 2 * r; ++j) acc += k[j] * tmp.at(x, ys[y + j]);
      dst[x] = acc;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scale space

struct ScaleSpaceParams {
  int octaves = 4;
  int scales = 2;  // s; each octave holds s + 3 blurred levels
  double sigma0 = 1.6;

  double k() const { return std::pow(2.0, 1.0 / scales); }
  /// Blur of level i relative to its octave's resolution.
  double level_sigma(int i) const { return sigma0 * std::pow(k(), i); }
};

struct Octave {
  int index = 0;
  std::vector<RealImage> levels;  // L(x, y, sigma0 * k^i)
};

struct ScaleSpace {
  ScaleSpaceParams params;
  std::vector<Octave> octaves;
};

/// Every second pixel in each direction.
inline RealImage downsample(const RealImage& img) {
  RealImage out(std::max(1, img.width() / 2), std::max(1, img.height() / 2));
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out.at(x, y) = img.at(2 * x, 2 * y);
  return out;
}

/// Incremental Gaussian pyramid. Octave 0 starts from the input blurred to
/// sigma0; each later level adds the blur increment
/// sqrt(sigma_i^2 - sigma_{i-1}^2). Octave o + 1 is seeded from level s of
/// octave o (blur 2 * sigma0) downsampled by 2. Octaves whose image would be
/// smaller than 8 pixels on a side are dropped; octave 0 is always built.
inline ScaleSpace build_scale_space(const RealImage& img, const ScaleSpaceParams& params = {}) {
  if (params.octaves < 1 || params.scales < 1 || params.sigma0 <= 0)
    throw Error("scale space needs octaves >= 1, scales >= 1, sigma0 > 0");
  ScaleSpace ss{params, {}};
  const int n_levels = params.scales + 3;

  RealImage seed = img;
  for (int o = 0; o < params.octaves; ++o) {
    if (o > 0) {
      if (img.width() >> o < 8 || img.height() >> o < 8) break;
      seed = downsample(ss.octaves.back().levels[params.scales]);
    }
    Octave oct{o, {}};
    oct.levels.reserve(n_levels);
    oct.levels.push_back(o == 0 ? gaussian_blur(seed, params.sigma0) : std::move(seed));
    for (int i = 1; i < n_levels; ++i) {
      const double prev = params.level_sigma(i - 1), next = params.level_sigma(i);
      oct.levels.push_back(gaussian_blur(oct.levels.back(), std::sqrt(next * next - prev * prev)));
    }
    ss.octaves.push_back(std::move(oct));
  }
  return ss;
}

// ---------------------------------------------------------------------------
// Difference of Gaussians

struct DogOctave {
  int index = 0;
  std::vector<RealImage> levels;  // D_i = L_{i+1} - L_i
};

struct DogStack {
  ScaleSpaceParams params;
  std::vector<DogOctave> octaves;
};

inline RealImage subtract(const RealImage& a, const RealImage& b) {
  RealImage out(a.width(), a.height());
  auto pa = a.pixels(), pb = b.pixels();
  auto po = out.pixels();
  for (std::size_t i = 0; i < po.size(); ++i) po[i] = pa[i] - pb[i];
  return out;
}

inline DogStack build_dog(const ScaleSpace& ss) {
  DogStack dog{ss.params, {}};
  for (const auto& oct : ss.octaves) {
    DogOctave d{oct.index, {}};
    for (std::size_t i = 0; i + 1 < oct.levels.size(); ++i)
      d.levels.push_back(subtract(oct.levels[i + 1], oct.levels[i]));
    dog.octaves.push_back(std::move(d));
  }
  return dog;
}

/// Largest absolute difference between the stack and the direct form
/// G(k sigma) * I - G(sigma) * I, each side blurred from the octave seed in
/// one pass. Octave 0's seed is the input; later seeds already carry sigma0.
inline double dog_two_path_error(const RealImage& input, const ScaleSpace& ss, const DogStack& dog) {
  const auto& p = ss.params;
  double worst = 0;
  for (std::size_t o = 0; o < ss.octaves.size(); ++o) {
    const RealImage& seed = o == 0 ? input : ss.octaves[o].levels[0];
    const double carried = o == 0 ? 0.0 : p.sigma0;
    auto direct = [&](int i) {
      const double s = p.level_sigma(i);
      return gaussian_blur(seed, std::sqrt(std::max(0.0, s * s - carried * carried)));
    };
    RealImage lower = direct(0);
    for (std::size_t i = 0; i < dog.octaves[o].levels.size(); ++i) {
      RealImage upper = direct(static_cast<int>(i) + 1);
      auto d = dog.octaves[o].levels[i].pixels();
      auto u = upper.pixels(), l = lower.pixels();
      for (std::size_t j = 0; j < d.size(); ++j)
        worst = std::max(worst, std::abs(d[j] - (u[j] - l[j])));
      lower = std::move(upper);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Extrema

enum class Polarity { max, min };

struct Keypoint {
  double x = 0;  // original-image coordinates
  double y = 0;
  int octave = 0;
  int scale_index = 0;  // DoG level within the octave
  double sigma = 0;     // effective blur in original pixels
  double response = 0;
  Polarity polarity = Polarity::max;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

inline constexpr double kDefaultContrastThreshold = 0.015;

/// Pixels strictly above (or below) all 26 scale-space neighbours, off the
/// image border, with |D| >= contrast_threshold.
inline std::vector<Keypoint> detect_extrema(const DogStack& dog,
                                            double contrast_threshold = kDefaultContrastThreshold) {
  std::vector<Keypoint> out;
  for (const auto& oct : dog.octaves) {
    const auto& lv = oct.levels;
    if (lv.size() < 3) continue;
    const int w = lv[0].width(), h = lv[0].height();
    const double scale = std::ldexp(1.0, oct.index);
    for (std::size_t i = 1; i + 1 < lv.size(); ++i)
      for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x) {
          const double v = lv[i].at(x, y);
          if (std::abs(v) < contrast_threshold) continue;
          bool is_max = true, is_min = true;
          for (std::size_t j = i - 1; j <= i + 1 && (is_max || is_min); ++j)
            for (int dy = -1; dy <= 1; ++dy)
              for (int dx = -1; dx <= 1; ++dx) {
                if (j == i && dx == 0 && dy == 0) continue;
                const double n = lv[j].at(x + dx, y + dy);
                is_max = is_max && v > n;
                is_min = is_min && v < n;
              }
          if (!is_max && !is_min) continue;
          out.push_back({x * scale, y * scale, oct.index, static_cast<int>(i),
                         dog.params.level_sigma(static_cast<int>(i)) * scale, v,
                         is_max ? Polarity::max : Polarity::min});
        }
  }
  return out;
}

struct KeypointStats {
  std::size_t count = 0;
  double mean_sigma = 0;
  double mean_abs_response = 0;
  friend bool operator==(const KeypointStats&, const KeypointStats&) = default;
};

inline KeypointStats keypoint_stats(const std::vector<Keypoint>& kps) {
  KeypointStats s;
  if (kps.empty()) return s;
  for (const auto& k : kps) {
    s.mean_sigma += k.sigma;
    s.mean_abs_response += std::abs(k.response);
  }
  s.count = kps.size();
  s.mean_sigma /= static_cast<double>(kps.size());
  s.mean_abs_response /= static_cast<double>(kps.size());
  return s;
}

}  // namespace shape_gate
