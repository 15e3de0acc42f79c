#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "shape_gate/dog.hpp"
#include "shape_gate/features.hpp"
#include "shape_gate/preprocess.hpp"
#include "shape_gate/scale_windows.hpp"

namespace shape_gate {

struct PreprocessConfig {
  ThresholdMode threshold = OtsuThreshold{};
  int denoise_radius = 1;  // 0 disables the majority filter
  SegmentOptions segment{};
};

struct ScaleConfig {
  int base = 4;
  int count = 5;
  bool extensible = true;  // applies to queries; training always extends

  WindowFamily family() const { return WindowFamily(base, count); }
};

struct DogConfig {
  ScaleSpaceParams params{};
  double contrast_threshold = kDefaultContrastThreshold;
  bool append_stats_to_features = false;
};

struct DetectConfig {
  double tau = 0.25;
  int slack = 0;
  bool exact_min = false;      // scan every candidate instead of stopping at the first hit
  bool centroid_only = false;  // match against cluster means only
};

/// Engine configuration; sections mirror the key/value config file.
struct Config {
  PreprocessConfig preprocess;
  ShapeThresholds shape;
  ScaleConfig scale;
  DogConfig dog;
  DetectConfig detect;
};

namespace detail {

inline std::string clean_value(std::string v) {
  if (auto hash = v.find('#'); hash != std::string::npos) v.erase(hash);
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
  std::size_t start = 0;
  while (start < v.size() && std::isspace(static_cast<unsigned char>(v[start]))) ++start;
  v.erase(0, start);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
    v = v.substr(1, v.size() - 2);
  return v;
}

template <typename T>
void read_key(const boost::property_tree::ptree& pt, const std::string& path, T& out) {
  auto raw = pt.get_optional<std::string>(path);
  if (!raw) return;
  const std::string v = clean_value(*raw);
  if constexpr (std::is_same_v<T, bool>) {
    if (v == "true" || v == "1") out = true;
    else if (v == "false" || v == "0") out = false;
    else throw Error("config: " + path + " expects true/false, got '" + v + "'");
  } else {
    std::istringstream in(v);
    T parsed{};
    if (!(in >> parsed) || !(in >> std::ws).eof())
      throw Error("config: bad value for " + path + ": '" + v + "'");
    out = parsed;
  }
}

}  // namespace detail

inline Config parse_config(std::istream& in) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(std::string("config: ") + e.what());
  }
  Config c;
  using detail::read_key;

  if (auto raw = pt.get_optional<std::string>("preprocess.threshold")) {
    const std::string v = detail::clean_value(*raw);
    if (v == "otsu") {
      c.preprocess.threshold = OtsuThreshold{};
    } else {
      int level = 0;
      read_key(pt, "preprocess.threshold", level);
      c.preprocess.threshold = FixedThreshold{level};
    }
  }
  read_key(pt, "preprocess.denoise_radius", c.preprocess.denoise_radius);
  int connectivity = static_cast<int>(c.preprocess.segment.connectivity);
  read_key(pt, "preprocess.connectivity", connectivity);
  if (connectivity != 4 && connectivity != 8) throw Error("config: connectivity must be 4 or 8");
  c.preprocess.segment.connectivity = static_cast<Connectivity>(connectivity);
  read_key(pt, "preprocess.min_area", c.preprocess.segment.min_area);

  auto& s = c.shape;
  read_key(pt, "shape.line_aspect_max", s.line_aspect_max);
  read_key(pt, "shape.circle_circularity_min", s.circle_circularity_min);
  read_key(pt, "shape.circle_solidity_min", s.circle_solidity_min);
  read_key(pt, "shape.square_extent_min", s.square_extent_min);
  read_key(pt, "shape.square_aspect_min", s.square_aspect_min);
  read_key(pt, "shape.rectangle_extent_min", s.rectangle_extent_min);
  read_key(pt, "shape.triangle_solidity_min", s.triangle_solidity_min);
  read_key(pt, "shape.triangle_extent_lo", s.triangle_extent_lo);
  read_key(pt, "shape.triangle_extent_hi", s.triangle_extent_hi);
  read_key(pt, "shape.arc_solidity_max", s.arc_solidity_max);
  read_key(pt, "shape.arc_endpoints", s.arc_endpoints);

  read_key(pt, "scale.base", c.scale.base);
  read_key(pt, "scale.count", c.scale.count);
  read_key(pt, "scale.extensible", c.scale.extensible);
  c.scale.family();  // validates base/count

  read_key(pt, "dog.octaves", c.dog.params.octaves);
  read_key(pt, "dog.scales", c.dog.params.scales);
  read_key(pt, "dog.sigma0", c.dog.params.sigma0);
  read_key(pt, "dog.contrast_threshold", c.dog.contrast_threshold);
  read_key(pt, "dog.append_stats_to_features", c.dog.append_stats_to_features);

  read_key(pt, "detect.tau", c.detect.tau);
  read_key(pt, "detect.slack", c.detect.slack);
  read_key(pt, "detect.exact_min", c.detect.exact_min);
  read_key(pt, "detect.centroid_only", c.detect.centroid_only);
  if (c.detect.tau <= 0) throw Error("config: tau must be > 0");
  if (c.detect.slack < 0) throw Error("config: slack must be >= 0");
  return c;
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  return parse_config(in);
}

/// Hash of everything that changes what a stored feature vector means:
/// shape thresholds, the window family and the feature layout.
inline std::string config_fingerprint(const Config& c) {
  std::ostringstream canon;
  canon.precision(17);
  const auto& s = c.shape;
  canon << "shape:" << s.line_aspect_max << ',' << s.circle_circularity_min << ','
        << s.circle_solidity_min << ',' << s.square_extent_min << ',' << s.square_aspect_min << ','
        << s.rectangle_extent_min << ',' << s.triangle_solidity_min << ',' << s.triangle_extent_lo
        << ',' << s.triangle_extent_hi << ',' << s.arc_solidity_max << ',' << s.arc_endpoints
        << ";scale:" << c.scale.base << ',' << c.scale.count
        << ";features:" << (c.dog.append_stats_to_features ? 15 : 12);
  // FNV-1a, 64 bit
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canon.str()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace shape_gate
