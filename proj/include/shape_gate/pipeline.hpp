#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "shape_gate/cluster_index.hpp"
#include "shape_gate/config.hpp"
#include "shape_gate/dog.hpp"
#include "shape_gate/features.hpp"
#include "shape_gate/preprocess.hpp"
#include "shape_gate/scale_windows.hpp"

namespace shape_gate {

/// How often each expensive per-blob stage ran. Early-rejected blobs must
/// never reach normalization or keypoint detection.
struct StageCounters {
  std::atomic<std::uint64_t> shape_probes{0};
  std::atomic<std::uint64_t> normalizations{0};
  std::atomic<std::uint64_t> keypoint_runs{0};
};

/// Input scene -> remove noise -> segment.
inline std::vector<ObjectBlob> preprocess_scene(const GrayImage& img, const PreprocessConfig& cfg) {
  BinaryImage bin = binarize(img, cfg.threshold);
  if (cfg.denoise_radius > 0) bin = denoise_median(bin, cfg.denoise_radius);
  return segment(bin, cfg.segment);
}

/// Shape and scale of one segmented blob: everything the index lookup needs.
struct BlobProbe {
  std::size_t ordinal = 0;
  ObjectBlob blob;
  ShapeClass shape = ShapeClass::blob;
  ScaleWindow window;
};

inline BlobProbe probe_blob(ObjectBlob blob, std::size_t ordinal, const Config& cfg,
                            bool extensible, StageCounters* counters = nullptr) {
  if (counters) ++counters->shape_probes;
  const auto fv = extract_features(blob);
  BlobProbe p;
  p.ordinal = ordinal;
  p.shape = classify_shape(fv, blob, cfg.shape);
  p.window = map_to_window(blob.bbox().w, blob.bbox().h, cfg.scale.family(), extensible);
  p.blob = std::move(blob);
  return p;
}

/// Matching descriptor: features of the blob normalized into its window,
/// plus keypoint statistics of that normalized raster.
struct BlobDescriptor {
  FeatureVector features;
  KeypointStats keypoints;
};

inline constexpr int kKeypointPad = 4;

inline BlobDescriptor describe_blob(const BlobProbe& probe, const Config& cfg,
                                    StageCounters* counters = nullptr) {
  if (counters) ++counters->normalizations;
  const BinaryImage norm = normalize(probe.blob, probe.window.side);
  BlobDescriptor d;
  d.features = extract_features(blob_from_image(norm));

  if (counters) ++counters->keypoint_runs;
  const int side = norm.width() + 2 * kKeypointPad;
  RealImage real(side, side, 0.0);
  for (int y = 0; y < norm.height(); ++y)
    for (int x = 0; x < norm.width(); ++x)
      if (norm.test(x, y)) real.at(x + kKeypointPad, y + kKeypointPad) = 1.0;
  const auto dog = build_dog(build_scale_space(real, cfg.dog.params));
  d.keypoints = keypoint_stats(detect_extrema(dog, cfg.dog.contrast_threshold));

  if (cfg.dog.append_stats_to_features) {
    d.features.append(static_cast<double>(d.keypoints.count));
    d.features.append(d.keypoints.mean_sigma);
    d.features.append(d.keypoints.mean_abs_response);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Training

struct TrainRow {
  std::string label;
  ShapeClass shape = ShapeClass::blob;
  ScaleWindow window;
  int cluster_id = 0;
  bool created_new_cluster = false;
};

struct TrainReport {
  std::string scene_id;
  std::size_t blobs_found = 0;
  std::vector<TrainRow> rows;
};

/// Segments the scene, then for each blob in segmentation order: shape,
/// window, normalized features, insert. A label-count mismatch throws before
/// the index is touched.
inline TrainReport train_scene(const GrayImage& img, std::span<const std::string> labels,
                               GlobalIndex& index, const Config& cfg,
                               const std::string& scene_id = {}) {
  auto blobs = preprocess_scene(img, cfg.preprocess);
  if (blobs.size() != labels.size()) throw LabelMismatchError(labels.size(), blobs.size());

  std::vector<BlobProbe> probes;
  std::vector<BlobDescriptor> descriptors;
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    probes.push_back(probe_blob(std::move(blobs[i]), i, cfg, /*extensible=*/true));
    descriptors.push_back(describe_blob(probes.back(), cfg));
  }
  if (!index.empty() && index.clusters().front().mean.size() != descriptors.front().features.size())
    throw Error("feature layout differs from the index");

  TrainReport report{scene_id, probes.size(), {}};
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& p = probes[i];
    const auto res = index.insert(labels[i], {p.shape, p.window.index}, p.window.side,
                                  descriptors[i].features, scene_id + "#" + std::to_string(i));
    report.rows.push_back({labels[i], p.shape, p.window, res.id, res.created});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Detection

enum class Outcome { detected, new_object };

enum class NewObjectReason { none, no_shape_cluster, no_scale_cluster, distance_exceeds_tau };

inline std::string_view reason_name(NewObjectReason r) {
  switch (r) {
    case NewObjectReason::none: return "none";
    case NewObjectReason::no_shape_cluster: return "no_shape_cluster";
    case NewObjectReason::no_scale_cluster: return "no_scale_cluster";
    case NewObjectReason::distance_exceeds_tau: return "distance_exceeds_tau";
  }
  return "none";
}

/// Result of the index-search stage alone.
struct SearchOutcome {
  Outcome outcome = Outcome::new_object;
  std::string label;
  double distance = 0;
  NewObjectReason reason = NewObjectReason::none;
  std::size_t clusters_visited = 0;
  std::uint64_t members_compared = 0;
};

struct DetectionResult {
  std::size_t blob = 0;
  Outcome outcome = Outcome::new_object;
  std::string label;
  double distance = 0;
  NewObjectReason reason = NewObjectReason::none;
  ShapeClass shape = ShapeClass::blob;
  ScaleWindow window;
  std::size_t clusters_visited = 0;
  std::uint64_t members_compared = 0;
  std::int64_t elapsed = 0;  // nanoseconds
  std::optional<KeypointStats> keypoints;
  BBox bbox;
};

namespace detail {

inline std::string majority_label(const Cluster& c) {
  std::map<std::string, std::size_t> tally;
  for (const auto& m : c.members) ++tally[m.label];
  std::string best;
  std::size_t best_n = 0;
  for (const auto& m : c.members)
    if (tally[m.label] > best_n) {
      best_n = tally[m.label];
      best = m.label;
    }
  return best;
}

}  // namespace detail

/// Visits candidate clusters nearest-mean first. By default the first
/// cluster whose best member lies within tau wins; exact_min scans them all
/// and centroid_only compares against the means alone.
inline SearchOutcome match_candidates(const GlobalIndex& index, std::span<const int> candidates,
                                      const FeatureVector& fv, const DetectConfig& cfg) {
  SearchOutcome out;
  std::vector<const Cluster*> ranked;
  ranked.reserve(candidates.size());
  for (int id : candidates) ranked.push_back(&index.cluster(id));
  ranked = rank_by_mean(std::move(ranked), fv);

  if (cfg.centroid_only) {
    out.clusters_visited = ranked.size();
    const Cluster& c = *ranked.front();
    out.distance = distance(c.mean, fv);
    if (out.distance <= cfg.tau) {
      out.outcome = Outcome::detected;
      out.label = detail::majority_label(c);
    } else {
      out.reason = NewObjectReason::distance_exceeds_tau;
    }
    return out;
  }

  const Member* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Cluster* c : ranked) {
    const auto m = nearest_member(*c, fv, &index.comparisons());
    ++out.clusters_visited;
    out.members_compared += c->count();
    if (m.distance < best_d) {
      best_d = m.distance;
      best = m.member;
    }
    if (!cfg.exact_min && best_d <= cfg.tau) break;
  }
  out.distance = best_d;
  if (best && best_d <= cfg.tau) {
    out.outcome = Outcome::detected;
    out.label = best->label;
  } else {
    out.reason = NewObjectReason::distance_exceeds_tau;
  }
  return out;
}

/// Baseline: every cluster in the index, no gating, global minimum.
inline SearchOutcome search_exhaustive(const GlobalIndex& index, const FeatureVector& fv, double tau) {
  SearchOutcome out;
  if (index.empty()) {
    out.reason = NewObjectReason::no_shape_cluster;
    return out;
  }
  const Member* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& c : index.clusters()) {
    const auto m = nearest_member(c, fv, &index.comparisons());
    ++out.clusters_visited;
    out.members_compared += c.count();
    if (m.distance < best_d) {
      best_d = m.distance;
      best = m.member;
    }
  }
  out.distance = best_d;
  if (best_d <= tau) {
    out.outcome = Outcome::detected;
    out.label = best->label;
  } else {
    out.reason = NewObjectReason::distance_exceeds_tau;
  }
  return out;
}

/// Gated search for one probe: Index1 lookup by (shape, window); a miss is
/// a new object with no further work. `describe` runs only after a hit.
template <typename Describe>
SearchOutcome search_gated(const GlobalIndex& index, const BlobProbe& probe,
                           const DetectConfig& cfg, Describe&& describe) {
  const auto candidates = index.candidate_clusters(probe.shape, probe.window.index, cfg.slack);
  if (candidates.empty()) {
    SearchOutcome out;
    out.reason = index.has_shape(probe.shape) ? NewObjectReason::no_scale_cluster
                                              : NewObjectReason::no_shape_cluster;
    return out;
  }
  const FeatureVector& fv = describe();
  return match_candidates(index, candidates, fv, cfg);
}

struct DetectOptions {
  bool exhaustive = false;
  unsigned threads = 1;
  StageCounters* counters = nullptr;
};

inline DetectionResult detect_blob(ObjectBlob blob, std::size_t ordinal, const GlobalIndex& index,
                                   const Config& cfg, const DetectOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const BBox bbox = blob.bbox();
  const BlobProbe probe = probe_blob(std::move(blob), ordinal, cfg, cfg.scale.extensible, opts.counters);

  std::optional<BlobDescriptor> desc;
  auto describe = [&]() -> const FeatureVector& {
    desc = describe_blob(probe, cfg, opts.counters);
    return desc->features;
  };
  const SearchOutcome s = opts.exhaustive ? search_exhaustive(index, describe(), cfg.detect.tau)
                                          : search_gated(index, probe, cfg.detect, describe);

  DetectionResult r;
  r.blob = ordinal;
  r.outcome = s.outcome;
  r.label = s.label;
  r.distance = s.distance;
  r.reason = s.reason;
  r.shape = probe.shape;
  r.window = probe.window;
  r.clusters_visited = s.clusters_visited;
  r.members_compared = s.members_compared;
  if (desc) r.keypoints = desc->keypoints;
  r.bbox = bbox;
  r.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(
                  std::chrono::steady_clock::now() - start)
                  .count();
  return r;
}

/// Testing algorithm over a whole scene. Blobs are independent; with
/// threads > 1 they are processed concurrently against the shared,
/// read-only index. Results keep segmentation order.
inline std::vector<DetectionResult> detect_scene(const GrayImage& img, const GlobalIndex& index,
                                                 const Config& cfg, const DetectOptions& opts = {}) {
  auto blobs = preprocess_scene(img, cfg.preprocess);
  std::vector<DetectionResult> results(blobs.size());
  const unsigned n_threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(blobs.size())));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < blobs.size(); ++i)
      results[i] = detect_blob(std::move(blobs[i]), i, index, cfg, opts);
    return results;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < blobs.size(); i = next++)
          results[i] = detect_blob(std::move(blobs[i]), i, index, cfg, opts);
      });
  }
  return results;
}

inline std::vector<DetectionResult> detect_exhaustive(const GrayImage& img, const GlobalIndex& index,
                                                      const Config& cfg, DetectOptions opts = {}) {
  opts.exhaustive = true;
  return detect_scene(img, index, cfg, opts);
}

// ---------------------------------------------------------------------------
// Reporting

inline nlohmann::json to_json(const DetectionResult& r, bool with_timing = true) {
  nlohmann::json j = {
      {"blob", r.blob},
      {"outcome", r.outcome == Outcome::detected ? "Detected" : "NewObject"},
      {"shape", shape_name(r.shape)},
      {"window", r.window.index},
      {"window_side", r.window.side},
      {"clusters_visited", r.clusters_visited},
      {"members_compared", r.members_compared},
      {"bbox", {r.bbox.x0, r.bbox.y0, r.bbox.w, r.bbox.h}},
  };
  if (r.outcome == Outcome::detected) {
    j["label"] = r.label;
    j["distance"] = r.distance;
  } else {
    j["reason"] = reason_name(r.reason);
    if (r.reason == NewObjectReason::distance_exceeds_tau) j["distance"] = r.distance;
  }
  if (r.keypoints)
    j["keypoints"] = {{"count", r.keypoints->count},
                      {"mean_sigma", r.keypoints->mean_sigma},
                      {"mean_response", r.keypoints->mean_abs_response}};
  if (with_timing) j["elapsed"] = r.elapsed;
  return j;
}

// ---------------------------------------------------------------------------
// Manifests

/// One training scene: the image path (first line) followed by one label per
/// blob in segmentation order, i.e. ascending bbox (y0, x0).
struct Manifest {
  std::filesystem::path image;
  std::vector<std::string> labels;
};

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

/// Non-empty, non-comment lines of a list file.
inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    line = trim(line);
    if (!line.empty() && line.front() != '#') lines.push_back(line);
  }
  return lines;
}

inline std::filesystem::path resolve_relative(const std::filesystem::path& base_file,
                                              const std::filesystem::path& p) {
  return p.is_absolute() ? p : base_file.parent_path() / p;
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  if (lines.empty()) throw FormatError("manifest " + path.string() + " has no image line");
  Manifest m;
  m.image = resolve_relative(path, lines.front());
  m.labels.assign(lines.begin() + 1, lines.end());
  return m;
}

inline void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << m.image.string() << '\n';
  for (const auto& l : m.labels) out << l << '\n';
}

}  // namespace shape_gate
