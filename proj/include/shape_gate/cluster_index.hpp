#pragma once

#include <algorithm>
#include <atomic>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shape_gate/features.hpp"

namespace shape_gate {

struct ClusterKey {
  ShapeClass shape = ShapeClass::blob;
  int window = 1;  // scale window index

  friend bool operator==(const ClusterKey&, const ClusterKey&) = default;
  friend auto operator<=>(const ClusterKey& a, const ClusterKey& b) {
    if (auto c = shape_code(a.shape) <=> shape_code(b.shape); c != 0) return c;
    return a.window <=> b.window;
  }
};

struct Member {
  std::string label;
  FeatureVector features;
  std::string source;  // scene file + blob ordinal
  friend bool operator==(const Member&, const Member&) = default;
};

struct Cluster {
  int id = 0;
  ClusterKey key;
  int window_side = 0;
  std::vector<Member> members;
  FeatureVector mean;

  std::size_t count() const noexcept { return members.size(); }
  friend bool operator==(const Cluster&, const Cluster&) = default;
};

/// Member-comparison tally for benchmark accounting.
class ComparisonCounter {
 public:
  ComparisonCounter() = default;
  ComparisonCounter(const ComparisonCounter& o) : value_(o.value()) {}
  ComparisonCounter& operator=(const ComparisonCounter& o) {
    value_.store(o.value(), std::memory_order_relaxed);
    return *this;
  }

  void add(std::uint64_t n) noexcept { value_.fetch_add(n, std::memory_order_relaxed); }
  std::uint64_t value() const noexcept { return value_.load(std::memory_order_relaxed); }
  void reset() noexcept { value_.store(0, std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> value_{0};
};

struct NearestMatch {
  const Member* member = nullptr;
  double distance = 0;
};

/// Closest member by Euclidean distance; the earliest-inserted member wins
/// ties. Adds the cluster size to `counter`.
inline NearestMatch nearest_member(const Cluster& cluster, const FeatureVector& fv,
                                   ComparisonCounter* counter = nullptr) {
  NearestMatch best;
  double best_sq = std::numeric_limits<double>::infinity();
  for (const auto& m : cluster.members) {
    const double d = squared_distance(m.features, fv);
    if (d < best_sq) {
      best_sq = d;
      best.member = &m;
    }
  }
  if (counter) counter->add(cluster.count());
  best.distance = std::sqrt(best_sq);
  return best;
}

/// Stable sort by distance from fv to each cluster mean.
inline std::vector<const Cluster*> rank_by_mean(std::vector<const Cluster*> clusters,
                                                const FeatureVector& fv) {
  if (clusters.size() < 2) return clusters;
  std::vector<std::pair<double, const Cluster*>> keyed;
  keyed.reserve(clusters.size());
  for (const auto* c : clusters) keyed.emplace_back(squared_distance(c->mean, fv), c);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < keyed.size(); ++i) clusters[i] = keyed[i].second;
  return clusters;
}

/// Shape x scale clusters plus the index that locates them: by_key maps a
/// (shape, window) key to its cluster id, by_shape lists the windows present
/// for each shape. Cluster ids are 1-based positions in clusters().
///
/// Not internally synchronized: any number of concurrent readers, or one
/// writer. The comparison counter is the only member readers mutate.
class GlobalIndex {
 public:
  struct InsertResult {
    int id = 0;
    bool created = false;
  };

  InsertResult insert(const std::string& label, ClusterKey key, int window_side,
                      const FeatureVector& fv, std::string source = {}) {
    if (label.empty()) throw Error("member label must be nonempty");
    InsertResult result;
    if (auto it = by_key_.find(key); it != by_key_.end()) {
      result.id = it->second;
    } else {
      if (!clusters_.empty() && clusters_.front().mean.size() != fv.size())
        throw Error("feature dimension differs from the rest of the index");
      result.id = static_cast<int>(clusters_.size()) + 1;
      result.created = true;
      clusters_.push_back({result.id, key, window_side, {}, fv});
      by_key_.emplace(key, result.id);
      auto& windows = by_shape_[key.shape];
      windows.insert(std::upper_bound(windows.begin(), windows.end(), key.window), key.window);
    }
    Cluster& c = clusters_[result.id - 1];
    if (c.mean.size() != fv.size()) throw Error("feature dimension differs from cluster mean");
    c.members.push_back({label, fv, std::move(source)});
    const double n = static_cast<double>(c.members.size());
    for (std::size_t i = 0; i < fv.size(); ++i) c.mean[i] += (fv[i] - c.mean[i]) / n;
    return result;
  }

  std::optional<int> lookup(ClusterKey key) const {
    if (auto it = by_key_.find(key); it != by_key_.end()) return it->second;
    return std::nullopt;
  }

  bool has_shape(ShapeClass shape) const { return by_shape_.contains(shape); }

  /// Clusters of `shape` whose window lies within `slack` of `window`,
  /// nearest window first, ties by ascending window.
  std::vector<int> candidate_clusters(ShapeClass shape, int window, int slack = 0) const {
    std::vector<int> out;
    if (slack == 0) {
      if (auto id = lookup({shape, window})) out.push_back(*id);
      return out;
    }
    auto it = by_shape_.find(shape);
    if (it == by_shape_.end()) return out;
    std::vector<int> windows;
    for (int w : it->second)
      if (std::abs(w - window) <= slack) windows.push_back(w);
    std::stable_sort(windows.begin(), windows.end(), [window](int a, int b) {
      return std::abs(a - window) < std::abs(b - window);
    });
    for (int w : windows) out.push_back(by_key_.at({shape, w}));
    return out;
  }

  const Cluster& cluster(int id) const { return clusters_.at(static_cast<std::size_t>(id) - 1); }
  const std::vector<Cluster>& clusters() const noexcept { return clusters_; }
  const std::map<ClusterKey, int>& by_key() const noexcept { return by_key_; }
  const std::map<ShapeClass, std::vector<int>>& by_shape() const noexcept { return by_shape_; }
  bool empty() const noexcept { return clusters_.empty(); }

  std::size_t member_count() const noexcept {
    std::size_t n = 0;
    for (const auto& c : clusters_) n += c.count();
    return n;
  }

  ComparisonCounter& comparisons() const noexcept { return comparisons_; }

  /// Checks that by_key and by_shape describe exactly the stored clusters.
  bool consistent(std::string* why = nullptr) const {
    auto fail = [&](std::string msg) {
      if (why) *why = std::move(msg);
      return false;
    };
    if (by_key_.size() != clusters_.size()) return fail("by_key size differs from cluster count");
    std::size_t listed = 0;
    for (const auto& [shape, windows] : by_shape_) {
      if (windows.empty()) return fail("empty window list");
      for (std::size_t i = 0; i < windows.size(); ++i) {
        if (i && windows[i - 1] >= windows[i]) return fail("window list not strictly ascending");
        auto it = by_key_.find({shape, windows[i]});
        if (it == by_key_.end()) return fail("by_shape entry missing from by_key");
      }
      listed += windows.size();
    }
    if (listed != by_key_.size()) return fail("by_shape and by_key disagree");
    for (std::size_t i = 0; i < clusters_.size(); ++i) {
      const Cluster& c = clusters_[i];
      if (c.id != static_cast<int>(i) + 1) return fail("cluster ids not sequential");
      if (c.members.empty()) return fail("empty cluster");
      auto it = by_key_.find(c.key);
      if (it == by_key_.end() || it->second != c.id) return fail("cluster key not indexed");
    }
    return true;
  }

  /// Rebuilds both maps around stored clusters (ids must be 1..n in order).
  static GlobalIndex from_clusters(std::vector<Cluster> clusters) {
    GlobalIndex idx;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      const Cluster& c = clusters[i];
      if (c.id != static_cast<int>(i) + 1) throw Error("cluster ids must be 1..n in order");
      if (c.members.empty()) throw Error("cluster without members");
      if (!idx.by_key_.emplace(c.key, c.id).second) throw Error("duplicate cluster key");
      auto& windows = idx.by_shape_[c.key.shape];
      windows.insert(std::upper_bound(windows.begin(), windows.end(), c.key.window), c.key.window);
    }
    idx.clusters_ = std::move(clusters);
    return idx;
  }

  friend bool operator==(const GlobalIndex& a, const GlobalIndex& b) {
    return a.clusters_ == b.clusters_ && a.by_key_ == b.by_key_ && a.by_shape_ == b.by_shape_;
  }

 private:
  std::vector<Cluster> clusters_;
  std::map<ClusterKey, int> by_key_;
  std::map<ShapeClass, std::vector<int>> by_shape_;
  mutable ComparisonCounter comparisons_;
};

}  // namespace shape_gate
