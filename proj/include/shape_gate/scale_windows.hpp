#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "shape_gate/error.hpp"

namespace shape_gate {

/// Square scale window. Index is 1-based; side(i + 1) = 2 * side(i).
struct ScaleWindow {
  int index = 1;
  int side = 4;
  friend bool operator==(const ScaleWindow&, const ScaleWindow&) = default;
};

/// Immutable doubling family of windows.
class WindowFamily {
 public:
  WindowFamily(int base = 4, int count = 5) : base_(base) {
    if (base < 1 || count < 1) throw Error("window family needs base >= 1 and count >= 1");
    windows_.reserve(count);
    std::int64_t side = base;
    for (int i = 1; i <= count; ++i, side *= 2) {
      if (side > (1 << 30)) throw Error("window family overflows");
      windows_.push_back({i, static_cast<int>(side)});
    }
  }

  int base() const noexcept { return base_; }
  int count() const noexcept { return static_cast<int>(windows_.size()); }
  const std::vector<ScaleWindow>& windows() const noexcept { return windows_; }
  const ScaleWindow& largest() const noexcept { return windows_.back(); }

  /// Window `index` of the (logically unbounded) doubling sequence.
  ScaleWindow window(int index) const {
    if (index < 1) throw Error("window index must be >= 1");
    std::int64_t side = base_;
    for (int i = 1; i < index; ++i) {
      side *= 2;
      if (side > (1 << 30)) throw Error("window index overflows");
    }
    return {index, static_cast<int>(side)};
  }

  /// A new family extended by doubling until its largest side reaches `side`.
  WindowFamily extended_to(int side) const {
    int n = count();
    while (window(n).side < side) ++n;
    return WindowFamily(base_, n);
  }

  friend bool operator==(const WindowFamily&, const WindowFamily&) = default;

 private:
  int base_;
  std::vector<ScaleWindow> windows_;
};

inline std::vector<ScaleWindow> generate_windows(int base, int count) {
  return WindowFamily(base, count).windows();
}

/// Smallest window whose side holds max(w, h), found by binary search over
/// the family. Beyond the largest window the family is logically doubled
/// when `extensible`, otherwise the result clamps to the largest window.
/// `comparisons`, when given, accumulates the side comparisons made.
inline ScaleWindow map_to_window(int w, int h, const WindowFamily& family, bool extensible,
                                 int* comparisons = nullptr) {
  if (w < 1 || h < 1) throw Error("map_to_window: bbox sides must be >= 1");
  const int longest = std::max(w, h);
  const auto& ws = family.windows();

  std::size_t lo = 0, hi = ws.size();
  int cmp = 0;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    ++cmp;
    if (ws[mid].side >= longest)
      hi = mid;
    else
      lo = mid + 1;
  }
  if (comparisons) *comparisons += cmp;
  if (lo < ws.size()) return ws[lo];
  if (!extensible) return ws.back();

  // index of the smallest doubled side >= longest, by arithmetic
  std::int64_t side = ws.back().side;
  int index = ws.back().index;
  while (side < longest) {
    side *= 2;
    ++index;
  }
  return {index, static_cast<int>(side)};
}

}  // namespace shape_gate
