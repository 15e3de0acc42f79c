#include <gtest/gtest.h>

#include <cmath>

#include "shape_gate/scale_windows.hpp"

using namespace shape_gate;

namespace {

std::vector<int> sides(const std::vector<ScaleWindow>& ws) {
  std::vector<int> out;
  for (const auto& w : ws) out.push_back(w.side);
  return out;
}

// Walk the doubling sequence from the first window until one fits.
ScaleWindow linear_scan(int w, int h, int base, int count, bool extensible) {
  const int longest = std::max(w, h);
  int side = base;
  for (int i = 1;; ++i, side *= 2) {
    if (side >= longest) return {i, side};
    if (i == count && !extensible) return {i, side};
  }
}

}  // namespace

TEST(GenerateWindows, DefaultFamilyIsFiveDoublings) {
  EXPECT_EQ(sides(generate_windows(4, 5)), (std::vector<int>{4, 8, 16, 32, 64}));
  EXPECT_EQ(sides(generate_windows(4, 1)), (std::vector<int>{4}));
  EXPECT_EQ(sides(generate_windows(3, 3)), (std::vector<int>{3, 6, 12}));
  const auto ws = generate_windows(4, 5);
  for (std::size_t i = 0; i < ws.size(); ++i) EXPECT_EQ(ws[i].index, static_cast<int>(i) + 1);
}

TEST(GenerateWindows, RejectsInvalidParameters) {
  EXPECT_THROW(generate_windows(0, 5), Error);
  EXPECT_THROW(generate_windows(4, 0), Error);
}

TEST(MapToWindow, SmallObjectsLandInTheirWindow) {
  const WindowFamily fam;
  EXPECT_EQ(map_to_window(3, 4, fam, true).side, 4);
  EXPECT_EQ(map_to_window(15, 16, fam, true).side, 16);
  EXPECT_EQ(map_to_window(17, 16, fam, true).side, 32);
}

TEST(MapToWindow, ExtendsOrClampsBeyondTheLargestWindow) {
  const WindowFamily fam;
  EXPECT_EQ(map_to_window(70, 30, fam, true), (ScaleWindow{6, 128}));
  EXPECT_EQ(map_to_window(70, 30, fam, false), (ScaleWindow{5, 64}));
  EXPECT_EQ(map_to_window(1000, 1, fam, true), (ScaleWindow{9, 1024}));
}

TEST(MapToWindow, BinarySearchMatchesLinearScanEverywhere) {
  for (int base : {4, 3}) {
    const WindowFamily fam(base, 5);
    for (bool ext : {true, false})
      for (int w = 1; w <= 256; ++w)
        for (int h = 1; h <= 256; ++h)
          ASSERT_EQ(map_to_window(w, h, fam, ext), linear_scan(w, h, base, 5, ext))
              << w << "x" << h << " base " << base << " ext " << ext;
  }
}

TEST(MapToWindow, MonotoneInBothSides) {
  const WindowFamily fam;
  for (int w = 1; w < 200; ++w)
    for (int h = 1; h < 200; ++h) {
      const int here = map_to_window(w, h, fam, true).side;
      EXPECT_LE(here, map_to_window(w + 1, h, fam, true).side);
      EXPECT_LE(here, map_to_window(w, h + 1, fam, true).side);
    }
}

TEST(MapToWindow, ComparisonCountIsLogarithmic) {
  for (int count : {1, 2, 5, 8, 13}) {
    const WindowFamily fam(4, count);
    const int bound = static_cast<int>(std::ceil(std::log2(count))) + 1;
    for (int longest = 1; longest <= 4 << count; ++longest) {
      int cmp = 0;
      map_to_window(longest, 1, fam, true, &cmp);
      EXPECT_LE(cmp, bound) << "count " << count << " longest " << longest;
    }
  }
}

TEST(WindowFamily, ExtensionReturnsNewFamily) {
  const WindowFamily fam;
  const auto big = fam.extended_to(300);
  EXPECT_EQ(fam.count(), 5);
  EXPECT_EQ(big.count(), 8);
  EXPECT_EQ(big.largest().side, 512);
  EXPECT_EQ(fam.window(7).side, 256);
}

TEST(MapToWindow, RejectsEmptyBoxes) {
  EXPECT_THROW(map_to_window(0, 3, WindowFamily{}, true), Error);
}
