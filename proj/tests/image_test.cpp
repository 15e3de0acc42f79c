#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "shape_gate/image.hpp"

using namespace shape_gate;

namespace {

GrayImage random_gray(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  GrayImage img(w, h);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(u(rng));
  return img;
}

}  // namespace

TEST(Raster, RejectsEmptyDimensionsAndMismatchedData) {
  EXPECT_THROW(GrayImage(0, 3), Error);
  EXPECT_THROW(GrayImage(3, 3, std::vector<std::uint8_t>(8)), Error);
  GrayImage ok(3, 2, std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(ok.at(2, 1), 6);
  EXPECT_EQ(ok.row(1)[0], 4);
}

TEST(Pgm, BinaryRoundTripIsBitExact) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GrayImage img = random_gray(1 + static_cast<int>(seed * 7 % 40), 1 + static_cast<int>(seed * 3 % 25), seed);
    std::stringstream buf;
    write_pgm(buf, img, true);
    EXPECT_EQ(read_pgm(buf), img);
  }
}

TEST(Pgm, AsciiRoundTripIsBitExact) {
  const GrayImage img = random_gray(17, 9, 42);
  std::stringstream buf;
  write_pgm(buf, img, false);
  EXPECT_EQ(read_pgm(buf), img);
}

TEST(Pgm, HeaderCommentsAreSkipped) {
  std::stringstream in("P2\n# made by hand\n3 1\n# another\n255\n0 128 255\n");
  const GrayImage img = read_pgm(in);
  ASSERT_EQ(img.width(), 3);
  EXPECT_EQ(img.at(1, 0), 128);
  EXPECT_EQ(img.at(2, 0), 255);
}

TEST(Pgm, MalformedInputsThrow) {
  auto parse = [](const std::string& s) {
    std::stringstream in(s);
    return read_pgm(in);
  };
  EXPECT_THROW(parse("P6\n1 1\n255\n\0\0\0"), FormatError);
  EXPECT_THROW(parse("P2\n2 2\n65535\n0 0 0 0\n"), FormatError);
  EXPECT_THROW(parse("P2\n2 2\n255\n0 0 0\n"), FormatError);
  EXPECT_THROW(parse("P5\n4 4\n255\nabc"), FormatError);
  EXPECT_THROW(parse("P2\n1 1\n255\n300\n"), FormatError);
  EXPECT_THROW(parse("P2\n0 4\n255\n"), FormatError);
}

TEST(Pgm, ToRealScalesToUnitInterval) {
  GrayImage img(2, 1, std::vector<std::uint8_t>{0, 255});
  const RealImage r = to_real(img);
  EXPECT_DOUBLE_EQ(r.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(r.at(1, 0), 1.0);
}
