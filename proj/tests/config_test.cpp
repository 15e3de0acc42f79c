#include <gtest/gtest.h>

#include <sstream>

#include "shape_gate/config.hpp"

using namespace shape_gate;

namespace {

Config parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
  const Config c = parse("");
  EXPECT_TRUE(std::holds_alternative<OtsuThreshold>(c.preprocess.threshold));
  EXPECT_EQ(c.preprocess.denoise_radius, 1);
  EXPECT_EQ(c.preprocess.segment.connectivity, Connectivity::eight);
  EXPECT_EQ(c.preprocess.segment.min_area, 8u);
  EXPECT_EQ(c.shape, ShapeThresholds{});
  EXPECT_EQ(c.scale.base, 4);
  EXPECT_EQ(c.scale.count, 5);
  EXPECT_TRUE(c.scale.extensible);
  EXPECT_EQ(c.dog.params.octaves, 4);
  EXPECT_EQ(c.dog.params.scales, 2);
  EXPECT_DOUBLE_EQ(c.dog.params.sigma0, 1.6);
  EXPECT_DOUBLE_EQ(c.dog.contrast_threshold, 0.015);
  EXPECT_FALSE(c.dog.append_stats_to_features);
  EXPECT_DOUBLE_EQ(c.detect.tau, 0.25);
  EXPECT_EQ(c.detect.slack, 0);
  EXPECT_FALSE(c.detect.exact_min);
  EXPECT_FALSE(c.detect.centroid_only);
}

TEST(Config, ReadsEverySection) {
  const Config c = parse(R"(# shape-gate settings
[preprocess]
threshold = 100
denoise_radius = 2
connectivity = 4
min_area = 20

[shape]
line_aspect_max = 0.2   # a bit more permissive
circle_circularity_min = 0.8

[scale]
base = 8
count = 4
extensible = false

[dog]
octaves = 3
scales = 3
sigma0 = 1.2
contrast_threshold = 0.02
append_stats_to_features = true

[detect]
tau = 0.5
slack = 1
exact_min = true
centroid_only = "false"
)");
  ASSERT_TRUE(std::holds_alternative<FixedThreshold>(c.preprocess.threshold));
  EXPECT_EQ(std::get<FixedThreshold>(c.preprocess.threshold).level, 100);
  EXPECT_EQ(c.preprocess.denoise_radius, 2);
  EXPECT_EQ(c.preprocess.segment.connectivity, Connectivity::four);
  EXPECT_EQ(c.preprocess.segment.min_area, 20u);
  EXPECT_DOUBLE_EQ(c.shape.line_aspect_max, 0.2);
  EXPECT_DOUBLE_EQ(c.shape.circle_circularity_min, 0.8);
  EXPECT_EQ(c.scale.base, 8);
  EXPECT_EQ(c.scale.count, 4);
  EXPECT_FALSE(c.scale.extensible);
  EXPECT_EQ(c.dog.params.octaves, 3);
  EXPECT_EQ(c.dog.params.scales, 3);
  EXPECT_DOUBLE_EQ(c.dog.params.sigma0, 1.2);
  EXPECT_TRUE(c.dog.append_stats_to_features);
  EXPECT_DOUBLE_EQ(c.detect.tau, 0.5);
  EXPECT_EQ(c.detect.slack, 1);
  EXPECT_TRUE(c.detect.exact_min);
  EXPECT_FALSE(c.detect.centroid_only);
}

TEST(Config, OtsuKeywordAndBadValues) {
  EXPECT_TRUE(std::holds_alternative<OtsuThreshold>(parse("[preprocess]\nthreshold = otsu\n").preprocess.threshold));
  EXPECT_THROW(parse("[detect]\ntau = fast\n"), Error);
  EXPECT_THROW(parse("[detect]\ntau = 0\n"), Error);
  EXPECT_THROW(parse("[detect]\nslack = -1\n"), Error);
  EXPECT_THROW(parse("[preprocess]\nconnectivity = 6\n"), Error);
  EXPECT_THROW(parse("[scale]\nbase = 0\n"), Error);
  EXPECT_THROW(parse("[scale]\nextensible = maybe\n"), Error);
  EXPECT_THROW(parse("[scale\nbase = 4\n"), Error);
}

TEST(Config, FingerprintTracksStoredMeaningOnly) {
  const Config base;
  const auto fp = config_fingerprint(base);
  EXPECT_EQ(fp.size(), 16u);
  EXPECT_EQ(fp, config_fingerprint(Config{}));

  Config tau = base;
  tau.detect.tau = 0.9;
  EXPECT_EQ(config_fingerprint(tau), fp);  // query-time knob

  Config shape = base;
  shape.shape.circle_solidity_min = 0.91;
  EXPECT_NE(config_fingerprint(shape), fp);

  Config scale = base;
  scale.scale.count = 6;
  EXPECT_NE(config_fingerprint(scale), fp);

  Config stats = base;
  stats.dog.append_stats_to_features = true;
  EXPECT_NE(config_fingerprint(stats), fp);
}
