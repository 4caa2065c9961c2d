/* Copyright 2026 The unetpipe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "unetpipe/curriculum.hpp"
#include "unetpipe/error.hpp"

namespace unetpipe {
namespace {

bool patch_has_foreground(const LabelVolume& labels, const Grid& origin, const Grid& size) {
  for (std::int64_t x = 0; x < size[0]; ++x) {
    for (std::int64_t y = 0; y < size[1]; ++y) {
      for (std::int64_t z = 0; z < size[2]; ++z) {
        if (labels.at(origin[0] + x, origin[1] + y, origin[2] + z)) return true;
      }
    }
  }
  return false;
}

double foreground_fraction(const LabelVolume& v) {
  std::int64_t fg = 0;
  for (auto l : v.data) fg += l != 0;
  return static_cast<double>(fg) / static_cast<double>(v.data.size());
}

LabelVolume random_labels(const Grid& shape, double density, std::mt19937_64& rng) {
  LabelVolume v(shape);
  std::bernoulli_distribution fg(density);
  for (auto& l : v.data) l = fg(rng);
  return v;
}

TEST(DefaultPlan, FullScheduleForLargeImages) {
  const auto plan = default_plan({192, 192, 192});
  EXPECT_FALSE(plan.clamped);
  EXPECT_TRUE(plan.warnings.empty());
  ASSERT_EQ(plan.stages.size(), 3u);
  const Grid patches[] = {{64, 64, 64}, {128, 128, 128}, {192, 192, 192}};
  const std::int64_t batches[] = {16, 4, 1};
  const std::int64_t epochs[] = {4800, 1200, 300};
  for (int i = 0; i < 3; ++i) {
    const auto& s = plan.stages[i];
    EXPECT_EQ(s.patch, patches[i]);
    EXPECT_EQ(s.batch, batches[i]);
    EXPECT_EQ(s.epochs, epochs[i]);
    EXPECT_EQ(s.learning_rate, 1e-3);
    EXPECT_EQ(s.optimizer, "rmsprop");
  }
  EXPECT_EQ(plan.stages[0].sampling, Sampling::kPositiveBiased);
  EXPECT_EQ(plan.stages[2].sampling, Sampling::kWholeImage);
}

TEST(DefaultPlan, SmallImageCollapsesToWholeImage) {
  const auto plan = default_plan({64, 64, 64});
  EXPECT_TRUE(plan.clamped);
  EXPECT_FALSE(plan.warnings.empty());
  ASSERT_EQ(plan.stages.size(), 1u);
  EXPECT_EQ(plan.stages[0].patch, (Grid{64, 64, 64}));
  EXPECT_EQ(plan.stages[0].batch, 1);
  EXPECT_EQ(plan.stages[0].epochs, 300);
}

TEST(DefaultPlan, MediumImageKeepsOnlyFittingPatches) {
  const auto plan = default_plan({100, 160, 140});
  EXPECT_TRUE(plan.clamped);
  ASSERT_EQ(plan.stages.size(), 2u);
  EXPECT_EQ(plan.stages[0].patch, (Grid{64, 64, 64}));
  EXPECT_EQ(plan.stages[1].patch, (Grid{100, 160, 140}));
}

TEST(DefaultPlan, EveryPlanIsMonotoneAndDeterministic) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> axis(1, 400);
  for (int i = 0; i < 500; ++i) {
    const Grid shape{axis(rng), axis(rng), axis(rng)};
    const auto plan = default_plan(shape);
    EXPECT_TRUE(is_monotone(plan));
    EXPECT_EQ(plan, default_plan(shape));
    EXPECT_EQ(plan.stages.back().patch, shape);
  }
  EXPECT_THROW(default_plan({0, 10, 10}), std::invalid_argument);
}

TEST(IsMonotone, RejectsShrinkingPatch) {
  auto plan = default_plan({192, 192, 192});
  std::swap(plan.stages[0], plan.stages[1]);
  EXPECT_FALSE(is_monotone(plan));
}

TEST(PlanJson, RoundTripsAndNamesUnknownKeys) {
  auto plan = default_plan({96, 200, 180});
  plan.stages[0].reset_optimizer = false;
  EXPECT_EQ(parse_plan(plan_to_json(plan)), plan);

  const std::string bad = R"({"whole_image": [8, 8, 8],
    "stages": [{"patch": [8, 8, 8], "batch": 1, "epochs": 1, "lr": 0.1, "momentum": 0.9}]})";
  try {
    parse_plan(bad);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("momentum"), std::string::npos);
  }
  EXPECT_THROW(parse_plan("{"), ValidationError);
}

TEST(QualifyingOrigins, MatchesBruteForce) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Grid shape{std::uniform_int_distribution<std::int64_t>(1, 9)(rng),
                     std::uniform_int_distribution<std::int64_t>(1, 9)(rng),
                     std::uniform_int_distribution<std::int64_t>(1, 9)(rng)};
    const auto labels = random_labels(shape, 0.02, rng);
    Grid size;
    for (int a = 0; a < 3; ++a) {
      size[a] = std::uniform_int_distribution<std::int64_t>(1, shape[a])(rng);
    }
    const auto q = qualifying_origins(labels, size);
    ASSERT_EQ(q.shape, (Grid{shape[0] - size[0] + 1, shape[1] - size[1] + 1,
                             shape[2] - size[2] + 1}));
    for (std::int64_t x = 0; x < q.shape[0]; ++x) {
      for (std::int64_t y = 0; y < q.shape[1]; ++y) {
        for (std::int64_t z = 0; z < q.shape[2]; ++z) {
          EXPECT_EQ(q.at(x, y, z) != 0, patch_has_foreground(labels, {x, y, z}, size));
        }
      }
    }
  }
}

TEST(SamplePositivePatch, AllForegroundGivesFullPatches) {
  const LabelVolume labels({10, 10, 10}, 1);
  const ImageVolume image({10, 10, 10}, 0.5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = sample_positive_patch(image, labels, {4, 4, 4}, seed);
    EXPECT_TRUE(s.positive);
    EXPECT_EQ(foreground_fraction(s.labels), 1.0);
  }
}

TEST(SamplePositivePatch, SingleVoxelOriginsCoverIt) {
  const Grid p{5, 2, 4};
  const auto labels = make_blob_labels({8, 8, 8}, p, {1, 1, 1});
  const ImageVolume image({8, 8, 8});
  std::map<Grid, int> hits;
  for (std::uint64_t seed = 0; seed < 8000; ++seed) {
    const auto s = sample_positive_patch(image, labels, {2, 2, 2}, seed);
    ASSERT_TRUE(s.positive);
    for (int a = 0; a < 3; ++a) {
      EXPECT_LE(s.origin[a], p[a]);
      EXPECT_GE(s.origin[a], p[a] - 1);
    }
    ++hits[s.origin];
  }
  // Exactly the 8 origins found by enumeration, each drawn about equally often.
  std::size_t expected = 0;
  for (std::int64_t x = 0; x < 7; ++x) {
    for (std::int64_t y = 0; y < 7; ++y) {
      for (std::int64_t z = 0; z < 7; ++z) {
        if (patch_has_foreground(labels, {x, y, z}, {2, 2, 2})) {
          ++expected;
          const int n = hits[Grid{x, y, z}];
          EXPECT_GT(n, 850);
          EXPECT_LT(n, 1150);
        }
      }
    }
  }
  EXPECT_EQ(expected, 8u);
  EXPECT_EQ(hits.size(), 8u);
}

TEST(SamplePositivePatch, EmptyLabelsFallBackToUniformNegative) {
  const LabelVolume labels({6, 6, 6});
  const ImageVolume image({6, 6, 6});
  std::map<Grid, int> hits;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto s = sample_positive_patch(image, labels, {3, 3, 3}, seed);
    EXPECT_FALSE(s.positive);
    ++hits[s.origin];
  }
  EXPECT_EQ(hits.size(), 64u);
}

TEST(SamplePositivePatch, CropsImageAtOriginAndIsDeterministic) {
  std::mt19937_64 rng(6);
  ImageVolume image({9, 7, 8});
  std::normal_distribution<double> normal;
  for (auto& v : image.data) v = normal(rng);
  const auto labels = random_labels(image.shape, 0.01, rng);
  const auto a = sample_positive_patch(image, labels, {3, 2, 4}, 77);
  const auto b = sample_positive_patch(image, labels, {3, 2, 4}, 77);
  EXPECT_EQ(a.origin, b.origin);
  EXPECT_EQ(a.patch, image.crop(a.origin, {3, 2, 4}));
  EXPECT_EQ(a.labels, labels.crop(a.origin, {3, 2, 4}));
}

TEST(SamplePositivePatch, RejectsBadShapes) {
  const LabelVolume labels({4, 4, 4});
  EXPECT_THROW(sample_positive_patch(ImageVolume({4, 4, 4}), labels, {5, 1, 1}, 0),
               std::invalid_argument);
  EXPECT_THROW(sample_positive_patch(ImageVolume({4, 4, 3}), labels, {1, 1, 1}, 0),
               std::invalid_argument);
  EXPECT_THROW(sample_positive_patch(ImageVolume({4, 4, 4}), labels, {0, 1, 1}, 0),
               std::invalid_argument);
}

TEST(Imbalance, DegenerateVolumes) {
  EXPECT_EQ(imbalance_ratio(LabelVolume({8, 8, 8}), {4, 4, 4}, 50, 1), 0.0);
  EXPECT_EQ(imbalance_ratio(LabelVolume({8, 8, 8}, 1), {4, 4, 4}, 50, 1), 1.0);
  EXPECT_THROW(imbalance_ratio(LabelVolume({8, 8, 8}), {4, 4, 4}, 0, 1), std::invalid_argument);
}

TEST(Imbalance, SmallPatchesAreLessImbalanced) {
  const auto labels = make_blob_labels({32, 32, 32}, {10, 10, 10}, {4, 4, 4});
  const double small = expected_foreground_fraction(labels, {8, 8, 8});
  const double whole = expected_foreground_fraction(labels, {32, 32, 32});
  EXPECT_GT(small, whole);
  EXPECT_DOUBLE_EQ(whole, 64.0 / 32768.0);
  EXPECT_NEAR(imbalance_ratio(labels, {8, 8, 8}, 4000, 2), small, 0.01);
}

TEST(Imbalance, ExactExpectationMatchesEnumeration) {
  std::mt19937_64 rng(9);
  const auto labels = random_labels({7, 6, 5}, 0.05, rng);
  const Grid size{3, 2, 2};
  double total = 0.0;
  int count = 0;
  for (std::int64_t x = 0; x + size[0] <= 7; ++x) {
    for (std::int64_t y = 0; y + size[1] <= 6; ++y) {
      for (std::int64_t z = 0; z + size[2] <= 5; ++z) {
        const auto patch = labels.crop({x, y, z}, size);
        if (foreground_fraction(patch) > 0) {
          total += foreground_fraction(patch);
          ++count;
        }
      }
    }
  }
  ASSERT_GT(count, 0);
  EXPECT_NEAR(expected_foreground_fraction(labels, size), total / count, 1e-12);
}

TEST(Imbalance, NonIncreasingInPatchSizeForLatticeBlob) {
  const auto labels = make_blob_labels({32, 32, 32}, {8, 8, 8}, {8, 8, 8});
  double prev = 2.0;
  for (std::int64_t s = 1; s <= 32; ++s) {
    const double f = expected_foreground_fraction(labels, {s, s, s});
    EXPECT_LE(f, prev) << "patch " << s;
    prev = f;
  }
}

TEST(Imbalance, VolumeBorderCanReverseTheTrend) {
  // Large patches around a centred blob have few legal origins, all of which
  // keep the blob well inside the patch.
  const auto labels = make_blob_labels({32, 32, 32}, {12, 12, 12}, {8, 8, 8});
  const double at13 = expected_foreground_fraction(labels, {13, 13, 13});
  const double at16 = expected_foreground_fraction(labels, {16, 16, 16});
  EXPECT_NEAR(at13, 0.4 * 0.4 * 0.4, 1e-12);
  EXPECT_NEAR(at16, std::pow(116.0 / 17.0 / 16.0, 3), 1e-12);
  EXPECT_GT(at16, at13);
}

}  // namespace
}  // namespace unetpipe
