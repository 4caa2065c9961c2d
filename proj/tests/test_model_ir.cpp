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

#include <map>
#include <random>

#include "oracle_constants.hpp"
#include "test_support.hpp"
#include "unetpipe/error.hpp"
#include "unetpipe/model_ir.hpp"

namespace unetpipe {
namespace {

std::vector<std::int64_t> encoder_widths(const ModelGraph& g) {
  std::vector<std::int64_t> widths;
  for (const auto& l : g.layers) {
    if (l.kind == LayerKind::kAffine && l.block.front() == 'e' && l.name.ends_with("affine2")) {
      widths.push_back(l.channels);
    }
  }
  return widths;
}

int count_kind(const ModelGraph& g, LayerKind kind) {
  int n = 0;
  for (const auto& l : g.layers) n += l.kind == kind;
  return n;
}

TEST(BuildUnet, FilterWidthsDoublePerEncoderBlock) {
  UNetConfig c;
  c.base_filters = 32;
  const auto g = build_unet(c);
  EXPECT_EQ(encoder_widths(g), (std::vector<std::int64_t>{32, 64, 128, 256, 512}));
  EXPECT_EQ(c.filters(5), 512);
}

TEST(BuildUnet, SmallestLegalUnetHasOneConcat) {
  UNetConfig c;
  c.base_filters = 1;
  c.encoder_blocks = 2;
  c.input_shape = {1, 4, 4, 4};
  const auto g = build_unet(c);
  EXPECT_EQ(count_kind(g, LayerKind::kConcat), 1);
  EXPECT_TRUE(validate_graph(g).ok());
}

TEST(BuildUnet, ConcatInputsPairEncoderWithUpstreamDecoder) {
  const auto g = build_unet(UNetConfig{});
  int concats = 0;
  for (const auto& l : g.layers) {
    if (l.kind != LayerKind::kConcat) continue;
    ++concats;
    ASSERT_EQ(l.inputs.size(), 2u);
    const auto& skip = g.layer(l.inputs[0]);
    const auto& up = g.layer(l.inputs[1]);
    EXPECT_EQ(skip.block, "e" + l.block.substr(1));
    EXPECT_EQ(up.kind, LayerKind::kUpsample2x);
    EXPECT_EQ(up.block, "d" + std::to_string(std::stoi(l.block.substr(1)) + 1));
    EXPECT_EQ(skip.grid, up.grid);
    EXPECT_EQ(l.channels, skip.channels + up.channels);
  }
  EXPECT_EQ(concats, 4);
}

TEST(BuildUnet, DecoderMirrorsEncoderResolution) {
  const auto g = build_unet(UNetConfig{});
  std::map<std::string, Grid> grid;
  for (const auto& l : g.layers) {
    if (l.kind == LayerKind::kAffine) grid[l.block] = l.grid;
  }
  for (int b = 1; b <= 5; ++b) {
    EXPECT_EQ(grid["e" + std::to_string(b)], grid["d" + std::to_string(b)]) << b;
  }
  EXPECT_EQ(grid["e5"], (Grid{1, 1, 1}));
  EXPECT_EQ(g.layer(g.output_id).grid, (Grid{16, 16, 16}));
}

TEST(BuildUnet, RejectsBadConfigurations) {
  UNetConfig c;
  c.encoder_blocks = 1;
  EXPECT_THROW(build_unet(c), ValidationError);
  c = UNetConfig{};
  c.input_shape = {1, 0, 16, 16};
  EXPECT_THROW(build_unet(c), ValidationError);
  c = UNetConfig{};
  c.input_shape = {-1, 16, 16, 16};
  EXPECT_THROW(build_unet(c), ValidationError);
  c = UNetConfig{};
  c.input_shape = {1, 24, 16, 16};
  EXPECT_THROW(build_unet(c), ValidationError);
  c = UNetConfig{};
  c.base_filters = 0;
  EXPECT_THROW(build_unet(c), ValidationError);
}

TEST(BuildUnet, FrozenTotalsMatchEnumerationOracle) {
  const auto g = build_unet(UNetConfig{});
  const auto t = total_cost(g);
  EXPECT_EQ(static_cast<std::int64_t>(g.size()), oracle::kUnet32Layers);
  EXPECT_EQ(t.params, oracle::kUnet32Params);
  EXPECT_EQ(t.compute, static_cast<double>(oracle::kUnet32Compute));
  EXPECT_EQ(t.activations, oracle::kUnet32Activations);
  EXPECT_EQ(convolution_param_total(g), oracle::kUnet32ConvParams);
}

TEST(BuildUnet, WidthDoublingQuadruplesConvolutionParams) {
  std::int64_t previous = 0;
  for (std::int64_t base : {32, 64, 128}) {
    UNetConfig c;
    c.base_filters = base;
    const auto g = build_unet(c);
    const auto conv = convolution_param_total(g);
    if (previous != 0) {
      EXPECT_EQ(conv, 4 * previous);
    }
    previous = conv;
  }
  UNetConfig c64;
  c64.base_filters = 64;
  UNetConfig c128;
  c128.base_filters = 128;
  EXPECT_EQ(convolution_param_total(build_unet(c64)), oracle::kUnet64ConvParams);
  EXPECT_EQ(convolution_param_total(build_unet(c128)), oracle::kUnet128ConvParams);
  EXPECT_EQ(total_cost(build_unet(c64)).params, oracle::kUnet64Params);
  EXPECT_EQ(total_cost(build_unet(c128)).params, oracle::kUnet128Params);
  const double ratio = static_cast<double>(oracle::kUnet64Params) / oracle::kUnet32Params;
  EXPECT_NEAR(ratio, 4.0, 1e-3);
}

TEST(BuildUnet, EveryConvolutionLikeLayerScalesByFour) {
  UNetConfig a;
  UNetConfig b;
  b.base_filters = 2 * a.base_filters;
  const auto ga = build_unet(a);
  const auto gb = build_unet(b);
  ASSERT_EQ(ga.size(), gb.size());
  for (std::size_t i = 0; i < ga.size(); ++i) {
    if (!is_convolution_like(ga, ga.layers[i])) continue;
    EXPECT_EQ(gb.layers[i].param_count, 4 * ga.layers[i].param_count) << i;
  }
}

TEST(BuildUnet, SqueezeExcitationScalesBlockCompute) {
  UNetConfig plain;
  UNetConfig se;
  se.se_blocks = true;
  const auto a = build_unet(plain);
  const auto b = build_unet(se);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double factor = a.layers[i].block.empty() ? 1.0 : 1.15;
    EXPECT_DOUBLE_EQ(b.layers[i].compute_cost, factor * a.layers[i].compute_cost);
  }
}

TEST(BuildUnet, CostMultiplierTableApplies) {
  UNetConfig c;
  c.cost_model.multiplier[LayerKind::kRelu] = 3.0;
  const auto base = build_unet(UNetConfig{});
  const auto scaled = build_unet(c);
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double f = base.layers[i].kind == LayerKind::kRelu ? 3.0 : 1.0;
    EXPECT_DOUBLE_EQ(scaled.layers[i].compute_cost, f * base.layers[i].compute_cost);
  }
}

TEST(BuildUnet, RandomConfigurationsValidateWithTopologicalNumbering) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = build_unet(testing::random_unet_config(rng));
    const auto report = validate_graph(g);
    EXPECT_TRUE(report.ok()) << report.summary();
    for (const auto& l : g.layers) {
      for (int u : l.inputs) EXPECT_LT(u, l.id);
    }
  }
}

TEST(TotalCost, SumsLayerFields) {
  ModelGraph empty = testing::uniform_chain(3, 0.0);
  for (auto& l : empty.layers) l.activation_elems = 0;
  EXPECT_EQ(total_cost(empty), (CostTotals{0.0, 0, 0}));

  ModelGraph g = testing::uniform_chain(3);
  g.layers[1].compute_cost = 1;
  g.layers[2].compute_cost = 2;
  g.layers[3].compute_cost = 3;
  EXPECT_EQ(total_cost(g).compute, 6.0);
}

TEST(ValidateGraph, ReportsSelfReferenceAsCycle) {
  auto g = testing::uniform_chain(3);
  g.layers[2].inputs = {2};
  const auto r = validate_graph(g);
  EXPECT_TRUE(r.has(ViolationKind::kCycle)) << r.summary();
}

TEST(ValidateGraph, ReportsForwardReferenceAsCycle) {
  auto g = testing::uniform_chain(3);
  g.layers[1].inputs = {3};
  EXPECT_TRUE(validate_graph(g).has(ViolationKind::kCycle));
}

TEST(ValidateGraph, ReportsSingleInputConcat) {
  auto g = testing::uniform_chain(3);
  g.layers[2].kind = LayerKind::kConcat;
  EXPECT_TRUE(validate_graph(g).has(ViolationKind::kBadArity));
}

TEST(ValidateGraph, ReportsDanglingInputAndDeadLayer) {
  auto g = testing::uniform_chain(3);
  g.layers[2].inputs = {-4};
  const auto r = validate_graph(g);
  EXPECT_TRUE(r.has(ViolationKind::kDanglingInput));

  auto h = testing::uniform_chain(3);
  LayerSpec extra = h.layers[1];
  extra.id = 4;
  extra.name = "dangling";
  h.layers.back().id = 5;
  h.layers.insert(h.layers.end() - 1, extra);
  const auto r2 = validate_graph(h);
  EXPECT_TRUE(r2.has(ViolationKind::kDeadLayer)) << r2.summary();
}

TEST(ValidateGraph, ReportsNegativeCostsAndMultipleSources) {
  auto g = testing::uniform_chain(3);
  g.layers[1].compute_cost = -1.0;
  g.layers[2].kind = LayerKind::kSource;
  g.layers[2].inputs.clear();
  const auto r = validate_graph(g);
  EXPECT_TRUE(r.has(ViolationKind::kBadCost));
  EXPECT_TRUE(r.has(ViolationKind::kSourceCount));
  EXPECT_GE(r.violations.size(), 2u);
}

TEST(ValidateGraph, ReportsOutputMismatch) {
  auto g = testing::uniform_chain(3);
  g.output_id = 2;
  EXPECT_TRUE(validate_graph(g).has(ViolationKind::kOutputMismatch));
}

TEST(ValidateGraph, EmptyReportForValidUnet) {
  UNetConfig c;
  c.encoder_blocks = 2;
  c.input_shape = {1, 4, 4, 4};
  EXPECT_TRUE(validate_graph(build_unet(c)).ok());
}

}  // namespace
}  // namespace unetpipe
