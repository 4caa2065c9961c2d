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

#include <algorithm>
#include <random>

#include "oracle_constants.hpp"
#include "test_support.hpp"
#include "unetpipe/error.hpp"
#include "unetpipe/sequentializer.hpp"

namespace unetpipe {
namespace {

UNetConfig two_block() {
  UNetConfig c;
  c.base_filters = 1;
  c.encoder_blocks = 2;
  c.input_shape = {1, 4, 4, 4};
  return c;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

// source -> a -> b -> c -> d -> concat(a, d) -> sink, one layer per cell.
ModelGraph single_skip(std::int64_t skip_size) {
  ModelGraph g = testing::uniform_chain(4);
  g.layers[1].activation_elems = skip_size;
  LayerSpec cat;
  cat.id = 5;
  cat.name = "cat";
  cat.kind = LayerKind::kConcat;
  cat.inputs = {1, 4};
  cat.channels = 2;
  cat.activation_elems = 2;
  g.layers.back().id = 6;
  g.layers.back().inputs = {5};
  g.layers.insert(g.layers.end() - 1, cat);
  g.output_id = 5;
  return g;
}

TEST(Sequentialize, PureChainIsUnchanged) {
  const auto g = testing::uniform_chain(5);
  const auto seq = sequentialize(g, CellGranularity::kLayer);
  ASSERT_EQ(seq.size(), g.size());
  for (std::size_t c = 0; c < seq.size(); ++c) {
    EXPECT_EQ(seq.cells[c].body, std::vector<int>{static_cast<int>(c)});
    EXPECT_TRUE(seq.cells[c].passthrough_slots.empty());
    EXPECT_TRUE(seq.cells[c].produces_slots.empty());
  }
  EXPECT_TRUE(seq.slot_sizes.empty());
  EXPECT_EQ(passthrough_memory_overhead(seq), 0);
  EXPECT_EQ(seq.graph, g);
}

TEST(Sequentialize, TwoBlockSkipThreadsThroughBottom) {
  const auto g = build_unet(two_block());
  const auto seq = sequentialize(g);
  std::vector<std::string> labels;
  for (const auto& cell : seq.cells) labels.push_back(g.layer(cell.body.front()).block);
  ASSERT_EQ(labels, (std::vector<std::string>{"", "e1", "e2", "d2", "d1", ""}));
  ASSERT_EQ(seq.slot_sizes.size(), 1u);
  const std::string slot = seq.slot_sizes.begin()->first;
  EXPECT_EQ(slot, "skip_1");
  EXPECT_TRUE(contains(seq.cells[1].produces_slots, slot));
  EXPECT_TRUE(contains(seq.cells[2].passthrough_slots, slot));
  EXPECT_TRUE(contains(seq.cells[3].passthrough_slots, slot));
  EXPECT_TRUE(contains(seq.cells[4].consumes_slots, slot));
  const int concat = seq.cells[4].body.front();
  EXPECT_EQ(g.layer(concat).kind, LayerKind::kConcat);
  EXPECT_EQ(g.layer(concat).inputs.front(), seq.slot_sources.at(slot));
  EXPECT_EQ(passthrough_crossings(seq), oracle::kUnetB2Crossings);
  EXPECT_EQ(passthrough_memory_overhead(seq), oracle::kUnetB2PassthroughOverhead);
}

TEST(Sequentialize, SlotsNamedByEncoderIndex) {
  const auto seq = sequentialize(build_unet(UNetConfig{}));
  for (int i = 1; i <= 4; ++i) {
    const std::string slot = "skip_" + std::to_string(i);
    ASSERT_TRUE(seq.slot_sources.count(slot)) << slot;
    EXPECT_EQ(seq.graph.layer(seq.slot_sources.at(slot)).block, "e" + std::to_string(i));
  }
}

TEST(Sequentialize, FiveBlockCrossingsMatchPathEnumeration) {
  const auto seq = sequentialize(build_unet(UNetConfig{}));
  EXPECT_EQ(passthrough_crossings(seq), oracle::kUnet32Crossings);
  EXPECT_EQ(passthrough_memory_overhead(seq), oracle::kUnet32PassthroughOverhead);
}

TEST(Sequentialize, SingleSkipOverheadIsSpanTimesSize) {
  for (std::int64_t size : {1, 7, 40}) {
    const auto seq = sequentialize(single_skip(size), CellGranularity::kLayer);
    EXPECT_EQ(passthrough_crossings(seq), 3);
    EXPECT_EQ(passthrough_memory_overhead(seq), 3 * size);
  }
}

TEST(Sequentialize, PreservesLayerMultisetAndChainProperty) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = build_unet(testing::random_unet_config(rng));
    for (auto gran : {CellGranularity::kBlock, CellGranularity::kLayer}) {
      const auto seq = sequentialize(g, gran);
      EXPECT_TRUE(check_chain(seq).empty());
      std::vector<int> ids;
      for (const auto& c : seq.cells) ids.insert(ids.end(), c.body.begin(), c.body.end());
      std::sort(ids.begin(), ids.end());
      ASSERT_EQ(ids.size(), g.size());
      for (std::size_t i = 0; i < ids.size(); ++i) EXPECT_EQ(ids[i], static_cast<int>(i));
    }
  }
}

TEST(Sequentialize, IsIdempotent) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto seq = sequentialize(build_unet(testing::random_unet_config(rng)));
    EXPECT_EQ(sequentialize(seq), seq);
  }
}

TEST(Sequentialize, RejectsSkipIntoNonConcat) {
  // 1 feeds both 2 and 3; 3 is not a concat yet skips over 2.
  auto g = testing::uniform_chain(3);
  g.layers[3].inputs = {1};
  LayerSpec cat;
  cat.id = 4;
  cat.name = "cat";
  cat.kind = LayerKind::kConcat;
  cat.inputs = {2, 3};
  cat.channels = 2;
  g.layers.back().id = 5;
  g.layers.back().inputs = {4};
  g.layers.insert(g.layers.end() - 1, cat);
  g.output_id = 4;
  ASSERT_TRUE(validate_graph(g).ok()) << validate_graph(g).summary();
  try {
    sequentialize(g, CellGranularity::kLayer);
    ADD_FAILURE() << "expected rejection";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("1->3"), std::string::npos) << e.what();
  }
}

TEST(Sequentialize, RejectsInvalidGraph) {
  auto g = testing::uniform_chain(3);
  g.layers[2].inputs = {2};
  EXPECT_THROW(sequentialize(g), ValidationError);
}

TEST(CheckChain, DetectsTamperedSlots) {
  auto seq = sequentialize(build_unet(two_block()));
  seq.cells[3].passthrough_slots.clear();
  EXPECT_FALSE(check_chain(seq).empty());
}

TEST(CheckChain, DetectsDuplicatedCompute) {
  auto seq = sequentialize(build_unet(two_block()));
  seq.cells[2].body.push_back(seq.cells[1].body.back());
  EXPECT_FALSE(check_chain(seq).empty());
}

TEST(SequentialText, RoundTrips) {
  const auto seq = sequentialize(build_unet(UNetConfig{}));
  const auto text = export_sequential(seq);
  EXPECT_EQ(parse_sequential(text), seq);
  EXPECT_EQ(export_sequential(parse_sequential(text)), text);
}

TEST(SequentialText, RejectsInconsistentSlots) {
  const auto seq = sequentialize(build_unet(two_block()));
  auto text = export_sequential(seq);
  const auto pos = text.find("passthrough=skip_1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 18, "passthrough=");
  EXPECT_THROW(parse_sequential(text), ValidationError);
}

}  // namespace
}  // namespace unetpipe
