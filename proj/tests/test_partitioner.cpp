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
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "test_support.hpp"
#include "unetpipe/partitioner.hpp"

namespace unetpipe {
namespace {

// Chain whose block-granularity cells carry exactly `costs`.
SequentialModel seq_from_costs(const std::vector<double>& costs) {
  ModelGraph g = testing::uniform_chain(static_cast<int>(costs.size()) - 1);
  for (std::size_t i = 0; i < costs.size(); ++i) {
    g.layers[i].compute_cost = costs[i];
    g.layers[i].block = "b" + std::to_string(i);
  }
  g.layers.back().block = "b" + std::to_string(costs.size() - 1);
  return sequentialize(g);
}

TEST(PartitionBalanced, SymmetricCostsSplitInHalf) {
  const auto p = partition_balanced(seq_from_costs({1, 1, 1, 1}), 2);
  EXPECT_EQ(p.boundaries, std::vector<int>{2});
  EXPECT_EQ(p.bottleneck(), 2.0);
}

TEST(PartitionBalanced, HeavyHeadGetsItsOwnStage) {
  const auto p = partition_balanced(seq_from_costs({3, 1, 1, 1}), 2);
  EXPECT_EQ(p.boundaries, std::vector<int>{1});
  EXPECT_EQ(p.bottleneck(), 3.0);
  EXPECT_EQ(testing::brute_force_partition({3, 1, 1, 1}, 2).bottleneck, 3.0);
}

TEST(PartitionBalanced, SingleStageTakesEverything) {
  const auto seq = seq_from_costs({2, 5, 1});
  const auto p = partition_balanced(seq, 1);
  EXPECT_TRUE(p.boundaries.empty());
  EXPECT_EQ(p.bottleneck(), 8.0);
}

TEST(PartitionBalanced, RejectsOutOfRangeStageCounts) {
  const auto seq = seq_from_costs({1, 1, 1});
  EXPECT_THROW(partition_balanced(seq, 0), std::invalid_argument);
  EXPECT_THROW(partition_balanced(seq, 4), std::invalid_argument);
}

TEST(PartitionBalanced, MatchesExhaustiveSearchWithEarliestTieBreak) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    std::vector<double> w(n);
    // Small integer weights create many ties.
    for (auto& x : w) x = std::uniform_int_distribution<int>(0, 5)(rng);
    for (int k = 1; k <= std::min(4, n); ++k) {
      const auto cuts = linear_partition(w, k);
      const auto oracle = testing::brute_force_partition(w, k);
      EXPECT_EQ(cuts, oracle.cuts) << "n=" << n << " k=" << k;
    }
  }
}

TEST(PartitionBalanced, BottleneckNeverIncreasesWithMoreStages) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> w(std::uniform_int_distribution<int>(4, 12)(rng));
    for (auto& x : w) x = std::uniform_real_distribution<double>(0.0, 10.0)(rng);
    const auto seq = seq_from_costs(w);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= static_cast<int>(w.size()); ++k) {
      const double b = partition_balanced(seq, k).bottleneck();
      EXPECT_LE(b, prev);
      prev = b;
    }
  }
}

TEST(PartitionBalanced, DeterministicAcrossCalls) {
  const auto seq = sequentialize(build_unet(UNetConfig{}));
  EXPECT_EQ(partition_balanced(seq, 3), partition_balanced(seq, 3));
}

TEST(PartitionBalanced, AlternativeObjectivesBalanceTheirField) {
  const auto seq = sequentialize(build_unet(UNetConfig{}));
  const auto by_params = partition_balanced(seq, 3, BalanceObjective::kParams);
  std::vector<double> w;
  for (std::size_t c = 0; c < seq.size(); ++c) w.push_back(seq.cell_params(c));
  EXPECT_EQ(by_params.boundaries, linear_partition(w, 3));
  EXPECT_EQ(parse_objective("activations"), BalanceObjective::kActivations);
  EXPECT_FALSE(parse_objective("latency"));
}

TEST(PartitionFixed, StagesFollowCuts) {
  const auto p = partition_fixed(seq_from_costs({1, 2, 3, 4}), std::vector<int>{2});
  EXPECT_EQ(p.stage_cell_counts, (std::vector<int>{2, 2}));
  EXPECT_EQ(p.stage_costs, (std::vector<double>{3, 7}));
  EXPECT_EQ(p.cell_range(1), (std::pair<int, int>{2, 4}));

  const auto q = partition_fixed(seq_from_costs({1, 1, 1, 1, 1, 1}), std::vector<int>{2, 4});
  EXPECT_EQ(q.stage_costs, (std::vector<double>{2, 2, 2}));
}

TEST(PartitionFixed, RejectsMalformedCuts) {
  const auto seq = seq_from_costs({1, 1, 1, 1});
  EXPECT_THROW(partition_fixed(seq, std::vector<int>{0}), std::invalid_argument);
  EXPECT_THROW(partition_fixed(seq, std::vector<int>{4}), std::invalid_argument);
  EXPECT_THROW(partition_fixed(seq, std::vector<int>{2, 2}), std::invalid_argument);
  EXPECT_THROW(partition_fixed(seq, std::vector<int>{3, 1}), std::invalid_argument);
}

TEST(Partition, AggregatesCoverEveryCellOnce) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto seq = sequentialize(build_unet(testing::random_unet_config(rng)));
    const int k = std::uniform_int_distribution<int>(1, 4)(rng);
    const auto p = partition_balanced(seq, k);
    ASSERT_EQ(p.stages(), static_cast<std::size_t>(k));
    int cells = 0;
    for (std::size_t s = 0; s < p.stages(); ++s) {
      auto [first, last] = p.cell_range(s);
      EXPECT_LT(first, last);
      EXPECT_EQ(first, cells);
      double cost = 0;
      std::int64_t params = 0;
      for (int c = first; c < last; ++c) {
        cost += seq.cell_compute(c);
        params += seq.cell_params(c);
      }
      EXPECT_DOUBLE_EQ(p.stage_costs[s], cost);
      EXPECT_EQ(p.stage_params[s], params);
      cells = last;
    }
    EXPECT_EQ(cells, static_cast<int>(seq.size()));
  }
}

TEST(Partition, StageActivationsIncludeSlotsInTransit) {
  const auto seq = sequentialize(build_unet(UNetConfig{}));
  const auto p = partition_balanced(seq, 4);
  const auto cell_of = seq.cell_index();
  for (std::size_t s = 0; s < p.stages(); ++s) {
    auto [first, last] = p.cell_range(s);
    std::int64_t body = 0;
    for (int c = first; c < last; ++c) body += seq.cell_activations(c);
    EXPECT_EQ(p.stage_activations[s], body + p.stage_passthrough_elems[s]);
    std::int64_t transit = 0;
    for (const auto& [slot, size] : seq.slot_sizes) {
      const int src = cell_of[seq.slot_sources.at(slot)];
      const auto& tail = seq.cells[last - 1].passthrough_slots;
      if (src < first && std::find(tail.begin(), tail.end(), slot) != tail.end()) transit += size;
    }
    EXPECT_EQ(p.stage_passthrough_elems[s], transit);
  }
  EXPECT_EQ(p.stage_passthrough_elems[0], 0);
  EXPECT_GT(p.stage_passthrough_elems[1] + p.stage_passthrough_elems[2], 0);
}

TEST(PartitionReport, RoundTrips) {
  const auto seq = sequentialize(build_unet(UNetConfig{}));
  const auto p = partition_balanced(seq, 3);
  EXPECT_EQ(parse_partition_report(partition_report_json(p, BalanceObjective::kCompute)), p);
}

}  // namespace
}  // namespace unetpipe
