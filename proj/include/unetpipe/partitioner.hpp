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
#ifndef UNETPIPE_PARTITIONER_HPP
#define UNETPIPE_PARTITIONER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unetpipe/sequentializer.hpp"

namespace unetpipe {

enum class BalanceObjective { kCompute, kParams, kActivations };

std::string_view to_string(BalanceObjective objective);
std::optional<BalanceObjective> parse_objective(std::string_view name);

/// Contiguous assignment of cells to stages. A boundary value c means the next
/// stage starts at (0-based) cell c.
struct Partition {
  std::vector<int> boundaries;
  std::vector<double> stage_costs;
  std::vector<std::int64_t> stage_params;
  /// Body activations plus pass-through slots in transit, per batch item.
  std::vector<std::int64_t> stage_activations;

  // Aggregates used by the memory model.
  /// Elements per batch item entering each stage (the model input for stage 0).
  std::vector<std::int64_t> stage_input_elems;
  /// Body activations of the stage, excluding the model input layer.
  std::vector<std::int64_t> stage_working_elems;
  /// Slots received from an earlier stage and forwarded to a later one.
  std::vector<std::int64_t> stage_passthrough_elems;
  std::vector<int> stage_cell_counts;

  std::size_t stages() const { return stage_costs.size(); }
  /// [first, last) cell range of stage s.
  std::pair<int, int> cell_range(std::size_t stage) const;
  double bottleneck() const;

  bool operator==(const Partition&) const = default;
};

/// Exact linear partition minimizing the maximum stage weight under the given
/// objective. Among optimal partitions the lexicographically smallest boundary
/// vector is returned. Throws std::invalid_argument unless 1 <= k <= cells.
Partition partition_balanced(const SequentialModel& seq, int k,
                             BalanceObjective objective = BalanceObjective::kCompute);

/// Throws std::invalid_argument for non-increasing or out-of-range cuts.
Partition partition_fixed(const SequentialModel& seq, std::span<const int> boundaries);

/// Same DP on a bare weight vector; returns the boundaries.
std::vector<int> linear_partition(std::span<const double> weights, int k);

/// Structured report (JSON object) with per-stage aggregates and boundaries.
std::string partition_report_json(const Partition& partition, BalanceObjective objective);
Partition parse_partition_report(std::string_view text);

}  // namespace unetpipe

#endif  // UNETPIPE_PARTITIONER_HPP
