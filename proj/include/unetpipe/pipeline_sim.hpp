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
#ifndef UNETPIPE_PIPELINE_SIM_HPP
#define UNETPIPE_PIPELINE_SIM_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unetpipe/model_ir.hpp"
#include "unetpipe/partitioner.hpp"
#include "unetpipe/scheduler.hpp"

namespace unetpipe {

struct ScheduleConfig {
  int k = 1;  ///< devices
  int m = 1;  ///< micro-batches per mini-batch
  int n = 1;  ///< mini-batch size in items
  /// Backward duration relative to forward; 0 simulates forward passes only.
  double backward_cost_ratio = 2.0;
  /// Duration of one boundary transfer per micro-batch, on a dedicated link.
  double comm_cost_per_boundary = 0.0;
  /// Backward of a mini-batch starts only after all of its forwards.
  bool phase_barrier = true;
  /// Consecutive mini-batches streamed through the devices.
  int repeat_batches = 1;
  /// Stage activations are recomputed in backward, so only stage inputs are
  /// stashed for every item.
  bool recompute = true;
  /// Dependency schedule only: a cross-device skip value stays in a single
  /// buffer on its producer until consumed, so the producer cannot emit the
  /// next micro-batch's value before then.
  bool skip_hold = true;

  int items_per_micro_batch() const { return n / m; }
  /// Throws std::invalid_argument.
  void validate() const;
};

struct TimelineEvent {
  int device = 0;  ///< devices are [0, k); transfer links are numbered from k
  double start = 0.0;
  double end = 0.0;
  Phase phase = Phase::kForward;
  int stage = 0;
  int micro = 0;
  int round = 0;

  bool operator==(const TimelineEvent&) const = default;
};

struct Timeline {
  std::vector<TimelineEvent> events;
  double horizon = 0.0;

  bool operator==(const Timeline&) const = default;
};

struct PipelineMetrics {
  double makespan = 0.0;
  /// Mini-batches completed per unit time over the whole run.
  double throughput = 0.0;
  /// Busy compute time over device-time, both phases.
  double utilization = 0.0;
  double bubble_fraction = 0.0;
  double forward_horizon = 0.0;
  double backward_horizon = 0.0;
  double forward_utilization = 0.0;
  double backward_utilization = 0.0;
  std::vector<std::int64_t> per_device_peak_memory;
  /// Set when repeat_batches >= 8.
  std::optional<double> steady_state_throughput;
};

struct SimulationResult {
  Timeline timeline;
  PipelineMetrics metrics;
};

/// GPipe schedule over a contiguous partition: F(s,m) after F(s-1,m);
/// B(s,m) after B(s+1,m) and, with the phase barrier, after every forward of
/// its mini-batch. Stage durations are stage cost times items per micro-batch.
/// Throws std::invalid_argument when the stage count differs from cfg.k.
SimulationResult simulate_gpipe(const Partition& partition, const ScheduleConfig& cfg);

/// Earliest-start schedule of the raw graph under an arbitrary layer -> device
/// placement. Maximal runs of consecutive layers on one device execute as one
/// task; cross-device edges, including long skips, become direct transfers.
/// Throws std::invalid_argument for incomplete or out-of-range placements.
SimulationResult simulate_dependency_schedule(const ModelGraph& graph,
                                              std::span<const int> placement,
                                              const ScheduleConfig& cfg);

/// Mini-batches per unit time once the pipeline is saturated: the inverse of
/// the least-squares slope of round completion time against round index over
/// rounds [w, R-1-w], with w = min(devices, (R-2)/2) warm-up and drain rounds
/// discarded at each end.
/// Throws std::invalid_argument when fewer than 8 rounds are present.
double steady_state_throughput(const Timeline& timeline, int devices);
double steady_state_throughput(const Partition& partition, const ScheduleConfig& cfg);
double steady_state_throughput(const ModelGraph& graph, std::span<const int> placement,
                               const ScheduleConfig& cfg);

/// Per-stage peak elements:
///   n * input_elems + f * (working_elems + passthrough_elems)
/// with f = n/m under recompute and f = n otherwise. For L uniform unit layers
/// split evenly this is N + (L/K) * (N/M).
std::vector<std::int64_t> estimate_memory(const Partition& partition, const ScheduleConfig& cfg);

/// Overlapping events on any device or link.
std::vector<std::string> check_timeline(const Timeline& timeline);

/// GPipe ordering rules for stage events (comm events are ignored).
std::vector<std::string> check_gpipe_dependencies(const Timeline& timeline, int k, int m,
                                                  bool phase_barrier);

/// One event per line: `device start end phase stage micro round`.
std::string export_timeline(const Timeline& timeline);
Timeline parse_timeline(std::string_view text);

}  // namespace unetpipe

#endif  // UNETPIPE_PIPELINE_SIM_HPP
