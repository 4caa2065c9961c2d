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
#ifndef UNETPIPE_SCHEDULER_HPP
#define UNETPIPE_SCHEDULER_HPP

#include <string_view>
#include <vector>

namespace unetpipe {

enum class Phase { kForward, kBackward, kComm };

std::string_view to_string(Phase phase);

/// A unit of work bound to one exclusive resource (device or link).
struct Task {
  int resource = 0;
  double duration = 0.0;
  std::vector<int> deps;
  Phase phase = Phase::kForward;
  int stage = 0;
  int micro = 0;
  int round = 0;
};

struct ScheduledTask {
  double start = 0.0;
  double end = 0.0;
};

/// Non-delay list scheduling: repeatedly starts the ready task with the
/// smallest (earliest start, round, phase, micro-batch, stage, index) key,
/// backward ranking ahead of forward. Deterministic for a given task list.
/// Result i belongs to task i. Throws std::logic_error on a dependency cycle.
std::vector<ScheduledTask> list_schedule(const std::vector<Task>& tasks, int resource_count);

}  // namespace unetpipe

#endif  // UNETPIPE_SCHEDULER_HPP
