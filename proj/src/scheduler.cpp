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
#include "unetpipe/scheduler.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <tuple>

namespace unetpipe {

namespace {

int phase_rank(Phase p) {
  switch (p) {
    case Phase::kBackward: return 0;
    case Phase::kComm: return 1;
    case Phase::kForward: return 2;
  }
  return 3;
}

using Key = std::tuple<double, int, int, int, int, int>;

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kForward: return "forward";
    case Phase::kBackward: return "backward";
    case Phase::kComm: return "comm";
  }
  return "unknown";
}

std::vector<ScheduledTask> list_schedule(const std::vector<Task>& tasks, int resource_count) {
  const int n = static_cast<int>(tasks.size());
  std::vector<std::vector<int>> dependents(n);
  std::vector<int> pending(n, 0);
  std::vector<double> ready_at(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int d : tasks[i].deps) dependents[d].push_back(i);
    pending[i] = static_cast<int>(tasks[i].deps.size());
  }

  std::vector<double> free_at(resource_count, 0.0);
  std::set<Key> ready;
  auto key_of = [&](int i) {
    const Task& t = tasks[i];
    const double est = std::max(ready_at[i], free_at[t.resource]);
    return Key{est, t.round, phase_rank(t.phase), t.micro, t.stage, i};
  };
  for (int i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.insert(key_of(i));
  }

  std::vector<ScheduledTask> out(n);
  int done = 0;
  while (!ready.empty()) {
    auto it = ready.begin();
    const Key k = *it;
    ready.erase(it);
    const int i = std::get<5>(k);
    const Key current = key_of(i);
    if (std::get<0>(current) > std::get<0>(k)) {
      ready.insert(current);  // its resource was taken meanwhile
      continue;
    }
    const Task& t = tasks[i];
    out[i].start = std::get<0>(k);
    out[i].end = out[i].start + t.duration;
    free_at[t.resource] = out[i].end;
    ++done;
    for (int d : dependents[i]) {
      ready_at[d] = std::max(ready_at[d], out[i].end);
      if (--pending[d] == 0) ready.insert(key_of(d));
    }
  }
  if (done != n) throw std::logic_error("task graph has a dependency cycle");
  return out;
}

}  // namespace unetpipe
