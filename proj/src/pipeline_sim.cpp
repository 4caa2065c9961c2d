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
#include "unetpipe/pipeline_sim.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "unetpipe/error.hpp"
#include "unetpipe/graph_io.hpp"

namespace unetpipe {

namespace {

// Schedulable stages plus the dataflow between them. Edges always point from
// a lower to a higher stage index.
struct StageGraph {
  std::vector<int> device;
  std::vector<double> cost;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::pair<int, int>> holds;
  int output_stage = 0;
};

int link_id(int k, int from, int to) { return k + from * k + to; }

SimulationResult run_stage_graph(const StageGraph& sg, const ScheduleConfig& cfg,
                                 std::vector<std::int64_t> memory) {
  const int stages = static_cast<int>(sg.cost.size());
  const int rounds = cfg.repeat_batches;
  const int micros = cfg.m;
  const double items = static_cast<double>(cfg.items_per_micro_batch());
  const bool with_backward = cfg.backward_cost_ratio > 0.0;
  const bool with_comm = cfg.comm_cost_per_boundary > 0.0;

  std::vector<std::vector<int>> out_edges(stages);
  std::vector<std::vector<int>> in_edges(stages);
  for (int e = 0; e < static_cast<int>(sg.edges.size()); ++e) {
    out_edges[sg.edges[e].first].push_back(e);
    in_edges[sg.edges[e].second].push_back(e);
  }

  std::vector<Task> tasks;
  auto add = [&](Task t) {
    tasks.push_back(std::move(t));
    return static_cast<int>(tasks.size()) - 1;
  };
  const auto item_count = static_cast<std::size_t>(rounds * micros);
  std::vector<std::vector<int>> fwd(item_count, std::vector<int>(stages, -1));
  std::vector<std::vector<int>> fwd_comm(item_count, std::vector<int>(sg.edges.size(), -1));

  for (int r = 0; r < rounds; ++r) {
    for (int mb = 0; mb < micros; ++mb) {
      const std::size_t item = static_cast<std::size_t>(r * micros + mb);
      for (int s = 0; s < stages; ++s) {
        Task t{sg.device[s], sg.cost[s] * items, {}, Phase::kForward, s, mb, r};
        for (int e : in_edges[s]) {
          const int from = sg.edges[e].first;
          t.deps.push_back(fwd_comm[item][e] >= 0 ? fwd_comm[item][e] : fwd[item][from]);
        }
        if (item > 0) {
          for (const auto& [producer, consumer] : sg.holds) {
            if (producer == s) t.deps.push_back(fwd[item - 1][consumer]);
          }
        }
        fwd[item][s] = add(std::move(t));
        for (int e : out_edges[s]) {
          const int to = sg.edges[e].second;
          if (with_comm && sg.device[s] != sg.device[to]) {
            fwd_comm[item][e] = add(Task{link_id(cfg.k, sg.device[s], sg.device[to]),
                                         cfg.comm_cost_per_boundary,
                                         {fwd[item][s]},
                                         Phase::kComm,
                                         s,
                                         mb,
                                         r});
          }
        }
      }
    }
    if (!with_backward) continue;
    for (int mb = 0; mb < micros; ++mb) {
      const std::size_t item = static_cast<std::size_t>(r * micros + mb);
      std::vector<int> bwd(stages, -1);
      std::vector<int> bwd_comm(sg.edges.size(), -1);
      for (int s = stages - 1; s >= 0; --s) {
        Task t{sg.device[s], sg.cost[s] * items * cfg.backward_cost_ratio, {}, Phase::kBackward,
               s, mb, r};
        for (int e : out_edges[s]) {
          const int to = sg.edges[e].second;
          t.deps.push_back(bwd_comm[e] >= 0 ? bwd_comm[e] : bwd[to]);
        }
        if (s == sg.output_stage || out_edges[s].empty()) {
          if (cfg.phase_barrier) {
            for (int other = 0; other < micros; ++other) {
              t.deps.push_back(fwd[static_cast<std::size_t>(r * micros + other)][sg.output_stage]);
            }
          } else {
            t.deps.push_back(fwd[item][s]);
          }
        }
        bwd[s] = add(std::move(t));
        for (int e : in_edges[s]) {
          const int from = sg.edges[e].first;
          if (with_comm && sg.device[s] != sg.device[from]) {
            bwd_comm[e] = add(Task{link_id(cfg.k, sg.device[s], sg.device[from]),
                                   cfg.comm_cost_per_boundary,
                                   {bwd[s]},
                                   Phase::kComm,
                                   s,
                                   mb,
                                   r});
          }
        }
      }
    }
  }

  const auto schedule = list_schedule(tasks, cfg.k + cfg.k * cfg.k);

  SimulationResult result;
  auto& tl = result.timeline;
  tl.events.reserve(tasks.size());
  double f_begin = 0.0, f_end = 0.0, b_begin = 0.0, b_end = 0.0;
  double f_busy = 0.0, b_busy = 0.0;
  bool any_f = false, any_b = false;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    const auto& s = schedule[i];
    tl.events.push_back({t.resource, s.start, s.end, t.phase, t.stage, t.micro, t.round});
    tl.horizon = std::max(tl.horizon, s.end);
    if (t.phase == Phase::kForward) {
      f_begin = any_f ? std::min(f_begin, s.start) : s.start;
      f_end = any_f ? std::max(f_end, s.end) : s.end;
      f_busy += t.duration;
      any_f = true;
    } else if (t.phase == Phase::kBackward) {
      b_begin = any_b ? std::min(b_begin, s.start) : s.start;
      b_end = any_b ? std::max(b_end, s.end) : s.end;
      b_busy += t.duration;
      any_b = true;
    }
  }

  auto& mt = result.metrics;
  const double devices = static_cast<double>(cfg.k);
  mt.makespan = tl.horizon;
  mt.throughput = mt.makespan > 0.0 ? rounds / mt.makespan : 0.0;
  mt.utilization = mt.makespan > 0.0 ? (f_busy + b_busy) / (devices * mt.makespan) : 1.0;
  mt.bubble_fraction = 1.0 - mt.utilization;
  mt.forward_horizon = f_end - f_begin;
  mt.backward_horizon = b_end - b_begin;
  mt.forward_utilization =
      mt.forward_horizon > 0.0 ? f_busy / (devices * mt.forward_horizon) : 1.0;
  mt.backward_utilization =
      mt.backward_horizon > 0.0 ? b_busy / (devices * mt.backward_horizon) : 1.0;
  mt.per_device_peak_memory = std::move(memory);
  if (rounds >= 8) mt.steady_state_throughput = steady_state_throughput(tl, cfg.k);
  return result;
}

std::int64_t memory_formula(const ScheduleConfig& cfg, std::int64_t input, std::int64_t working) {
  const std::int64_t live_items = cfg.recompute ? cfg.n / cfg.m : cfg.n;
  return cfg.n * input + live_items * working;
}

}  // namespace

void ScheduleConfig::validate() const {
  if (k < 1) throw std::invalid_argument("device count must be >= 1");
  if (m < 1) throw std::invalid_argument("micro-batch count must be >= 1");
  if (n < 1 || n % m != 0) {
    throw std::invalid_argument("batch size " + std::to_string(n) +
                                " is not a positive multiple of " + std::to_string(m));
  }
  if (repeat_batches < 1) throw std::invalid_argument("repeat_batches must be >= 1");
  if (!(backward_cost_ratio >= 0.0) || !(comm_cost_per_boundary >= 0.0)) {
    throw std::invalid_argument("cost ratios must be non-negative");
  }
}

SimulationResult simulate_gpipe(const Partition& partition, const ScheduleConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(partition.stages()) != cfg.k) {
    throw std::invalid_argument("partition has " + std::to_string(partition.stages()) +
                                " stages but " + std::to_string(cfg.k) + " devices");
  }
  StageGraph sg;
  for (int s = 0; s < cfg.k; ++s) {
    sg.device.push_back(s);
    sg.cost.push_back(partition.stage_costs[s]);
    if (s > 0) sg.edges.emplace_back(s - 1, s);
  }
  sg.output_stage = cfg.k - 1;
  return run_stage_graph(sg, cfg, estimate_memory(partition, cfg));
}

SimulationResult simulate_dependency_schedule(const ModelGraph& graph,
                                              std::span<const int> placement,
                                              const ScheduleConfig& cfg) {
  cfg.validate();
  if (placement.size() != graph.size()) {
    throw std::invalid_argument("placement covers " + std::to_string(placement.size()) +
                                " of " + std::to_string(graph.size()) + " layers");
  }
  for (int d : placement) {
    if (d < 0 || d >= cfg.k) {
      throw std::invalid_argument("placement uses device " + std::to_string(d) +
                                  " outside [0, " + std::to_string(cfg.k) + ")");
    }
  }
  auto report = validate_graph(graph);
  if (!report.ok()) throw ValidationError("invalid graph:\n" + report.summary());

  StageGraph sg;
  std::vector<int> segment(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (i == 0 || placement[i] != placement[i - 1]) {
      sg.device.push_back(placement[i]);
      sg.cost.push_back(0.0);
    }
    segment[i] = static_cast<int>(sg.cost.size()) - 1;
    sg.cost.back() += graph.layers[i].compute_cost;
  }
  std::set<std::pair<int, int>> edges;
  std::set<std::pair<int, int>> holds;
  for (const auto& l : graph.layers) {
    for (int u : l.inputs) {
      const int a = segment[u];
      const int b = segment[l.id];
      if (a == b) continue;
      edges.emplace(a, b);
      if (cfg.skip_hold && b != a + 1 && placement[u] != placement[l.id]) holds.emplace(a, b);
    }
  }
  sg.edges.assign(edges.begin(), edges.end());
  sg.holds.assign(holds.begin(), holds.end());
  sg.output_stage = segment[graph.output_id];

  // Memory per device: stashed inputs crossing into the device plus its own layers.
  std::vector<std::int64_t> input(cfg.k, 0);
  std::vector<std::int64_t> working(cfg.k, 0);
  for (const auto& l : graph.layers) {
    const int d = placement[l.id];
    if (l.kind == LayerKind::kSource) {
      input[d] += l.activation_elems;
    } else {
      working[d] += l.activation_elems;
    }
  }
  const auto consumers = graph.consumers();
  for (const auto& l : graph.layers) {
    std::set<int> remote;
    for (int v : consumers[l.id]) {
      if (placement[v] != placement[l.id]) remote.insert(placement[v]);
    }
    for (int d : remote) input[d] += l.activation_elems;
  }
  std::vector<std::int64_t> memory(cfg.k);
  for (int d = 0; d < cfg.k; ++d) memory[d] = memory_formula(cfg, input[d], working[d]);

  return run_stage_graph(sg, cfg, std::move(memory));
}

double steady_state_throughput(const Timeline& timeline, int devices) {
  int rounds = 0;
  for (const auto& e : timeline.events) rounds = std::max(rounds, e.round + 1);
  if (rounds < 8) {
    throw std::invalid_argument("steady-state throughput needs >= 8 rounds, got " +
                                std::to_string(rounds));
  }
  std::vector<double> done(rounds, 0.0);
  for (const auto& e : timeline.events) done[e.round] = std::max(done[e.round], e.end);
  const int warmup = std::min(devices, (rounds - 2) / 2);
  const int first = warmup;
  const int last = rounds - 1 - warmup;
  // Least-squares slope of completion time against round index.
  const double count = last - first + 1;
  double mean_r = 0.0, mean_t = 0.0;
  for (int r = first; r <= last; ++r) {
    mean_r += r;
    mean_t += done[r];
  }
  mean_r /= count;
  mean_t /= count;
  double sxy = 0.0, sxx = 0.0;
  for (int r = first; r <= last; ++r) {
    sxy += (r - mean_r) * (done[r] - mean_t);
    sxx += (r - mean_r) * (r - mean_r);
  }
  const double period = sxy / sxx;
  return period > 0.0 ? 1.0 / period : std::numeric_limits<double>::infinity();
}

double steady_state_throughput(const Partition& partition, const ScheduleConfig& cfg) {
  return steady_state_throughput(simulate_gpipe(partition, cfg).timeline, cfg.k);
}

double steady_state_throughput(const ModelGraph& graph, std::span<const int> placement,
                               const ScheduleConfig& cfg) {
  return steady_state_throughput(simulate_dependency_schedule(graph, placement, cfg).timeline,
                                 cfg.k);
}

std::vector<std::int64_t> estimate_memory(const Partition& partition, const ScheduleConfig& cfg) {
  cfg.validate();
  std::vector<std::int64_t> out;
  out.reserve(partition.stages());
  for (std::size_t s = 0; s < partition.stages(); ++s) {
    out.push_back(memory_formula(
        cfg, partition.stage_input_elems[s],
        partition.stage_working_elems[s] + partition.stage_passthrough_elems[s]));
  }
  return out;
}

std::vector<std::string> check_timeline(const Timeline& timeline) {
  std::map<int, std::vector<const TimelineEvent*>> by_device;
  for (const auto& e : timeline.events) by_device[e.device].push_back(&e);
  std::vector<std::string> problems;
  for (auto& [device, events] : by_device) {
    std::sort(events.begin(), events.end(), [](auto* a, auto* b) {
      return std::tie(a->start, a->end) < std::tie(b->start, b->end);
    });
    for (std::size_t i = 1; i < events.size(); ++i) {
      if (events[i]->start < events[i - 1]->end) {
        std::ostringstream os;
        os << "device " << device << ": event at " << events[i]->start
           << " overlaps one ending at " << events[i - 1]->end;
        problems.push_back(os.str());
      }
    }
  }
  for (const auto& e : timeline.events) {
    if (e.end < e.start) problems.push_back("event ends before it starts");
  }
  return problems;
}

std::vector<std::string> check_gpipe_dependencies(const Timeline& timeline, int k, int m,
                                                  bool phase_barrier) {
  using Id = std::tuple<int, int, int>;  // round, micro, stage
  std::map<Id, const TimelineEvent*> fwd;
  std::map<Id, const TimelineEvent*> bwd;
  std::map<int, double> last_forward_end;
  int rounds = 0;
  for (const auto& e : timeline.events) {
    rounds = std::max(rounds, e.round + 1);
    if (e.phase == Phase::kForward) {
      fwd[{e.round, e.micro, e.stage}] = &e;
      last_forward_end[e.round] = std::max(last_forward_end[e.round], e.end);
    } else if (e.phase == Phase::kBackward) {
      bwd[{e.round, e.micro, e.stage}] = &e;
    }
  }
  std::vector<std::string> problems;
  auto describe = [](const char* what, int r, int mb, int s) {
    return std::string(what) + " round " + std::to_string(r) + " micro " + std::to_string(mb) +
           " stage " + std::to_string(s);
  };
  const bool has_backward = !bwd.empty();
  for (int r = 0; r < rounds; ++r) {
    for (int mb = 0; mb < m; ++mb) {
      for (int s = 0; s < k; ++s) {
        auto f = fwd.find({r, mb, s});
        if (f == fwd.end()) {
          problems.push_back(describe("missing forward", r, mb, s));
          continue;
        }
        if (s > 0) {
          auto prev = fwd.find({r, mb, s - 1});
          if (prev != fwd.end() && f->second->start < prev->second->end) {
            problems.push_back(describe("forward starts before its input,", r, mb, s));
          }
        }
        if (!has_backward) continue;
        auto b = bwd.find({r, mb, s});
        if (b == bwd.end()) {
          problems.push_back(describe("missing backward", r, mb, s));
          continue;
        }
        if (b->second->start < f->second->end) {
          problems.push_back(describe("backward precedes its forward,", r, mb, s));
        }
        if (phase_barrier && b->second->start < last_forward_end[r]) {
          problems.push_back(describe("backward crosses the phase barrier,", r, mb, s));
        }
        if (s + 1 < k) {
          auto next = bwd.find({r, mb, s + 1});
          if (next != bwd.end() && b->second->start < next->second->end) {
            problems.push_back(describe("backward starts before its gradient,", r, mb, s));
          }
        }
      }
    }
  }
  return problems;
}

std::string export_timeline(const Timeline& timeline) {
  std::ostringstream os;
  for (const auto& e : timeline.events) {
    os << e.device << ' ' << format_double(e.start) << ' ' << format_double(e.end) << ' '
       << to_string(e.phase) << ' ' << e.stage << ' ' << e.micro << ' ' << e.round << '\n';
  }
  return os.str();
}

Timeline parse_timeline(std::string_view text) {
  Timeline tl;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    TimelineEvent e;
    std::string phase;
    if (!(ls >> e.device >> e.start >> e.end >> phase >> e.stage >> e.micro >> e.round)) {
      throw ValidationError("timeline line " + std::to_string(line_no) + ": malformed event");
    }
    if (phase == "forward") {
      e.phase = Phase::kForward;
    } else if (phase == "backward") {
      e.phase = Phase::kBackward;
    } else if (phase == "comm") {
      e.phase = Phase::kComm;
    } else {
      throw ValidationError("timeline line " + std::to_string(line_no) + ": unknown phase '" +
                            phase + "'");
    }
    tl.horizon = std::max(tl.horizon, e.end);
    tl.events.push_back(e);
  }
  return tl;
}

}  // namespace unetpipe
