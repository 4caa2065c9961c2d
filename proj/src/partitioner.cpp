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
#include "unetpipe/partitioner.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "unetpipe/error.hpp"

namespace unetpipe {

namespace {

using nlohmann::json;

Partition aggregate(const SequentialModel& seq, std::vector<int> boundaries) {
  Partition p;
  p.boundaries = std::move(boundaries);
  const int source = seq.graph.source_id();
  const int n = static_cast<int>(seq.size());
  const std::size_t k = p.boundaries.size() + 1;
  const auto cell_of = seq.cell_index();
  for (std::size_t s = 0; s < k; ++s) {
    const int first = s == 0 ? 0 : p.boundaries[s - 1];
    const int last = s + 1 == k ? n : p.boundaries[s];
    double cost = 0.0;
    std::int64_t params = 0;
    std::int64_t acts = 0;
    std::int64_t pass = 0;
    std::int64_t input_elems = 0;
    for (int c = first; c < last; ++c) {
      cost += seq.cell_compute(c);
      params += seq.cell_params(c);
      acts += seq.cell_activations(c);
    }
    // Slots produced inside the stage alias a body activation; only values in
    // transit from an earlier stage to a later one need their own buffer.
    if (first > 0) {
      for (const auto& slot : seq.cells[last - 1].passthrough_slots) {
        if (cell_of[seq.slot_sources.at(slot)] < first) pass += seq.slot_sizes.at(slot);
      }
    }
    std::int64_t working = acts;
    if (first == 0) {
      if (source >= 0) {
        input_elems = seq.graph.layer(source).activation_elems;
        working -= input_elems;
      }
    } else {
      input_elems = seq.outgoing_elems(first - 1);
    }
    p.stage_costs.push_back(cost);
    p.stage_params.push_back(params);
    p.stage_activations.push_back(acts + pass);
    p.stage_input_elems.push_back(input_elems);
    p.stage_working_elems.push_back(working);
    p.stage_passthrough_elems.push_back(pass);
    p.stage_cell_counts.push_back(last - first);
  }
  return p;
}

std::vector<double> cell_weights(const SequentialModel& seq, BalanceObjective objective) {
  std::vector<double> w(seq.size());
  for (std::size_t c = 0; c < seq.size(); ++c) {
    switch (objective) {
      case BalanceObjective::kCompute: w[c] = seq.cell_compute(c); break;
      case BalanceObjective::kParams: w[c] = static_cast<double>(seq.cell_params(c)); break;
      case BalanceObjective::kActivations:
        w[c] = static_cast<double>(seq.cell_activations(c) + seq.cell_passthrough_elems(c));
        break;
    }
  }
  return w;
}

}  // namespace

std::string_view to_string(BalanceObjective objective) {
  switch (objective) {
    case BalanceObjective::kCompute: return "compute";
    case BalanceObjective::kParams: return "params";
    case BalanceObjective::kActivations: return "activations";
  }
  return "unknown";
}

std::optional<BalanceObjective> parse_objective(std::string_view name) {
  if (name == "compute") return BalanceObjective::kCompute;
  if (name == "params") return BalanceObjective::kParams;
  if (name == "activations") return BalanceObjective::kActivations;
  return std::nullopt;
}

std::pair<int, int> Partition::cell_range(std::size_t stage) const {
  int first = 0;
  for (std::size_t s = 0; s < stage; ++s) first += stage_cell_counts[s];
  return {first, first + stage_cell_counts[stage]};
}

double Partition::bottleneck() const {
  return stage_costs.empty() ? 0.0 : *std::max_element(stage_costs.begin(), stage_costs.end());
}

std::vector<int> linear_partition(std::span<const double> weights, int k) {
  const int n = static_cast<int>(weights.size());
  if (k < 1 || k > n) {
    throw std::invalid_argument("stage count " + std::to_string(k) + " outside [1, " +
                                std::to_string(n) + "]");
  }
  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + weights[i];

  // best[r][j]: minimal bottleneck splitting cells [j, n) into r stages.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(k + 1, std::vector<double>(n + 1, kInf));
  best[0][n] = 0.0;
  for (int r = 1; r <= k; ++r) {
    for (int j = n - r; j >= 0; --j) {
      double v = kInf;
      for (int c = j + 1; c <= n - r + 1; ++c) {
        v = std::min(v, std::max(prefix[c] - prefix[j], best[r - 1][c]));
      }
      best[r][j] = v;
    }
  }

  // Walk forward taking the earliest cut that still allows the optimum.
  const double target = best[k][0];
  std::vector<int> cuts;
  int j = 0;
  for (int r = k; r >= 2; --r) {
    for (int c = j + 1; c <= n - r + 1; ++c) {
      if (std::max(prefix[c] - prefix[j], best[r - 1][c]) <= target) {
        cuts.push_back(c);
        j = c;
        break;
      }
    }
  }
  return cuts;
}

Partition partition_balanced(const SequentialModel& seq, int k, BalanceObjective objective) {
  const auto weights = cell_weights(seq, objective);
  return aggregate(seq, linear_partition(weights, k));
}

Partition partition_fixed(const SequentialModel& seq, std::span<const int> boundaries) {
  const int n = static_cast<int>(seq.size());
  int prev = 0;
  for (int b : boundaries) {
    if (b <= prev || b >= n) {
      throw std::invalid_argument("boundaries must be strictly increasing within [1, " +
                                  std::to_string(n - 1) + "]");
    }
    prev = b;
  }
  return aggregate(seq, std::vector<int>(boundaries.begin(), boundaries.end()));
}

std::string partition_report_json(const Partition& partition, BalanceObjective objective) {
  json doc;
  doc["objective"] = std::string(to_string(objective));
  doc["k"] = partition.stages();
  doc["boundaries"] = partition.boundaries;
  doc["bottleneck"] = partition.bottleneck();
  json stages = json::array();
  for (std::size_t s = 0; s < partition.stages(); ++s) {
    auto [first, last] = partition.cell_range(s);
    stages.push_back({{"first_cell", first},
                      {"cells", last - first},
                      {"compute", partition.stage_costs[s]},
                      {"params", partition.stage_params[s]},
                      {"activations", partition.stage_activations[s]},
                      {"input_elems", partition.stage_input_elems[s]},
                      {"working_elems", partition.stage_working_elems[s]},
                      {"passthrough_elems", partition.stage_passthrough_elems[s]}});
  }
  doc["stages"] = stages;
  return doc.dump(2) + "\n";
}

Partition parse_partition_report(std::string_view text) {
  try {
    const json doc = json::parse(text);
    Partition p;
    p.boundaries = doc.at("boundaries").get<std::vector<int>>();
    for (const auto& s : doc.at("stages")) {
      p.stage_costs.push_back(s.at("compute").get<double>());
      p.stage_params.push_back(s.at("params").get<std::int64_t>());
      p.stage_activations.push_back(s.at("activations").get<std::int64_t>());
      p.stage_input_elems.push_back(s.at("input_elems").get<std::int64_t>());
      p.stage_working_elems.push_back(s.at("working_elems").get<std::int64_t>());
      p.stage_passthrough_elems.push_back(s.at("passthrough_elems").get<std::int64_t>());
      p.stage_cell_counts.push_back(s.at("cells").get<int>());
    }
    if (p.stage_costs.size() != p.boundaries.size() + 1) {
      throw ValidationError("partition report: stage count does not match boundaries");
    }
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("partition report: ") + e.what());
  }
}

}  // namespace unetpipe
