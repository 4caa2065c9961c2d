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
#include "unetpipe/sequentializer.hpp"

#include <algorithm>
#include <sstream>

#include "unetpipe/error.hpp"
#include "unetpipe/graph_io.hpp"

namespace unetpipe {

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string join(const std::vector<std::string>& v) {
  if (v.empty()) return "-";
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::vector<std::vector<int>> group_layers(const ModelGraph& graph, CellGranularity granularity) {
  std::vector<std::vector<int>> groups;
  for (const auto& l : graph.layers) {
    const bool extend = granularity == CellGranularity::kBlock && !groups.empty() &&
                        !l.block.empty() && graph.layer(groups.back().back()).block == l.block;
    if (extend) {
      groups.back().push_back(l.id);
    } else {
      groups.push_back({l.id});
    }
  }
  return groups;
}

void require_skip_shape(const ModelGraph& graph) {
  for (const auto& l : graph.layers) {
    if (l.inputs.empty()) continue;
    const int adjacent = l.id - 1;
    if (l.kind == LayerKind::kConcat) {
      if (l.inputs.back() != adjacent) {
        throw ValidationError("concat " + std::to_string(l.id) +
                              " must take its predecessor as last input");
      }
      continue;
    }
    for (int u : l.inputs) {
      if (u != adjacent) {
        throw ValidationError("edge " + std::to_string(u) + "->" + std::to_string(l.id) +
                              " is not an encoder-to-decoder skip into a concat");
      }
    }
  }
}

// Derives slot annotations for fixed cell bodies.
SequentialModel annotate(ModelGraph graph, const std::vector<std::vector<int>>& bodies) {
  SequentialModel seq;
  seq.graph = std::move(graph);
  const auto& g = seq.graph;
  seq.cells.resize(bodies.size());
  std::vector<int> cell_of(g.size(), -1);
  for (std::size_t c = 0; c < bodies.size(); ++c) {
    seq.cells[c].id = static_cast<int>(c);
    seq.cells[c].body = bodies[c];
    for (int id : bodies[c]) {
      if (id < 0 || static_cast<std::size_t>(id) >= g.size() || cell_of[id] != -1) {
        throw ValidationError("cell " + std::to_string(c) + " lists layer " +
                              std::to_string(id) + " that is unknown or already placed");
      }
      cell_of[id] = static_cast<int>(c);
    }
  }
  for (std::size_t id = 0; id < g.size(); ++id) {
    if (cell_of[id] == -1) {
      throw ValidationError("layer " + std::to_string(id) + " is not in any cell");
    }
  }

  // Values leaving a cell other than through its main output need a slot.
  const auto consumers = g.consumers();
  int ordinal = 0;
  for (const auto& l : g.layers) {
    const int a = cell_of[l.id];
    const bool is_main = seq.cells[a].body.back() == l.id;
    int last_consumer_cell = -1;
    for (int v : consumers[l.id]) {
      const int b = cell_of[v];
      if (b < a) {
        throw ValidationError("layer " + std::to_string(v) + " reads layer " +
                              std::to_string(l.id) + " from a later cell");
      }
      if (b == a || (b == a + 1 && is_main)) continue;
      last_consumer_cell = std::max(last_consumer_cell, b);
    }
    if (last_consumer_cell < 0) continue;

    const std::string slot = "skip_" + std::to_string(++ordinal);
    seq.slot_sizes[slot] = l.activation_elems;
    seq.slot_sources[slot] = l.id;
    seq.cells[a].produces_slots.push_back(slot);
    for (int c = a + 1; c <= last_consumer_cell; ++c) {
      auto& cell = seq.cells[c];
      const bool via_main = c == a + 1 && is_main;
      const bool reads = !via_main && std::any_of(consumers[l.id].begin(), consumers[l.id].end(),
                                                  [&](int v) { return cell_of[v] == c; });
      if (reads) cell.consumes_slots.push_back(slot);
      if (c < last_consumer_cell) cell.passthrough_slots.push_back(slot);
    }
  }
  return seq;
}

}  // namespace

std::vector<int> SequentialModel::cell_index() const {
  std::vector<int> out(graph.size(), -1);
  for (const auto& c : cells) {
    for (int id : c.body) out[id] = c.id;
  }
  return out;
}

double SequentialModel::cell_compute(std::size_t cell) const {
  double sum = 0.0;
  for (int id : cells[cell].body) sum += graph.layer(id).compute_cost;
  return sum;
}

std::int64_t SequentialModel::cell_params(std::size_t cell) const {
  std::int64_t sum = 0;
  for (int id : cells[cell].body) sum += graph.layer(id).param_count;
  return sum;
}

std::int64_t SequentialModel::cell_activations(std::size_t cell) const {
  std::int64_t sum = 0;
  for (int id : cells[cell].body) sum += graph.layer(id).activation_elems;
  return sum;
}

std::int64_t SequentialModel::cell_passthrough_elems(std::size_t cell) const {
  std::int64_t sum = 0;
  const auto& c = cells[cell];
  for (const auto& s : c.passthrough_slots) {
    if (!contains(c.consumes_slots, s)) sum += slot_sizes.at(s);
  }
  return sum;
}

std::vector<int> SequentialModel::outgoing_layers(std::size_t cell) const {
  const auto& c = cells[cell];
  std::vector<int> out{c.body.back()};
  for (const auto& s : c.produces_slots) out.push_back(slot_sources.at(s));
  for (const auto& s : c.passthrough_slots) out.push_back(slot_sources.at(s));
  return out;
}

std::int64_t SequentialModel::outgoing_elems(std::size_t cell) const {
  std::int64_t sum = 0;
  for (int id : outgoing_layers(cell)) sum += graph.layer(id).activation_elems;
  return sum;
}

SequentialModel sequentialize(const ModelGraph& graph, CellGranularity granularity) {
  auto report = validate_graph(graph);
  if (!report.ok()) throw ValidationError("invalid graph:\n" + report.summary());
  require_skip_shape(graph);
  return annotate(graph, group_layers(graph, granularity));
}

SequentialModel sequentialize(const SequentialModel& model) {
  std::vector<std::vector<int>> bodies;
  bodies.reserve(model.cells.size());
  for (const auto& c : model.cells) bodies.push_back(c.body);
  require_skip_shape(model.graph);
  return annotate(model.graph, bodies);
}

std::vector<std::string> check_chain(const SequentialModel& model) {
  std::vector<std::string> problems;
  const auto& g = model.graph;
  std::vector<int> seen(g.size(), 0);
  for (const auto& c : model.cells) {
    for (int id : c.body) {
      if (id < 0 || static_cast<std::size_t>(id) >= g.size()) {
        problems.push_back("cell " + std::to_string(c.id) + " has unknown layer " +
                           std::to_string(id));
      } else {
        ++seen[id];
      }
    }
  }
  for (std::size_t id = 0; id < g.size(); ++id) {
    if (seen[id] != 1) {
      problems.push_back("layer " + std::to_string(id) + " appears " + std::to_string(seen[id]) +
                         " times");
    }
  }
  if (!problems.empty()) return problems;

  const auto cell_of = model.cell_index();
  for (std::size_t i = 0; i < model.cells.size(); ++i) {
    const auto& c = model.cells[i];
    std::vector<std::string> available;
    if (i > 0) {
      const auto& prev = model.cells[i - 1];
      available = prev.produces_slots;
      available.insert(available.end(), prev.passthrough_slots.begin(),
                       prev.passthrough_slots.end());
    }
    for (const auto& s : c.consumes_slots) {
      if (!contains(available, s)) {
        problems.push_back("cell " + std::to_string(i) + " reads slot " + s +
                           " not offered by its predecessor");
      }
    }
    for (const auto& s : c.passthrough_slots) {
      if (!contains(available, s)) {
        problems.push_back("cell " + std::to_string(i) + " forwards slot " + s +
                           " not offered by its predecessor");
      }
    }
    for (int v : c.body) {
      for (int u : g.layer(v).inputs) {
        const auto cu = static_cast<std::size_t>(cell_of[u]);
        if (cu == i) continue;
        if (i > 0 && cu == i - 1 && model.cells[i - 1].body.back() == u) continue;
        const bool via_slot = std::any_of(
            c.consumes_slots.begin(), c.consumes_slots.end(),
            [&](const std::string& s) { return model.slot_sources.at(s) == u; });
        if (!via_slot) {
          problems.push_back("layer " + std::to_string(v) + " in cell " + std::to_string(i) +
                             " reads layer " + std::to_string(u) + " from cell " +
                             std::to_string(cu));
        }
      }
    }
  }
  return problems;
}

std::int64_t passthrough_memory_overhead(const SequentialModel& model) {
  std::int64_t total = 0;
  for (std::size_t c = 0; c < model.cells.size(); ++c) total += model.cell_passthrough_elems(c);
  return total;
}

std::int64_t passthrough_crossings(const SequentialModel& model) {
  std::int64_t n = 0;
  for (const auto& c : model.cells) {
    for (const auto& s : c.passthrough_slots) {
      if (!contains(c.consumes_slots, s)) ++n;
    }
  }
  return n;
}

std::string export_sequential(const SequentialModel& model) {
  std::ostringstream os;
  os << "# unetpipe sequential model\n";
  os << export_edge_list(model.graph);
  for (const auto& [slot, size] : model.slot_sizes) {
    os << "slot " << slot << " source=" << model.slot_sources.at(slot) << " size=" << size
       << '\n';
  }
  for (const auto& c : model.cells) {
    os << "cell " << c.id << " body=";
    for (std::size_t i = 0; i < c.body.size(); ++i) os << (i ? "," : "") << c.body[i];
    os << " consumes=" << join(c.consumes_slots) << " produces=" << join(c.produces_slots)
       << " passthrough=" << join(c.passthrough_slots) << '\n';
  }
  return os.str();
}

SequentialModel parse_sequential(std::string_view text) {
  std::string graph_text;
  std::vector<std::vector<int>> bodies;
  std::vector<std::string> cell_lines;
  std::vector<std::string> slot_lines;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("cell ", 0) == 0) {
      std::istringstream ls(line);
      std::string tag, id, body;
      ls >> tag >> id >> body;
      if (body.rfind("body=", 0) != 0) {
        throw ValidationError("line " + std::to_string(line_no) + ": expected body=");
      }
      std::vector<int> ids;
      std::istringstream bs(body.substr(5));
      std::string tok;
      while (std::getline(bs, tok, ',')) {
        try {
          ids.push_back(std::stoi(tok));
        } catch (const std::exception&) {
          throw ValidationError("line " + std::to_string(line_no) + ": bad layer id '" + tok +
                                "'");
        }
      }
      bodies.push_back(std::move(ids));
      cell_lines.push_back(line);
      graph_text += "#\n";
    } else if (line.rfind("slot ", 0) == 0) {
      slot_lines.push_back(line);
      graph_text += "#\n";
    } else {
      graph_text += line + "\n";
    }
  }
  if (bodies.empty()) throw ValidationError("sequential model has no cells");
  auto model = annotate(parse_edge_list(graph_text), bodies);

  // The stored annotations must match what the graph implies.
  const auto expected = export_sequential(model);
  std::istringstream ex(expected);
  std::vector<std::string> expected_cells;
  std::vector<std::string> expected_slots;
  while (std::getline(ex, line)) {
    if (line.rfind("cell ", 0) == 0) expected_cells.push_back(line);
    if (line.rfind("slot ", 0) == 0) expected_slots.push_back(line);
  }
  auto trim = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
  };
  for (auto& s : cell_lines) s = trim(s);
  for (auto& s : slot_lines) s = trim(s);
  if (cell_lines != expected_cells || slot_lines != expected_slots) {
    throw ValidationError("slot annotations do not match the embedded graph");
  }
  return model;
}

}  // namespace unetpipe
