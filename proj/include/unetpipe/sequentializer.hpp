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
#ifndef UNETPIPE_SEQUENTIALIZER_HPP
#define UNETPIPE_SEQUENTIALIZER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "unetpipe/model_ir.hpp"

namespace unetpipe {

/// One link of the chain. The cell's main output ("act") is the value of the
/// last layer in `body`; every other value leaving the cell travels in a
/// named slot.
struct Cell {
  int id = 0;
  std::vector<int> body;
  std::vector<std::string> consumes_slots;
  std::vector<std::string> produces_slots;
  /// Slots handed on to the next cell unchanged.
  std::vector<std::string> passthrough_slots;

  bool operator==(const Cell&) const = default;
};

enum class CellGranularity {
  /// Consecutive layers sharing a block label form one cell.
  kBlock,
  /// Every layer is its own cell.
  kLayer,
};

struct SequentialModel {
  ModelGraph graph;
  std::vector<Cell> cells;
  /// slot -> elements per batch item
  std::map<std::string, std::int64_t> slot_sizes;
  /// slot -> id of the layer whose value the slot duplicates
  std::map<std::string, int> slot_sources;

  std::size_t size() const { return cells.size(); }
  /// cell index of every layer, indexed by layer id
  std::vector<int> cell_index() const;
  double cell_compute(std::size_t cell) const;
  std::int64_t cell_params(std::size_t cell) const;
  std::int64_t cell_activations(std::size_t cell) const;
  /// Sum of the sizes of slots forwarded through `cell` without being read there.
  std::int64_t cell_passthrough_elems(std::size_t cell) const;
  /// Layer ids whose values leave `cell` towards the next one: the main output
  /// followed by the source layer of every produced or forwarded slot.
  std::vector<int> outgoing_layers(std::size_t cell) const;
  /// Elements per batch item carried across the boundary after `cell`.
  std::int64_t outgoing_elems(std::size_t cell) const;

  bool operator==(const SequentialModel&) const = default;
};

/// Rewrites a skip-connected graph into a strict chain: each skip source value
/// is duplicated into a pass-through slot `skip_<i>` (i = rank of the source
/// in layer order, so encoder i feeds skip_i) that is threaded through every
/// intermediate cell up to its consuming concat. Layer set and dataflow are
/// unchanged; only the transport of long-range values changes.
///
/// Throws ValidationError if the graph is invalid or has a non-adjacent edge
/// that does not terminate in a concat (reported as "u->v").
SequentialModel sequentialize(const ModelGraph& graph,
                              CellGranularity granularity = CellGranularity::kBlock);

/// Re-derives slots for an existing chain, keeping its cell bodies.
SequentialModel sequentialize(const SequentialModel& model);

/// Every chain-property violation; empty iff each cell reads only from its
/// immediate predecessor and the bodies cover the graph exactly once.
std::vector<std::string> check_chain(const SequentialModel& model);

/// Sum over cells of the sizes of slots forwarded but not consumed there.
std::int64_t passthrough_memory_overhead(const SequentialModel& model);

/// Number of (slot, cell) pairs where a slot crosses a cell without being read.
std::int64_t passthrough_crossings(const SequentialModel& model);

std::string export_sequential(const SequentialModel& model);

/// Throws ValidationError when the text is malformed or its slot annotations
/// disagree with the ones derived from the embedded graph and cell bodies.
SequentialModel parse_sequential(std::string_view text);

}  // namespace unetpipe

#endif  // UNETPIPE_SEQUENTIALIZER_HPP
