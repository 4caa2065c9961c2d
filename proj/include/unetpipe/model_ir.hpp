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
#ifndef UNETPIPE_MODEL_IR_HPP
#define UNETPIPE_MODEL_IR_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace unetpipe {

enum class LayerKind {
  kAffine,
  kRelu,
  kDownsample2x,
  kUpsample2x,
  kConcat,
  kPassthrough,
  kSlice,
  kSource,
  kSink,
};

std::string_view to_string(LayerKind kind);
std::optional<LayerKind> parse_layer_kind(std::string_view name);

/// Spatial grid of one batch item, (x, y, z) voxels.
using Grid = std::array<std::int64_t, 3>;

inline std::int64_t voxel_count(const Grid& g) { return g[0] * g[1] * g[2]; }

/// One node f_i of the layered network. `channels` and `grid` describe the
/// emitted feature map; activation_elems is normally channels * voxels but is
/// kept as an independent annotation so synthetic cost models can override it.
struct LayerSpec {
  int id = 0;
  std::string name;
  LayerKind kind = LayerKind::kPassthrough;
  double compute_cost = 0.0;
  std::int64_t param_count = 0;
  std::int64_t activation_elems = 0;
  std::vector<int> inputs;
  std::int64_t channels = 0;
  Grid grid{1, 1, 1};
  /// Block label ("e1", "d3", ...); empty for layers outside any block.
  std::string block;

  bool operator==(const LayerSpec&) const = default;
};

/// DAG of layers in a fixed topological numbering: layers[i].id == i.
struct ModelGraph {
  std::vector<LayerSpec> layers;
  int output_id = -1;

  const LayerSpec& layer(int id) const { return layers.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return layers.size(); }
  /// Id of the unique source layer, or -1.
  int source_id() const;
  /// Id of the unique sink layer, or -1.
  int sink_id() const;
  /// consumers()[u] lists every v with an edge u -> v, ascending.
  std::vector<std::vector<int>> consumers() const;

  bool operator==(const ModelGraph&) const = default;
};

/// Multipliers applied on top of the default abstract work-unit model.
struct CostModel {
  std::map<LayerKind, double> multiplier;
  /// Weights per (input channel, output channel) pair of a modeled convolution.
  std::int64_t kernel_volume = 27;
  /// Compute multiplier for blocks carrying a squeeze-and-excitation unit.
  double se_multiplier = 1.15;

  double factor(LayerKind kind) const;
  bool operator==(const CostModel&) const = default;
};

struct UNetConfig {
  std::int64_t base_filters = 32;
  int encoder_blocks = 5;
  /// (channels, x, y, z)
  std::array<std::int64_t, 4> input_shape{1, 16, 16, 16};
  CostModel cost_model;
  bool se_blocks = false;

  /// Filter width of encoder block b (1-based): base_filters * 2^(b-1).
  std::int64_t filters(int block) const { return base_filters << (block - 1); }
  bool operator==(const UNetConfig&) const = default;
};

/// Builds the encoder/decoder network e1..eB, dB..d1 with one channel concat
/// per skip connection (inputs ordered skip first, upstream decoder second).
///
/// Block sub-chains:
///   e1:        affine, relu, affine, relu
///   e_b (b>1): downsample, affine, relu, affine, relu
///   d_B:       affine, relu, affine, relu, upsample
///   d_j (j<B): concat, affine, relu, affine, relu [, upsample when j > 1]
///
/// Throws ValidationError when encoder_blocks < 2, a shape entry is not
/// positive, or a spatial axis is not divisible by 2^(B-1).
ModelGraph build_unet(const UNetConfig& config);

enum class ViolationKind {
  kNumbering,
  kCycle,
  kDanglingInput,
  kBadArity,
  kBadCost,
  kSourceCount,
  kSinkCount,
  kOutputMismatch,
  kUnreachable,
  kDeadLayer,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  int layer_id;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
  std::string summary() const;
};

/// Reports every structural invariant violation; never throws.
ValidationReport validate_graph(const ModelGraph& graph);

struct CostTotals {
  double compute = 0.0;
  std::int64_t params = 0;
  std::int64_t activations = 0;

  bool operator==(const CostTotals&) const = default;
};

CostTotals total_cost(const ModelGraph& graph);

/// Affine layers whose input is itself a filter-width feature map, i.e. every
/// affine except the input projection fed directly by the source.
bool is_convolution_like(const ModelGraph& graph, const LayerSpec& layer);

/// Sum of param_count over convolution-like layers.
std::int64_t convolution_param_total(const ModelGraph& graph);

}  // namespace unetpipe

#endif  // UNETPIPE_MODEL_IR_HPP
