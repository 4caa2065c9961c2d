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
#include "unetpipe/model_ir.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "unetpipe/error.hpp"

namespace unetpipe {

namespace {

constexpr std::pair<LayerKind, std::string_view> kKindNames[] = {
    {LayerKind::kAffine, "affine"},
    {LayerKind::kRelu, "relu"},
    {LayerKind::kDownsample2x, "downsample2x"},
    {LayerKind::kUpsample2x, "upsample2x"},
    {LayerKind::kConcat, "concat"},
    {LayerKind::kPassthrough, "passthrough"},
    {LayerKind::kSlice, "slice"},
    {LayerKind::kSource, "source"},
    {LayerKind::kSink, "sink"},
};

class UNetBuilder {
 public:
  explicit UNetBuilder(const UNetConfig& config) : config_(config) {}

  int source() {
    LayerSpec l;
    l.name = "input";
    l.kind = LayerKind::kSource;
    l.channels = config_.input_shape[0];
    l.grid = {config_.input_shape[1], config_.input_shape[2], config_.input_shape[3]};
    return add(std::move(l), "");
  }

  int affine(int input, std::int64_t out_channels, const std::string& block,
             const std::string& name) {
    const LayerSpec& in = graph_.layer(input);
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::kAffine;
    l.inputs = {input};
    l.channels = out_channels;
    l.grid = in.grid;
    l.param_count = config_.cost_model.kernel_volume * in.channels * out_channels;
    const double out_elems = static_cast<double>(out_channels * voxel_count(l.grid));
    l.compute_cost = config_.cost_model.factor(LayerKind::kAffine) * out_elems *
                     static_cast<double>(in.channels);
    return add(std::move(l), block);
  }

  int elementwise(LayerKind kind, int input, const std::string& block,
                  const std::string& name) {
    const LayerSpec& in = graph_.layer(input);
    LayerSpec l;
    l.name = name;
    l.kind = kind;
    l.inputs = {input};
    l.channels = in.channels;
    l.grid = in.grid;
    if (kind == LayerKind::kDownsample2x) {
      for (auto& axis : l.grid) axis /= 2;
    } else if (kind == LayerKind::kUpsample2x) {
      for (auto& axis : l.grid) axis *= 2;
    }
    l.compute_cost = config_.cost_model.factor(kind) *
                     static_cast<double>(l.channels * voxel_count(l.grid));
    return add(std::move(l), block);
  }

  int concat(int skip, int upstream, const std::string& block, const std::string& name) {
    const LayerSpec& a = graph_.layer(skip);
    const LayerSpec& b = graph_.layer(upstream);
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::kConcat;
    l.inputs = {skip, upstream};
    l.channels = a.channels + b.channels;
    l.grid = b.grid;
    l.compute_cost = config_.cost_model.factor(LayerKind::kConcat) *
                     static_cast<double>(l.channels * voxel_count(l.grid));
    return add(std::move(l), block);
  }

  ModelGraph finish(int output) {
    LayerSpec l;
    l.name = "output";
    l.kind = LayerKind::kSink;
    l.inputs = {output};
    l.channels = graph_.layer(output).channels;
    l.grid = graph_.layer(output).grid;
    add(std::move(l), "");
    graph_.output_id = output;
    return std::move(graph_);
  }

 private:
  int add(LayerSpec l, const std::string& block) {
    l.id = static_cast<int>(graph_.layers.size());
    l.block = block;
    if (l.kind != LayerKind::kSink) {
      l.activation_elems = l.channels * voxel_count(l.grid);
    }
    if (config_.se_blocks && !block.empty()) {
      l.compute_cost *= config_.cost_model.se_multiplier;
    }
    graph_.layers.push_back(std::move(l));
    return graph_.layers.back().id;
  }

  const UNetConfig& config_;
  ModelGraph graph_;
};

}  // namespace

std::string_view to_string(LayerKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<LayerKind> parse_layer_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

int ModelGraph::source_id() const {
  for (const auto& l : layers) {
    if (l.kind == LayerKind::kSource) return l.id;
  }
  return -1;
}

int ModelGraph::sink_id() const {
  for (const auto& l : layers) {
    if (l.kind == LayerKind::kSink) return l.id;
  }
  return -1;
}

std::vector<std::vector<int>> ModelGraph::consumers() const {
  std::vector<std::vector<int>> out(layers.size());
  for (const auto& l : layers) {
    for (int u : l.inputs) {
      if (u >= 0 && static_cast<std::size_t>(u) < layers.size()) out[u].push_back(l.id);
    }
  }
  return out;
}

double CostModel::factor(LayerKind kind) const {
  auto it = multiplier.find(kind);
  return it == multiplier.end() ? 1.0 : it->second;
}

ModelGraph build_unet(const UNetConfig& config) {
  const int blocks = config.encoder_blocks;
  if (blocks < 2) {
    throw ValidationError("encoder_blocks must be >= 2, got " + std::to_string(blocks));
  }
  if (config.base_filters <= 0) {
    throw ValidationError("base_filters must be positive");
  }
  for (auto d : config.input_shape) {
    if (d <= 0) throw ValidationError("input_shape entries must be positive");
  }
  const std::int64_t reduction = std::int64_t{1} << (blocks - 1);
  for (int axis = 1; axis < 4; ++axis) {
    if (config.input_shape[axis] % reduction != 0) {
      throw ValidationError("input_shape spatial axis " + std::to_string(axis) + " (" +
                            std::to_string(config.input_shape[axis]) +
                            ") is not divisible by " + std::to_string(reduction));
    }
  }

  UNetBuilder b(config);
  int x = b.source();
  std::vector<int> skips(blocks + 1, -1);

  for (int e = 1; e <= blocks; ++e) {
    const std::string tag = "e" + std::to_string(e);
    if (e > 1) x = b.elementwise(LayerKind::kDownsample2x, x, tag, tag + ".down");
    x = b.affine(x, config.filters(e), tag, tag + ".affine1");
    x = b.elementwise(LayerKind::kRelu, x, tag, tag + ".relu1");
    x = b.affine(x, config.filters(e), tag, tag + ".affine2");
    x = b.elementwise(LayerKind::kRelu, x, tag, tag + ".relu2");
    skips[e] = x;
  }

  for (int d = blocks; d >= 1; --d) {
    const std::string tag = "d" + std::to_string(d);
    if (d < blocks) x = b.concat(skips[d], x, tag, tag + ".concat");
    x = b.affine(x, config.filters(d), tag, tag + ".affine1");
    x = b.elementwise(LayerKind::kRelu, x, tag, tag + ".relu1");
    x = b.affine(x, config.filters(d > 1 ? d - 1 : 1), tag, tag + ".affine2");
    x = b.elementwise(LayerKind::kRelu, x, tag, tag + ".relu2");
    if (d > 1) x = b.elementwise(LayerKind::kUpsample2x, x, tag, tag + ".up");
  }
  return b.finish(x);
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kNumbering: return "numbering";
    case ViolationKind::kCycle: return "cycle";
    case ViolationKind::kDanglingInput: return "dangling_input";
    case ViolationKind::kBadArity: return "bad_arity";
    case ViolationKind::kBadCost: return "bad_cost";
    case ViolationKind::kSourceCount: return "source_count";
    case ViolationKind::kSinkCount: return "sink_count";
    case ViolationKind::kOutputMismatch: return "output_mismatch";
    case ViolationKind::kUnreachable: return "unreachable";
    case ViolationKind::kDeadLayer: return "dead_layer";
  }
  return "unknown";
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << to_string(v.kind) << " at layer " << v.layer_id << ": " << v.message << '\n';
  }
  return os.str();
}

ValidationReport validate_graph(const ModelGraph& graph) {
  ValidationReport report;
  auto flag = [&](ViolationKind kind, int id, std::string msg) {
    report.violations.push_back({kind, id, std::move(msg)});
  };

  const int n = static_cast<int>(graph.layers.size());
  for (int i = 0; i < n; ++i) {
    if (graph.layers[i].id != i) {
      flag(ViolationKind::kNumbering, graph.layers[i].id,
           "declared at position " + std::to_string(i));
    }
  }

  // Edges usable for reachability: only backward references to existing layers.
  std::vector<std::vector<int>> good_inputs(n);
  int sources = 0;
  int sinks = 0;
  int sink_pos = -1;
  for (int i = 0; i < n; ++i) {
    const LayerSpec& l = graph.layers[i];
    for (int u : l.inputs) {
      if (u < 0 || u >= n) {
        flag(ViolationKind::kDanglingInput, l.id, "input " + std::to_string(u) + " does not exist");
      } else if (u >= i) {
        flag(ViolationKind::kCycle, l.id,
             "input " + std::to_string(u) + " is not declared before the layer");
      } else {
        good_inputs[i].push_back(u);
      }
    }

    const std::size_t arity = l.inputs.size();
    bool arity_ok = true;
    switch (l.kind) {
      case LayerKind::kSource: arity_ok = arity == 0; break;
      case LayerKind::kConcat: arity_ok = arity >= 2; break;
      case LayerKind::kSink: arity_ok = arity >= 1; break;
      default: arity_ok = arity <= 1; break;
    }
    if (!arity_ok) {
      flag(ViolationKind::kBadArity, l.id,
           std::string(to_string(l.kind)) + " with " + std::to_string(arity) + " inputs");
    }

    if (!std::isfinite(l.compute_cost) || l.compute_cost < 0.0 || l.param_count < 0 ||
        l.activation_elems < 0) {
      flag(ViolationKind::kBadCost, l.id, "costs must be finite and non-negative");
    }
    if (l.kind == LayerKind::kSource) ++sources;
    if (l.kind == LayerKind::kSink) {
      ++sinks;
      sink_pos = i;
    }
  }
  if (sources != 1) {
    flag(ViolationKind::kSourceCount, -1, std::to_string(sources) + " source layers");
  }
  if (sinks != 1) {
    flag(ViolationKind::kSinkCount, -1, std::to_string(sinks) + " sink layers");
  }
  if (sinks == 1) {
    const LayerSpec& sink = graph.layers[sink_pos];
    if (sink.inputs.size() != 1 || sink.inputs[0] != graph.output_id) {
      flag(ViolationKind::kOutputMismatch, sink.id,
           "output_id " + std::to_string(graph.output_id) + " is not the sink's producer");
    }
  }

  // Forward reachability from the source.
  std::vector<char> reached(n, 0);
  for (int i = 0; i < n; ++i) {
    if (graph.layers[i].kind == LayerKind::kSource) {
      reached[i] = 1;
      continue;
    }
    for (int u : good_inputs[i]) {
      if (reached[u]) reached[i] = 1;
    }
  }
  // Backward liveness from the sink.
  std::vector<char> live(n, 0);
  if (sink_pos >= 0) live[sink_pos] = 1;
  for (int i = n - 1; i >= 0; --i) {
    if (!live[i]) continue;
    for (int u : good_inputs[i]) live[u] = 1;
  }
  for (int i = 0; i < n; ++i) {
    if (!reached[i]) {
      flag(ViolationKind::kUnreachable, graph.layers[i].id, "not reachable from the source");
    }
    if (!live[i] && sink_pos >= 0) {
      flag(ViolationKind::kDeadLayer, graph.layers[i].id, "does not reach the output");
    }
  }
  return report;
}

CostTotals total_cost(const ModelGraph& graph) {
  CostTotals t;
  for (const auto& l : graph.layers) {
    t.compute += l.compute_cost;
    t.params += l.param_count;
    t.activations += l.activation_elems;
  }
  return t;
}

bool is_convolution_like(const ModelGraph& graph, const LayerSpec& layer) {
  if (layer.kind != LayerKind::kAffine || layer.inputs.size() != 1) return false;
  return graph.layer(layer.inputs[0]).kind != LayerKind::kSource;
}

std::int64_t convolution_param_total(const ModelGraph& graph) {
  std::int64_t total = 0;
  for (const auto& l : graph.layers) {
    if (is_convolution_like(graph, l)) total += l.param_count;
  }
  return total;
}

}  // namespace unetpipe
