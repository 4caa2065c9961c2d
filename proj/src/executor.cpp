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
#include "unetpipe/executor.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "unetpipe/error.hpp"

namespace unetpipe {

namespace {

[[noreturn]] void shape_error(const LayerSpec& layer, const std::string& what) {
  throw ValidationError("layer " + std::to_string(layer.id) + " (" + layer.name + "): " + what);
}

std::string shape_text(const std::vector<std::int64_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    s += (i == 0 ? "" : ",") + std::to_string(shape[i]);
  }
  return s + ")";
}

void expect_arity(const LayerSpec& layer, const std::vector<const Tensor*>& inputs,
                  std::size_t n) {
  if (inputs.size() != n) {
    shape_error(layer, "expects " + std::to_string(n) + " inputs, got " +
                           std::to_string(inputs.size()));
  }
}

void expect_item(const LayerSpec& layer, const Tensor& in, std::int64_t channels,
                 std::int64_t voxels) {
  if (in.channels() != channels || in.voxels() != voxels) {
    shape_error(layer, "input " + shape_text(in.shape()) + " does not have " +
                           std::to_string(channels) + " channels of " + std::to_string(voxels) +
                           " voxels");
  }
}

const AffineParams<double>& params_of(const LayerSpec& layer, const ParameterSet& params) {
  auto it = params.find(layer.id);
  if (it == params.end()) shape_error(layer, "missing parameters");
  return it->second;
}

Grid doubled(const Grid& g) { return {g[0] * 2, g[1] * 2, g[2] * 2}; }

void accumulate(std::optional<Tensor>& slot, const Tensor& value) {
  if (slot) {
    slot->data() += value.data();
  } else {
    slot = value;
  }
}

}  // namespace

ParameterSet init_parameters(const ModelGraph& graph, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  ParameterSet params;
  for (const auto& l : graph.layers) {
    if (l.kind != LayerKind::kAffine || l.inputs.size() != 1) continue;
    const auto in = graph.layer(l.inputs[0]).channels;
    const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::int64_t>(in, 1)));
    AffineParams<double> p;
    p.weight.resize(l.channels, in);
    for (Eigen::Index r = 0; r < p.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.weight.cols(); ++c) p.weight(r, c) = unit(rng) * scale;
    }
    p.bias.resize(l.channels);
    for (Eigen::Index r = 0; r < p.bias.size(); ++r) p.bias(r) = 0.1 * unit(rng);
    params.emplace(l.id, std::move(p));
  }
  return params;
}

GradientSet zero_gradients(const ParameterSet& params) {
  GradientSet grads;
  for (const auto& [id, p] : params) {
    grads[id] = {kernels::Mat<double>::Zero(p.weight.rows(), p.weight.cols()),
                 kernels::Vec<double>::Zero(p.bias.size())};
  }
  return grads;
}

double LossSpec::evaluate(const Tensor& output) const {
  if (output.shape() != target.shape()) {
    throw ValidationError("loss target " + shape_text(target.shape()) +
                          " does not match output " + shape_text(output.shape()));
  }
  return (output.data() - target.data()).squaredNorm();
}

Tensor LossSpec::gradient(const Tensor& output) const {
  if (output.shape() != target.shape()) {
    throw ValidationError("loss target " + shape_text(target.shape()) +
                          " does not match output " + shape_text(output.shape()));
  }
  return Tensor(output.shape(), 2.0 * (output.data() - target.data()));
}

std::vector<std::int64_t> layer_shape(const LayerSpec& layer, std::int64_t batch) {
  if (layer.grid == Grid{1, 1, 1}) return {batch, layer.channels};
  return {batch, layer.channels, layer.grid[0], layer.grid[1], layer.grid[2]};
}

Tensor apply_layer(const LayerSpec& layer, const std::vector<const Tensor*>& inputs,
                   const ParameterSet& params) {
  const std::int64_t batch = inputs.empty() ? 0 : inputs.front()->batch();
  for (const Tensor* in : inputs) {
    if (in->batch() != batch) shape_error(layer, "inputs disagree on batch size");
  }
  Tensor out(layer_shape(layer, batch));
  const std::int64_t voxels = voxel_count(layer.grid);

  switch (layer.kind) {
    case LayerKind::kSource:
    case LayerKind::kPassthrough:
    case LayerKind::kSink:
    case LayerKind::kRelu: {
      expect_arity(layer, inputs, 1);
      expect_item(layer, *inputs[0], layer.channels, voxels);
      if (layer.kind == LayerKind::kRelu) {
        out.data() = inputs[0]->data().cwiseMax(0.0);
      } else {
        out.data() = inputs[0]->data();
      }
      break;
    }
    case LayerKind::kAffine: {
      expect_arity(layer, inputs, 1);
      const auto& p = params_of(layer, params);
      if (p.weight.rows() != layer.channels || p.bias.size() != layer.channels) {
        shape_error(layer, "parameters do not produce " + std::to_string(layer.channels) +
                               " channels");
      }
      expect_item(layer, *inputs[0], p.weight.cols(), voxels);
      for (std::int64_t i = 0; i < batch; ++i) {
        out.item(i) = kernels::affine<double>(p.weight, p.bias, inputs[0]->item(i));
      }
      break;
    }
    case LayerKind::kDownsample2x: {
      expect_arity(layer, inputs, 1);
      const Grid fine = doubled(layer.grid);
      expect_item(layer, *inputs[0], layer.channels, voxel_count(fine));
      for (std::int64_t i = 0; i < batch; ++i) {
        out.item(i) = kernels::downsample<double>(inputs[0]->item(i), fine);
      }
      break;
    }
    case LayerKind::kUpsample2x: {
      expect_arity(layer, inputs, 1);
      for (auto axis : layer.grid) {
        if (axis % 2 != 0) shape_error(layer, "odd output grid for 2x upsampling");
      }
      expect_item(layer, *inputs[0], layer.channels, voxels / 8);
      for (std::int64_t i = 0; i < batch; ++i) {
        out.item(i) = kernels::upsample<double>(inputs[0]->item(i), layer.grid);
      }
      break;
    }
    case LayerKind::kConcat: {
      if (inputs.size() < 2) shape_error(layer, "concat needs at least 2 inputs");
      std::int64_t channels = 0;
      for (const Tensor* in : inputs) {
        expect_item(layer, *in, in->channels(), voxels);
        channels += in->channels();
      }
      if (channels != layer.channels) {
        shape_error(layer, "inputs provide " + std::to_string(channels) + " channels, expected " +
                               std::to_string(layer.channels));
      }
      for (std::int64_t i = 0; i < batch; ++i) {
        auto dst = out.item(i);
        std::int64_t row = 0;
        for (const Tensor* in : inputs) {
          dst.middleRows(row, in->channels()) = in->item(i);
          row += in->channels();
        }
      }
      break;
    }
    case LayerKind::kSlice: {
      expect_arity(layer, inputs, 1);
      if (inputs[0]->channels() < layer.channels) {
        shape_error(layer, "cannot slice " + std::to_string(layer.channels) + " channels from " +
                               std::to_string(inputs[0]->channels()));
      }
      expect_item(layer, *inputs[0], inputs[0]->channels(), voxels);
      for (std::int64_t i = 0; i < batch; ++i) {
        out.item(i) = inputs[0]->item(i).topRows(layer.channels);
      }
      break;
    }
  }
  return out;
}

std::vector<Tensor> layer_adjoint(const LayerSpec& layer,
                                  const std::vector<const Tensor*>& inputs, const Tensor& output,
                                  const Tensor& d_output, const ParameterSet& params,
                                  GradientSet& grads) {
  const std::int64_t batch = output.batch();
  std::vector<Tensor> d_in;
  d_in.reserve(inputs.size());
  for (const Tensor* in : inputs) d_in.emplace_back(in->shape());

  switch (layer.kind) {
    case LayerKind::kSource:
    case LayerKind::kPassthrough:
    case LayerKind::kSink:
      d_in[0].data() = d_output.data();
      break;
    case LayerKind::kRelu:
      d_in[0].data() = (output.data().array() > 0.0).select(d_output.data(), 0.0);
      break;
    case LayerKind::kAffine: {
      const auto& p = params_of(layer, params);
      auto& g = grads[layer.id];
      if (g.weight.size() == 0) {
        g.weight = kernels::Mat<double>::Zero(p.weight.rows(), p.weight.cols());
        g.bias = kernels::Vec<double>::Zero(p.bias.size());
      }
      for (std::int64_t i = 0; i < batch; ++i) {
        d_in[0].item(i) = kernels::affine_adjoint<double>(p.weight, inputs[0]->item(i),
                                                          d_output.item(i), g.weight, g.bias);
      }
      break;
    }
    case LayerKind::kDownsample2x: {
      const Grid fine = doubled(layer.grid);
      for (std::int64_t i = 0; i < batch; ++i) {
        d_in[0].item(i) = kernels::downsample_adjoint<double>(d_output.item(i), fine);
      }
      break;
    }
    case LayerKind::kUpsample2x:
      for (std::int64_t i = 0; i < batch; ++i) {
        d_in[0].item(i) = kernels::upsample_adjoint<double>(d_output.item(i), layer.grid);
      }
      break;
    case LayerKind::kConcat:
      for (std::int64_t i = 0; i < batch; ++i) {
        std::int64_t row = 0;
        for (std::size_t j = 0; j < inputs.size(); ++j) {
          d_in[j].item(i) = d_output.item(i).middleRows(row, inputs[j]->channels());
          row += inputs[j]->channels();
        }
      }
      break;
    case LayerKind::kSlice:
      for (std::int64_t i = 0; i < batch; ++i) {
        d_in[0].item(i).topRows(layer.channels) = d_output.item(i);
      }
      break;
  }
  return d_in;
}

ForwardResult forward_serial(const ModelGraph& graph, const ParameterSet& params,
                             const Tensor& input) {
  const int source = graph.source_id();
  if (source < 0) throw ValidationError("graph has no source layer");
  const auto expected = layer_shape(graph.layer(source), input.batch());
  if (input.shape() != expected) {
    throw ValidationError("input " + shape_text(input.shape()) + " does not match source shape " +
                          shape_text(expected));
  }
  ForwardResult result;
  result.cache.resize(graph.size());
  for (const auto& l : graph.layers) {
    std::vector<const Tensor*> inputs;
    if (l.kind == LayerKind::kSource) {
      inputs.push_back(&input);
    }
    for (int u : l.inputs) {
      if (u < 0 || u >= l.id || !result.cache[u]) {
        shape_error(l, "input " + std::to_string(u) + " is not available");
      }
      inputs.push_back(&*result.cache[u]);
    }
    result.cache[l.id] = apply_layer(l, inputs, params);
  }
  if (graph.output_id < 0 || !result.cache.at(graph.output_id)) {
    throw ValidationError("graph output " + std::to_string(graph.output_id) + " was not computed");
  }
  result.output = *result.cache[graph.output_id];
  return result;
}

ForwardResult forward_serial(const SequentialModel& model, const ParameterSet& params,
                             const Tensor& input) {
  const ModelGraph& graph = model.graph;
  const int source = graph.source_id();
  if (source < 0) throw ValidationError("graph has no source layer");
  const auto expected = layer_shape(graph.layer(source), input.batch());
  if (input.shape() != expected) {
    throw ValidationError("input " + shape_text(input.shape()) + " does not match source shape " +
                          shape_text(expected));
  }
  ForwardResult result;
  result.cache.resize(graph.size());
  std::map<int, Tensor> incoming;
  for (std::size_t c = 0; c < model.size(); ++c) {
    std::map<int, const Tensor*> visible;
    for (const auto& [id, t] : incoming) visible[id] = &t;
    for (int id : model.cells[c].body) {
      const LayerSpec& l = graph.layer(id);
      std::vector<const Tensor*> inputs;
      if (l.kind == LayerKind::kSource) inputs.push_back(&input);
      for (int u : l.inputs) {
        auto it = visible.find(u);
        if (it == visible.end()) {
          shape_error(l, "cell " + std::to_string(c) + " cannot see input " + std::to_string(u));
        }
        inputs.push_back(it->second);
      }
      result.cache[id] = apply_layer(l, inputs, params);
      visible[id] = &*result.cache[id];
    }
    std::map<int, Tensor> next;
    for (int id : model.outgoing_layers(c)) next.emplace(id, *visible.at(id));
    incoming = std::move(next);
  }
  if (graph.output_id < 0 || !result.cache.at(graph.output_id)) {
    throw ValidationError("graph output " + std::to_string(graph.output_id) + " was not computed");
  }
  result.output = *result.cache[graph.output_id];
  return result;
}

GradientSet backward_serial(const ModelGraph& graph, const ParameterSet& params,
                            const Tensor& input, const LossSpec& loss) {
  const ForwardResult fwd = forward_serial(graph, params, input);
  std::vector<std::optional<Tensor>> grad(graph.size());
  grad[graph.output_id] = loss.gradient(fwd.output);
  GradientSet grads;
  for (int id = static_cast<int>(graph.size()) - 1; id >= 0; --id) {
    const LayerSpec& l = graph.layer(id);
    if (!grad[id] || l.kind == LayerKind::kSource) continue;
    std::vector<const Tensor*> inputs;
    for (int u : l.inputs) inputs.push_back(&*fwd.cache[u]);
    auto d_in = layer_adjoint(l, inputs, *fwd.cache[id], *grad[id], params, grads);
    for (std::size_t j = 0; j < l.inputs.size(); ++j) accumulate(grad[l.inputs[j]], d_in[j]);
  }
  return grads;
}

GradientSet backward_serial(const SequentialModel& model, const ParameterSet& params,
                            const Tensor& input, const LossSpec& loss) {
  return backward_serial(model.graph, params, input, loss);
}

double max_relative_error(const GradientSet& a, const GradientSet& b) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (a.size() != b.size()) return kInf;
  double worst = 0.0;
  auto compare = [&](const auto& x, const auto& y) {
    if (x.rows() != y.rows() || x.cols() != y.cols()) return kInf;
    if (x.size() == 0) return 0.0;
    const double diff = (x - y).cwiseAbs().maxCoeff();
    const double scale = std::max(x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff());
    if (diff == 0.0) return 0.0;
    return scale == 0.0 ? kInf : diff / scale;
  };
  for (const auto& [id, ga] : a) {
    auto it = b.find(id);
    if (it == b.end()) return kInf;
    worst = std::max({worst, compare(ga.weight, it->second.weight),
                      compare(ga.bias, it->second.bias)});
  }
  return worst;
}

double check_grad_finite_difference(const ModelGraph& graph, const ParameterSet& params,
                                    const Tensor& input, const LossSpec& loss, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const GradientSet analytic = backward_serial(graph, params, input, loss);
  GradientSet numeric = zero_gradients(params);
  ParameterSet probe = params;
  auto central = [&](double& value) {
    const double saved = value;
    value = saved + epsilon;
    const Tensor up = forward_serial(graph, probe, input).output;
    value = saved - epsilon;
    const Tensor down = forward_serial(graph, probe, input).output;
    value = saved;
    // (u - t)^2 - (d - t)^2 = (u - d)(u + d - 2t), without cancelling two
    // large sums against each other.
    const auto& u = up.data().array();
    const auto& d = down.data().array();
    const double diff = ((u - d) * (u + d - 2.0 * loss.target.data().array())).sum();
    return diff / (2.0 * epsilon);
  };
  for (auto& [id, p] : probe) {
    auto& g = numeric[id];
    for (Eigen::Index r = 0; r < p.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.weight.cols(); ++c) g.weight(r, c) = central(p.weight(r, c));
    }
    for (Eigen::Index r = 0; r < p.bias.size(); ++r) g.bias(r) = central(p.bias(r));
  }
  // Parameters that receive no gradient (unreachable from the loss) are absent
  // from the analytic set; compare them as zeros.
  GradientSet full = zero_gradients(params);
  for (const auto& [id, g] : analytic) full[id] = g;
  return max_relative_error(full, numeric);
}

double min_relu_margin(const ModelGraph& graph, const ParameterSet& params, const Tensor& input) {
  const ForwardResult fwd = forward_serial(graph, params, input);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& l : graph.layers) {
    if (l.kind != LayerKind::kRelu) continue;
    const Tensor& in = *fwd.cache[l.inputs[0]];
    if (in.size() > 0) margin = std::min(margin, in.data().cwiseAbs().minCoeff());
  }
  return margin;
}

}  // namespace unetpipe
