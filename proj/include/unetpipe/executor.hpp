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
#ifndef UNETPIPE_EXECUTOR_HPP
#define UNETPIPE_EXECUTOR_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "unetpipe/kernels.hpp"
#include "unetpipe/model_ir.hpp"
#include "unetpipe/partitioner.hpp"
#include "unetpipe/pipeline_sim.hpp"
#include "unetpipe/sequentializer.hpp"
#include "unetpipe/tensor.hpp"

namespace unetpipe {

/// Per-voxel channel mixing y = W x + b, the executor's stand-in for a
/// convolution. weight is (out channels x in channels).
template <typename Scalar>
struct AffineParams {
  kernels::Mat<Scalar> weight;
  kernels::Vec<Scalar> bias;
};

/// Affine layer id -> parameters.
using ParameterSet = std::map<int, AffineParams<double>>;
/// Affine layer id -> parameter gradients, shaped like the parameters.
using GradientSet = ParameterSet;

/// Draws weights uniformly from [-1, 1] / sqrt(in channels) and biases from
/// [-0.1, 0.1] with a 64-bit Mersenne twister seeded by `seed`.
ParameterSet init_parameters(const ModelGraph& graph, std::uint64_t seed);

/// Zero gradients for every parameter in `params`.
GradientSet zero_gradients(const ParameterSet& params);

/// Sum of squared errors against a fixed target.
struct LossSpec {
  Tensor target;

  double evaluate(const Tensor& output) const;
  /// d loss / d output = 2 (output - target).
  Tensor gradient(const Tensor& output) const;
};

struct ForwardResult {
  Tensor output;
  /// Output of every evaluated layer, indexed by layer id.
  std::vector<std::optional<Tensor>> cache;
};

/// Shape of the tensor a layer emits for a batch of `batch` items:
/// (batch, channels) for a 1x1x1 grid, (batch, channels, x, y, z) otherwise.
std::vector<std::int64_t> layer_shape(const LayerSpec& layer, std::int64_t batch);

/// Evaluates one layer on already computed inputs. Throws ValidationError
/// naming the layer id on any shape mismatch.
Tensor apply_layer(const LayerSpec& layer, const std::vector<const Tensor*>& inputs,
                   const ParameterSet& params);

/// Reverse of apply_layer: returns one gradient per input and accumulates
/// parameter gradients into `grads`.
std::vector<Tensor> layer_adjoint(const LayerSpec& layer,
                                  const std::vector<const Tensor*>& inputs, const Tensor& output,
                                  const Tensor& d_output, const ParameterSet& params,
                                  GradientSet& grads);

/// Evaluates the graph layer by layer. The input must match the source layer's
/// channels and grid.
ForwardResult forward_serial(const ModelGraph& graph, const ParameterSet& params,
                             const Tensor& input);
/// Evaluates the chain cell by cell; each cell sees only what its predecessor
/// handed on (main output plus slots).
ForwardResult forward_serial(const SequentialModel& model, const ParameterSet& params,
                             const Tensor& input);

GradientSet backward_serial(const ModelGraph& graph, const ParameterSet& params,
                            const Tensor& input, const LossSpec& loss);
GradientSet backward_serial(const SequentialModel& model, const ParameterSet& params,
                            const Tensor& input, const LossSpec& loss);

/// Worst per-tensor relative deviation max|a - b| / max(|a|_inf, |b|_inf)
/// over every weight and bias. Mismatched key sets or shapes yield infinity.
double max_relative_error(const GradientSet& a, const GradientSet& b);

/// Central differences with step `epsilon` for every parameter, compared with
/// backward_serial through max_relative_error. Throws std::invalid_argument
/// unless epsilon > 0.
double check_grad_finite_difference(const ModelGraph& graph, const ParameterSet& params,
                                    const Tensor& input, const LossSpec& loss, double epsilon);

/// Smallest |value| entering any relu; infinity when the graph has none.
double min_relu_margin(const ModelGraph& graph, const ParameterSet& params, const Tensor& input);

struct PipelineOptions {
  /// One worker thread per stage; otherwise stages run in one thread in the
  /// same order of operations.
  bool concurrent = true;
};

struct PipelineRun {
  Tensor output;
  GradientSet grads;
  /// Observed per-stage events in seconds since the run started.
  Timeline timeline;
};

/// Splits `input` into cfg.m micro-batches, runs the forwards of all of them
/// through the stages, then their backwards, and sums the gradients in
/// micro-batch order. Throws std::invalid_argument when cfg.n differs from
/// the input batch, cfg.m does not divide it, or the partition does not have
/// cfg.k stages over the model's cells.
PipelineRun run_pipeline(const SequentialModel& model, const Partition& partition,
                         const ParameterSet& params, const Tensor& input, const LossSpec& loss,
                         const ScheduleConfig& cfg, PipelineOptions options = {});

}  // namespace unetpipe

#endif  // UNETPIPE_EXECUTOR_HPP
