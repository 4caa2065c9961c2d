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
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "unetpipe/error.hpp"
#include "unetpipe/executor.hpp"

namespace unetpipe {

namespace {

using Clock = std::chrono::steady_clock;

struct ChannelClosed : std::runtime_error {
  ChannelClosed() : std::runtime_error("pipeline channel closed") {}
};

// Ordered point-to-point queue between two adjacent stages.
template <typename T>
class Channel {
 public:
  void push(T value) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(value));
    }
    cv_.notify_one();
  }

  T pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return closed_ || !queue_.empty(); });
    if (queue_.empty()) throw ChannelClosed();
    T value = std::move(queue_.front());
    queue_.pop_front();
    return value;
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> queue_;
  bool closed_ = false;
};

struct Message {
  int micro = 0;
  std::map<int, Tensor> values;
};

class StageWorker {
 public:
  StageWorker(const SequentialModel& model, const ParameterSet& params, int stage, int first_cell,
              int last_cell, Channel<Message>* fwd_in, Channel<Message>* fwd_out,
              Channel<Message>* bwd_in, Channel<Message>* bwd_out, Clock::time_point epoch)
      : model_(model),
        params_(params),
        stage_(stage),
        last_cell_(last_cell),
        fwd_in_(fwd_in),
        fwd_out_(fwd_out),
        bwd_in_(bwd_in),
        bwd_out_(bwd_out),
        epoch_(epoch) {
    for (int c = first_cell; c < last_cell; ++c) {
      const auto& body = model.cells[c].body;
      layers_.insert(layers_.end(), body.begin(), body.end());
    }
  }

  void prepare(int micros) {
    values_.assign(micros, {});
    received_.assign(micros, {});
    grads_.assign(micros, {});
  }

  void forward(int micro, const Tensor& input) {
    std::map<int, Tensor> incoming;
    if (fwd_in_ != nullptr) incoming = receive(*fwd_in_, micro).values;
    const double start = now();
    auto& values = values_[micro];
    for (auto& [id, t] : incoming) received_[micro].push_back(id);
    values = std::move(incoming);
    for (int id : layers_) {
      const LayerSpec& l = model_.graph.layer(id);
      std::vector<const Tensor*> inputs;
      if (l.kind == LayerKind::kSource) inputs.push_back(&input);
      for (int u : l.inputs) {
        auto it = values.find(u);
        if (it == values.end()) {
          throw ValidationError("stage " + std::to_string(stage_) + ": layer " +
                                std::to_string(id) + " cannot see input " + std::to_string(u));
        }
        inputs.push_back(&it->second);
      }
      values.insert_or_assign(id, apply_layer(l, inputs, params_));
    }
    Message out{micro, {}};
    if (fwd_out_ != nullptr) {
      for (int id : model_.outgoing_layers(last_cell_ - 1)) out.values.emplace(id, values.at(id));
    }
    record(start, Phase::kForward, micro);
    if (fwd_out_ != nullptr) fwd_out_->push(std::move(out));
  }

  void backward(int micro, const LossSpec* loss) {
    std::map<int, std::optional<Tensor>> grad;
    if (bwd_in_ != nullptr) {
      for (auto& [id, t] : receive(*bwd_in_, micro).values) grad[id] = std::move(t);
    }
    const double start = now();
    const auto& values = values_[micro];
    if (loss != nullptr) {
      grad[model_.graph.output_id] = loss->gradient(values.at(model_.graph.output_id));
    }
    auto& g = grads_[micro];
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
      const LayerSpec& l = model_.graph.layer(*it);
      auto found = grad.find(l.id);
      if (found == grad.end() || !found->second || l.kind == LayerKind::kSource) continue;
      std::vector<const Tensor*> inputs;
      for (int u : l.inputs) inputs.push_back(&values.at(u));
      auto d_in = layer_adjoint(l, inputs, values.at(l.id), *found->second, params_, g);
      for (std::size_t j = 0; j < l.inputs.size(); ++j) {
        auto& slot = grad[l.inputs[j]];
        if (slot) {
          slot->data() += d_in[j].data();
        } else {
          slot = std::move(d_in[j]);
        }
      }
    }
    Message out{micro, {}};
    if (bwd_out_ != nullptr) {
      for (int id : received_[micro]) {
        auto found = grad.find(id);
        if (found != grad.end() && found->second) out.values.emplace(id, std::move(*found->second));
      }
    }
    record(start, Phase::kBackward, micro);
    if (bwd_out_ != nullptr) bwd_out_->push(std::move(out));
  }

  const Tensor& value(int micro, int id) const { return values_[micro].at(id); }
  const GradientSet& grads(int micro) const { return grads_[micro]; }
  const std::vector<TimelineEvent>& events() const { return events_; }

 private:
  Message receive(Channel<Message>& channel, int micro) {
    Message m = channel.pop();
    if (m.micro != micro) {
      throw std::logic_error("stage " + std::to_string(stage_) + " expected micro-batch " +
                             std::to_string(micro) + ", received " + std::to_string(m.micro));
    }
    return m;
  }

  double now() const { return std::chrono::duration<double>(Clock::now() - epoch_).count(); }

  void record(double start, Phase phase, int micro) {
    events_.push_back({stage_, start, now(), phase, stage_, micro, 0});
  }

  const SequentialModel& model_;
  const ParameterSet& params_;
  int stage_;
  int last_cell_;
  Channel<Message>* fwd_in_;
  Channel<Message>* fwd_out_;
  Channel<Message>* bwd_in_;
  Channel<Message>* bwd_out_;
  Clock::time_point epoch_;
  std::vector<int> layers_;
  std::vector<std::map<int, Tensor>> values_;
  std::vector<std::vector<int>> received_;
  std::vector<GradientSet> grads_;
  std::vector<TimelineEvent> events_;
};

}  // namespace

PipelineRun run_pipeline(const SequentialModel& model, const Partition& partition,
                         const ParameterSet& params, const Tensor& input, const LossSpec& loss,
                         const ScheduleConfig& cfg, PipelineOptions options) {
  cfg.validate();
  if (input.batch() != cfg.n) {
    throw std::invalid_argument("input batch " + std::to_string(input.batch()) +
                                " differs from batch size " + std::to_string(cfg.n));
  }
  if (static_cast<int>(partition.stages()) != cfg.k) {
    throw std::invalid_argument("partition has " + std::to_string(partition.stages()) +
                                " stages but " + std::to_string(cfg.k) + " workers");
  }
  int covered = 0;
  for (int c : partition.stage_cell_counts) {
    if (c < 1) throw std::invalid_argument("partition has an empty stage");
    covered += c;
  }
  if (covered != static_cast<int>(model.size())) {
    throw std::invalid_argument("partition covers " + std::to_string(covered) + " of " +
                                std::to_string(model.size()) + " cells");
  }
  if (loss.target.batch() != cfg.n) {
    throw ValidationError("loss target batch differs from the input batch");
  }

  const int k = cfg.k;
  const int m = cfg.m;
  const std::int64_t per_micro = cfg.items_per_micro_batch();
  std::vector<Tensor> inputs;
  std::vector<LossSpec> losses;
  for (int mb = 0; mb < m; ++mb) {
    inputs.push_back(input.slice_batch(mb * per_micro, per_micro));
    losses.push_back({loss.target.slice_batch(mb * per_micro, per_micro)});
  }

  std::vector<Channel<Message>> fwd(std::max(k - 1, 0));
  std::vector<Channel<Message>> bwd(std::max(k - 1, 0));
  const auto epoch = Clock::now();
  std::vector<StageWorker> workers;
  workers.reserve(k);
  for (int s = 0; s < k; ++s) {
    auto [first, last] = partition.cell_range(s);
    workers.emplace_back(model, params, s, first, last, s > 0 ? &fwd[s - 1] : nullptr,
                         s + 1 < k ? &fwd[s] : nullptr, s + 1 < k ? &bwd[s] : nullptr,
                         s > 0 ? &bwd[s - 1] : nullptr, epoch);
    workers.back().prepare(m);
  }

  auto run_forward = [&](int s, int mb) { workers[s].forward(mb, inputs[mb]); };
  auto run_backward = [&](int s, int mb) {
    workers[s].backward(mb, s + 1 == k ? &losses[mb] : nullptr);
  };

  if (options.concurrent && k > 1) {
    std::vector<std::exception_ptr> errors(k);
    std::vector<std::thread> threads;
    auto close_all = [&] {
      for (auto& c : fwd) c.close();
      for (auto& c : bwd) c.close();
    };
    for (int s = 0; s < k; ++s) {
      threads.emplace_back([&, s] {
        try {
          for (int mb = 0; mb < m; ++mb) run_forward(s, mb);
          for (int mb = 0; mb < m; ++mb) run_backward(s, mb);
        } catch (...) {
          errors[s] = std::current_exception();
          close_all();
        }
      });
    }
    for (auto& t : threads) t.join();
    std::exception_ptr first_error;
    for (auto& e : errors) {
      if (!e) continue;
      try {
        std::rethrow_exception(e);
      } catch (const ChannelClosed&) {
        if (!first_error) first_error = e;
        continue;
      } catch (...) {
        first_error = e;
        break;
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  } else {
    for (int mb = 0; mb < m; ++mb) {
      for (int s = 0; s < k; ++s) run_forward(s, mb);
    }
    for (int mb = 0; mb < m; ++mb) {
      for (int s = k - 1; s >= 0; --s) run_backward(s, mb);
    }
  }

  PipelineRun run;
  std::vector<Tensor> outputs;
  for (int mb = 0; mb < m; ++mb) {
    outputs.push_back(workers[k - 1].value(mb, model.graph.output_id));
  }
  run.output = concat_batch(outputs);

  for (int mb = 0; mb < m; ++mb) {
    for (const auto& w : workers) {
      for (const auto& [id, g] : w.grads(mb)) {
        auto [total, inserted] = run.grads.try_emplace(id, g);
        if (!inserted) {
          total->second.weight += g.weight;
          total->second.bias += g.bias;
        }
      }
    }
  }
  for (const auto& w : workers) {
    run.timeline.events.insert(run.timeline.events.end(), w.events().begin(), w.events().end());
  }
  for (const auto& e : run.timeline.events) {
    run.timeline.horizon = std::max(run.timeline.horizon, e.end);
  }
  return run;
}

}  // namespace unetpipe
