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
#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "unetpipe/curriculum.hpp"
#include "unetpipe/error.hpp"
#include "unetpipe/executor.hpp"
#include "unetpipe/graph_io.hpp"
#include "unetpipe/partitioner.hpp"
#include "unetpipe/sequentializer.hpp"

namespace unetpipe::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kVerifyTolerance = 1e-9;

enum class Format { kTable, kMachine };

// Ordered key/value summary rendered as an aligned table or `key=value` lines.
class Summary {
 public:
  void add(std::string key, std::string value) {
    rows_.emplace_back(std::move(key), std::move(value));
  }
  void add(std::string key, double value) { add(std::move(key), format_double(value)); }
  void add(std::string key, std::int64_t value) { add(std::move(key), std::to_string(value)); }
  void add(std::string key, int value) { add(std::move(key), std::to_string(value)); }

  std::string render(Format format) const {
    std::ostringstream os;
    std::size_t width = 0;
    for (const auto& [k, v] : rows_) width = std::max(width, k.size());
    for (const auto& [k, v] : rows_) {
      if (format == Format::kMachine) {
        os << k << '=' << v << '\n';
      } else {
        os << std::left << std::setw(static_cast<int>(width) + 2) << k << v << '\n';
      }
    }
    return os.str();
  }

 private:
  std::vector<std::pair<std::string, std::string>> rows_;
};

struct Context {
  std::uint64_t seed = 0;
  std::string out_path;
  Format format = Format::kTable;
  std::string command;
  std::vector<std::string> inputs;
};

// Failure of the checked property itself (timeline or gradient mismatch). The
// artifact describing the failure is still emitted.
struct CheckFailed : std::runtime_error {
  CheckFailed(const std::string& reason, std::string text)
      : std::runtime_error(reason), artifact(std::move(text)) {}
  std::string artifact;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_input(Context& ctx, const std::string& path) {
  ctx.inputs.push_back(path);
  return read_text_file(path);
}

ModelGraph load_graph_text(const fs::path& path, const std::string& text) {
  if (path.extension() == ".json") return build_unet(parse_model_spec(text));
  return parse_edge_list(text);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ValidationError("bad integer '" + token + "' in list '" + text + "'");
    }
  }
  return out;
}

Grid parse_shape(const std::string& text) {
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), 'x', ',');
  auto v = parse_int_list(normalized);
  if (v.size() == 1) v = {v[0], v[0], v[0]};
  if (v.size() != 3) throw ValidationError("shape needs 1 or 3 extents, got '" + text + "'");
  return {v[0], v[1], v[2]};
}

// Overrides settable from the command line on top of a scenario or defaults.
struct ScheduleFlags {
  std::optional<int> k;
  std::optional<int> m;
  std::optional<int> n;
  std::optional<double> backward_ratio;
  std::optional<double> comm_cost;
  std::optional<bool> barrier;
  std::optional<int> repeat;

  void add_to(CLI::App* app) {
    app->add_option("--k", k, "Device count");
    app->add_option("--micro-batches", m, "Micro-batches per mini-batch");
    app->add_option("--batch-size", n, "Mini-batch size in items");
    app->add_option("--backward-ratio", backward_ratio, "Backward cost relative to forward");
    app->add_option("--comm-cost", comm_cost, "Transfer time per boundary and micro-batch");
    app->add_flag("--barrier,!--no-barrier", barrier, "Backward waits for every forward");
    app->add_option("--repeat", repeat, "Mini-batches streamed through the pipeline");
  }

  void apply(ScheduleConfig& cfg) const {
    if (k) cfg.k = *k;
    if (m) cfg.m = *m;
    if (n) cfg.n = *n;
    if (backward_ratio) cfg.backward_cost_ratio = *backward_ratio;
    if (comm_cost) cfg.comm_cost_per_boundary = *comm_cost;
    if (barrier) cfg.phase_barrier = *barrier;
    if (repeat) cfg.repeat_batches = *repeat;
  }
};

void add_metrics(Summary& s, const PipelineMetrics& mt) {
  s.add("makespan", mt.makespan);
  s.add("throughput", mt.throughput);
  if (mt.steady_state_throughput) s.add("steady_state_throughput", *mt.steady_state_throughput);
  s.add("utilization", mt.utilization);
  s.add("bubble_fraction", mt.bubble_fraction);
  s.add("forward_horizon", mt.forward_horizon);
  s.add("forward_utilization", mt.forward_utilization);
  s.add("backward_horizon", mt.backward_horizon);
  s.add("backward_utilization", mt.backward_utilization);
  std::int64_t peak = 0;
  for (std::size_t d = 0; d < mt.per_device_peak_memory.size(); ++d) {
    s.add("peak_memory_device_" + std::to_string(d), mt.per_device_peak_memory[d]);
    peak = std::max(peak, mt.per_device_peak_memory[d]);
  }
  s.add("peak_memory_max", peak);
}

// ---------------------------------------------------------------------------
// Commands. Each returns its primary artifact.

std::string cmd_build(Context& ctx, const std::string& spec_path) {
  const UNetConfig config = parse_model_spec(read_input(ctx, spec_path));
  const ModelGraph graph = build_unet(config);
  const auto report = validate_graph(graph);
  if (!report.ok()) throw ValidationError("built graph is invalid:\n" + report.summary());
  return export_edge_list(graph);
}

std::string cmd_transform(Context& ctx, const std::string& graph_path,
                          const std::string& granularity) {
  const ModelGraph graph = load_graph_text(graph_path, read_input(ctx, graph_path));
  CellGranularity g = CellGranularity::kBlock;
  if (granularity == "layer") {
    g = CellGranularity::kLayer;
  } else if (granularity != "block") {
    throw ValidationError("unknown granularity '" + granularity + "'");
  }
  const SequentialModel seq = sequentialize(graph, g);
  const auto problems = check_chain(seq);
  if (!problems.empty()) throw ValidationError("chain property violated: " + problems.front());
  return export_sequential(seq);
}

std::string cmd_partition(Context& ctx, const std::string& seq_path, std::optional<int> k,
                          const std::string& objective_name, const std::string& boundaries) {
  const SequentialModel seq = parse_sequential(read_input(ctx, seq_path));
  const auto objective = parse_objective(objective_name);
  if (!objective) throw ValidationError("unknown objective '" + objective_name + "'");
  Partition p;
  if (!boundaries.empty()) {
    const auto cuts = parse_int_list(boundaries);
    if (k && *k != static_cast<int>(cuts.size()) + 1) {
      throw ValidationError("--k disagrees with the number of boundaries");
    }
    p = partition_fixed(seq, cuts);
  } else {
    p = partition_balanced(seq, k.value_or(1), *objective);
  }
  return partition_report_json(p, *objective);
}

std::string cmd_simulate(Context& ctx, const std::string& partition_path,
                         const std::string& scenario_path, const ScheduleFlags& flags,
                         const std::string& timeline_path) {
  if (partition_path.empty() == scenario_path.empty()) {
    throw ValidationError("simulate needs exactly one of --partition or --scenario");
  }
  Summary s;
  SimulationResult result;
  int devices = 0;
  bool barrier = true;
  int micros = 1;
  std::string schedule;
  if (!partition_path.empty()) {
    const Partition p = parse_partition_report(read_input(ctx, partition_path));
    ScheduleConfig cfg;
    cfg.k = static_cast<int>(p.stages());
    flags.apply(cfg);
    if (!flags.n) cfg.n = cfg.m;
    result = simulate_gpipe(p, cfg);
    devices = cfg.k;
    barrier = cfg.phase_barrier;
    micros = cfg.m;
    schedule = "gpipe";
  } else {
    ctx.inputs.push_back(scenario_path);
    Scenario sc = load_scenario(scenario_path);
    ctx.inputs.push_back(sc.model.string());
    flags.apply(sc.config);
    auto outcome = simulate_scenario(sc);
    result = std::move(outcome.result);
    devices = sc.config.k;
    barrier = sc.config.phase_barrier;
    micros = sc.config.m;
    schedule = outcome.schedule;
  }
  auto problems = check_timeline(result.timeline);
  if (schedule == "gpipe") {
    auto more = check_gpipe_dependencies(result.timeline, devices, micros, barrier);
    problems.insert(problems.end(), more.begin(), more.end());
  }
  s.add("schedule", schedule);
  s.add("devices", devices);
  add_metrics(s, result.metrics);
  s.add("timeline_events", static_cast<std::int64_t>(result.timeline.events.size()));
  s.add("timeline_violations", static_cast<std::int64_t>(problems.size()));
  if (!timeline_path.empty()) write_text_file(timeline_path, export_timeline(result.timeline));
  if (!problems.empty()) {
    throw CheckFailed("timeline violates schedule invariants: " + problems.front(),
                      s.render(ctx.format));
  }
  return s.render(ctx.format);
}

std::string cmd_verify(Context& ctx, const std::string& seq_path,
                       const std::string& partition_path, const ScheduleFlags& flags) {
  const SequentialModel seq = parse_sequential(read_input(ctx, seq_path));
  const Partition p = parse_partition_report(read_input(ctx, partition_path));
  ScheduleConfig cfg;
  cfg.k = static_cast<int>(p.stages());
  cfg.m = 4;
  flags.apply(cfg);
  if (!flags.n) cfg.n = cfg.m;
  if (cfg.k != static_cast<int>(p.stages())) {
    throw ValidationError("--k " + std::to_string(cfg.k) + " differs from the partition's " +
                          std::to_string(p.stages()) + " stages");
  }
  cfg.validate();

  std::mt19937_64 rng(ctx.seed);
  const ParameterSet params = init_parameters(seq.graph, rng());
  std::normal_distribution<double> normal;
  const LayerSpec& source = seq.graph.layer(seq.graph.source_id());
  Tensor input(layer_shape(source, cfg.n));
  for (Eigen::Index i = 0; i < input.data().size(); ++i) input.data().data()[i] = normal(rng);
  Tensor target(layer_shape(seq.graph.layer(seq.graph.output_id), cfg.n));
  for (Eigen::Index i = 0; i < target.data().size(); ++i) target.data().data()[i] = normal(rng);
  const LossSpec loss{target};

  const ForwardResult serial_fwd = forward_serial(seq.graph, params, input);
  const GradientSet serial = backward_serial(seq.graph, params, input, loss);
  const PipelineRun run = run_pipeline(seq, p, params, input, loss, cfg);
  const double err = max_relative_error(run.grads, serial);
  const bool outputs_equal = run.output == serial_fwd.output;
  auto problems = check_timeline(run.timeline);
  auto more = check_gpipe_dependencies(run.timeline, cfg.k, cfg.m, true);
  problems.insert(problems.end(), more.begin(), more.end());
  const bool pass = err < kVerifyTolerance && outputs_equal && problems.empty();

  std::ostringstream head;
  head << (pass ? "PASS" : "FAIL") << " max_rel_err " << (err < kVerifyTolerance ? "<" : ">=")
       << " 1e-9\n";
  Summary s;
  s.add("status", std::string(pass ? "PASS" : "FAIL"));
  s.add("max_rel_err", err);
  s.add("tolerance", kVerifyTolerance);
  s.add("outputs_bit_identical", std::string(outputs_equal ? "yes" : "no"));
  s.add("timeline_violations", static_cast<std::int64_t>(problems.size()));
  s.add("stages", cfg.k);
  s.add("micro_batches", cfg.m);
  s.add("batch_size", cfg.n);
  s.add("seed", std::to_string(ctx.seed));
  const std::string text = head.str() + s.render(ctx.format);
  if (!pass) throw CheckFailed("pipelined execution disagrees with serial execution", text);
  return text;
}

std::string cmd_plan(Context&, const std::string& shape) {
  return plan_to_json(default_plan(parse_shape(shape)));
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    std::string key, value;
    if (eq != std::string::npos) {
      key = line.substr(0, eq);
      value = line.substr(eq + 1);
    } else {
      std::istringstream ls(line);
      ls >> key >> value;
    }
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

std::string cmd_report(Context& ctx, const std::vector<std::string>& artifacts) {
  if (artifacts.empty()) throw ValidationError("report needs at least one artifact");
  Summary s;
  for (const auto& path : artifacts) {
    const std::string text = read_input(ctx, path);
    const std::string name = fs::path(path).filename().string();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      json doc;
      try {
        doc = json::parse(text);
      } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
      }
      if (doc.contains("boundaries")) {
        const Partition p = parse_partition_report(text);
        s.add(name + ".stages", static_cast<std::int64_t>(p.stages()));
        s.add(name + ".bottleneck", p.bottleneck());
        std::int64_t params = 0;
        for (auto v : p.stage_params) params = std::max(params, v);
        s.add(name + ".max_stage_params", params);
      } else if (doc.contains("stages")) {
        const CurriculumPlan plan = parse_plan(text);
        s.add(name + ".curriculum_stages", static_cast<std::int64_t>(plan.stages.size()));
        s.add(name + ".clamped", std::string(plan.clamped ? "yes" : "no"));
      } else {
        throw ValidationError(path + ": unrecognised JSON artifact");
      }
      continue;
    }
    const auto kv = parse_key_values(text);
    if (kv.count("throughput") != 0) {
      for (const char* key : {"steady_state_throughput", "throughput", "utilization",
                              "bubble_fraction", "peak_memory_max"}) {
        auto it = kv.find(key);
        if (it != kv.end()) s.add(name + "." + key, it->second);
      }
    } else if (kv.count("status") != 0) {
      s.add(name + ".status", kv.at("status"));
      s.add(name + ".max_rel_err", kv.count("max_rel_err") ? kv.at("max_rel_err") : "?");
    } else {
      throw ValidationError(path + ": unrecognised artifact");
    }
  }
  return s.render(ctx.format);
}

void write_manifest(const Context& ctx, const std::string& artifact, std::ostream& err) {
  json m;
  m["command"] = ctx.command;
  m["tool_version"] = std::string(kToolVersion);
  m["seed"] = ctx.seed;
  json inputs = json::array();
  for (const auto& path : ctx.inputs) {
    json entry{{"path", path}};
    try {
      entry["sha256"] = sha256_hex(read_text_file(path));
    } catch (const IoError&) {
      entry["sha256"] = nullptr;
    }
    inputs.push_back(entry);
  }
  m["inputs"] = inputs;
  const std::string out_name = ctx.out_path.empty() ? "<stdout>" : ctx.out_path;
  m["outputs"] = json::array({{{"path", out_name}, {"sha256", sha256_hex(artifact)}}});
  m["timestamp"] = utc_timestamp();
  const std::string text = m.dump(2) + "\n";
  if (ctx.out_path.empty()) {
    err << text;
  } else {
    write_text_file(ctx.out_path + ".manifest.json", text);
  }
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

Scenario load_scenario(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ValidationError(path.string() + ": scenario must be an object");
  static const std::vector<std::string> kKeys{"devices", "micro_batches", "batch_size",
                                              "backward_ratio", "barrier", "repeat",
                                              "placement", "model_ref", "comm_cost"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw ValidationError(path.string() + ": unknown key '" + key + "'");
    }
  }
  Scenario sc;
  try {
    sc.config.k = doc.at("devices").get<int>();
    sc.config.m = doc.value("micro_batches", 1);
    sc.config.n = doc.value("batch_size", sc.config.m);
    sc.config.backward_cost_ratio = doc.value("backward_ratio", 2.0);
    sc.config.phase_barrier = doc.value("barrier", true);
    sc.config.repeat_batches = doc.value("repeat", 1);
    sc.config.comm_cost_per_boundary = doc.value("comm_cost", 0.0);
    sc.model = path.parent_path() / doc.at("model_ref").get<std::string>();
    const json& pl = doc.at("placement");
    if (pl.is_array()) {
      sc.placement_kind = "layers";
      sc.layers = pl.get<std::vector<int>>();
    } else {
      sc.placement_kind = pl.at("partition").get<std::string>();
      sc.granularity = pl.value("granularity", std::string("block"));
      sc.objective = pl.value("objective", std::string("compute"));
      if (sc.placement_kind == "fixed") {
        sc.boundaries = pl.at("boundaries").get<std::vector<int>>();
      } else if (sc.placement_kind != "balanced") {
        throw ValidationError(path.string() + ": unknown placement partition '" +
                              sc.placement_kind + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return sc;
}

ScenarioOutcome simulate_scenario(const Scenario& sc) {
  const ModelGraph graph = load_graph_text(sc.model, read_text_file(sc.model));
  ScenarioOutcome outcome;
  if (sc.placement_kind == "layers") {
    outcome.result = simulate_dependency_schedule(graph, sc.layers, sc.config);
    outcome.schedule = "dependency";
    return outcome;
  }
  const auto granularity =
      sc.granularity == "layer" ? CellGranularity::kLayer : CellGranularity::kBlock;
  if (sc.granularity != "layer" && sc.granularity != "block") {
    throw ValidationError("unknown granularity '" + sc.granularity + "'");
  }
  const SequentialModel seq = sequentialize(graph, granularity);
  const auto objective = parse_objective(sc.objective);
  if (!objective) throw ValidationError("unknown objective '" + sc.objective + "'");
  const Partition p = sc.placement_kind == "fixed"
                          ? partition_fixed(seq, sc.boundaries)
                          : partition_balanced(seq, sc.config.k, *objective);
  outcome.result = simulate_gpipe(p, sc.config);
  outcome.schedule = "gpipe";
  return outcome;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pipeline-parallel planning, simulation and verification for U-Net models",
               "unetpipe"};
  app.require_subcommand(1);
  app.fallthrough();
  Context ctx;
  std::string format = "table";
  app.add_option("--seed", ctx.seed, "Seed for every random draw")->capture_default_str();
  app.add_option("--out", ctx.out_path, "Write the primary output here");
  app.add_option("--format", format, "Summary style")
      ->check(CLI::IsMember({"table", "machine"}))
      ->capture_default_str();
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string spec_path, graph_path, seq_path, partition_path, scenario_path, timeline_path;
  std::string granularity = "block", objective = "compute", boundaries, shape;
  std::optional<int> k;
  std::vector<std::string> artifacts;
  ScheduleFlags flags;

  auto* build = app.add_subcommand("build", "Build a U-Net graph from a model spec");
  build->add_option("spec", spec_path, "Model-spec JSON")->required();

  auto* transform = app.add_subcommand("transform", "Sequentialize a graph into a cell chain");
  transform->add_option("graph", graph_path, "Edge-list graph or model-spec JSON")->required();
  transform->add_option("--granularity", granularity, "block or layer")->capture_default_str();

  auto* partition = app.add_subcommand("partition", "Split a cell chain into stages");
  partition->add_option("seq", seq_path, "Sequential model")->required();
  partition->add_option("--k", k, "Stage count");
  partition->add_option("--objective", objective, "compute, params or activations")
      ->capture_default_str();
  partition->add_option("--boundaries", boundaries, "Fixed cuts, comma separated");

  auto* simulate = app.add_subcommand("simulate", "Simulate a pipeline schedule");
  simulate->add_option("--partition", partition_path, "Partition report");
  simulate->add_option("--scenario", scenario_path, "Scenario file");
  simulate->add_option("--timeline", timeline_path, "Also export the event timeline here");
  flags.add_to(simulate);

  auto* verify = app.add_subcommand("verify", "Check pipelined against serial gradients");
  verify->add_option("seq", seq_path, "Sequential model")->required();
  verify->add_option("partition", partition_path, "Partition report")->required();
  flags.add_to(verify);

  auto* plan = app.add_subcommand("plan", "Emit the patch-size curriculum");
  plan->add_option("--shape", shape, "Whole-image shape, e.g. 192,192,192")->required();

  auto* report = app.add_subcommand("report", "Consolidate artifacts into one table");
  report->add_option("artifacts", artifacts, "Partition, simulate, verify or plan outputs")
      ->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  ctx.format = format == "machine" ? Format::kMachine : Format::kTable;
  ctx.command = app.get_subcommands().front()->get_name();

  try {
    std::string artifact;
    std::string failure;
    try {
      if (*build) {
        artifact = cmd_build(ctx, spec_path);
      } else if (*transform) {
        artifact = cmd_transform(ctx, graph_path, granularity);
      } else if (*partition) {
        artifact = cmd_partition(ctx, seq_path, k, objective, boundaries);
      } else if (*simulate) {
        artifact = cmd_simulate(ctx, partition_path, scenario_path, flags, timeline_path);
      } else if (*verify) {
        artifact = cmd_verify(ctx, seq_path, partition_path, flags);
      } else if (*plan) {
        artifact = cmd_plan(ctx, shape);
      } else {
        artifact = cmd_report(ctx, artifacts);
      }
    } catch (const CheckFailed& e) {
      artifact = e.artifact;
      failure = e.what();
    }
    if (ctx.out_path.empty()) {
      out << artifact;
    } else {
      write_text_file(ctx.out_path, artifact);
    }
    write_manifest(ctx, artifact, err);
    if (!failure.empty()) {
      err << "error: " << failure << '\n';
      return kExitValidation;
    }
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace unetpipe::cli
