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
#include "unetpipe/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "unetpipe/error.hpp"

namespace unetpipe {

namespace {

using nlohmann::json;

[[noreturn]] void fail_line(int line, const std::string& what) {
  throw ValidationError("line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::string_view token, int line, std::string_view what) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail_line(line, "bad " + std::string(what) + " '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

Grid parse_grid(std::string_view v, int line) {
  Grid g{};
  for (int axis = 0; axis < 3; ++axis) {
    auto x = v.find('x');
    std::string_view part = axis < 2 ? v.substr(0, x) : v;
    if (axis < 2 && x == std::string_view::npos) fail_line(line, "bad grid");
    g[axis] = parse_number<std::int64_t>(part, line, "grid");
    if (axis < 2) v.remove_prefix(x + 1);
  }
  return g;
}

std::int64_t expect_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ValidationError("key '" + key + "' must be an integer");
  return j.get<std::int64_t>();
}

double expect_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ValidationError("key '" + key + "' must be a number");
  return j.get<double>();
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string export_edge_list(const ModelGraph& graph) {
  std::ostringstream os;
  os << "# unetpipe graph: id kind cost inputs... ; attributes\n";
  os << "output " << graph.output_id << '\n';
  for (const auto& l : graph.layers) {
    os << l.id << ' ' << to_string(l.kind) << ' ' << format_double(l.compute_cost);
    for (int u : l.inputs) os << ' ' << u;
    os << " ; name=" << l.name << " block=" << (l.block.empty() ? "-" : l.block)
       << " channels=" << l.channels << " grid=" << l.grid[0] << 'x' << l.grid[1] << 'x'
       << l.grid[2] << " params=" << l.param_count << " acts=" << l.activation_elems << '\n';
  }
  return os.str();
}

ModelGraph parse_edge_list(std::string_view text) {
  ModelGraph graph;
  bool have_output = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    auto tokens = split_ws(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;
    if (tokens[0] == "output") {
      if (tokens.size() != 2) fail_line(line_no, "expected 'output <id>'");
      graph.output_id = parse_number<int>(tokens[1], line_no, "output id");
      have_output = true;
      continue;
    }

    LayerSpec l;
    std::size_t i = 0;
    l.id = parse_number<int>(tokens[i++], line_no, "layer id");
    if (i >= tokens.size()) fail_line(line_no, "missing kind");
    auto kind = parse_layer_kind(tokens[i]);
    if (!kind) fail_line(line_no, "unknown kind '" + std::string(tokens[i]) + "'");
    l.kind = *kind;
    ++i;
    if (i >= tokens.size()) fail_line(line_no, "missing cost");
    l.compute_cost = parse_number<double>(tokens[i++], line_no, "cost");
    for (; i < tokens.size() && tokens[i] != ";"; ++i) {
      l.inputs.push_back(parse_number<int>(tokens[i], line_no, "input id"));
    }
    if (i < tokens.size()) ++i;  // skip ';'
    for (; i < tokens.size(); ++i) {
      auto eq = tokens[i].find('=');
      if (eq == std::string_view::npos) {
        fail_line(line_no, "expected key=value, got '" + std::string(tokens[i]) + "'");
      }
      auto key = tokens[i].substr(0, eq);
      auto value = tokens[i].substr(eq + 1);
      if (key == "name") {
        l.name = value;
      } else if (key == "block") {
        l.block = value == "-" ? "" : std::string(value);
      } else if (key == "channels") {
        l.channels = parse_number<std::int64_t>(value, line_no, "channels");
      } else if (key == "grid") {
        l.grid = parse_grid(value, line_no);
      } else if (key == "params") {
        l.param_count = parse_number<std::int64_t>(value, line_no, "params");
      } else if (key == "acts") {
        l.activation_elems = parse_number<std::int64_t>(value, line_no, "acts");
      } else {
        fail_line(line_no, "unknown attribute '" + std::string(key) + "'");
      }
    }
    graph.layers.push_back(std::move(l));
  }
  if (!have_output) throw ValidationError("missing 'output <id>' directive");
  return graph;
}

UNetConfig parse_model_spec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model spec syntax error: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("model spec must be an object");

  UNetConfig config;
  for (auto& [key, value] : doc.items()) {
    if (key == "base_filters") {
      config.base_filters = expect_int(value, key);
    } else if (key == "encoder_blocks") {
      config.encoder_blocks = static_cast<int>(expect_int(value, key));
    } else if (key == "input_shape") {
      if (!value.is_array() || value.size() != 4) {
        throw ValidationError("key 'input_shape' must be an array of 4 integers");
      }
      for (std::size_t a = 0; a < 4; ++a) config.input_shape[a] = expect_int(value[a], key);
    } else if (key == "se_blocks") {
      if (!value.is_boolean()) throw ValidationError("key 'se_blocks' must be a boolean");
      config.se_blocks = value.get<bool>();
    } else if (key == "cost_model") {
      if (!value.is_object()) throw ValidationError("key 'cost_model' must be an object");
      for (auto& [ckey, cvalue] : value.items()) {
        if (ckey == "kernel_volume") {
          config.cost_model.kernel_volume = expect_int(cvalue, "cost_model." + ckey);
        } else if (ckey == "se_multiplier") {
          config.cost_model.se_multiplier = expect_number(cvalue, "cost_model." + ckey);
        } else if (auto kind = parse_layer_kind(ckey)) {
          config.cost_model.multiplier[*kind] = expect_number(cvalue, "cost_model." + ckey);
        } else {
          throw ValidationError("unknown key 'cost_model." + ckey + "'");
        }
      }
    } else {
      throw ValidationError("unknown key '" + key + "'");
    }
  }
  return config;
}

std::string model_spec_to_json(const UNetConfig& config) {
  json doc;
  doc["base_filters"] = config.base_filters;
  doc["encoder_blocks"] = config.encoder_blocks;
  doc["input_shape"] = config.input_shape;
  doc["se_blocks"] = config.se_blocks;
  json cost;
  cost["kernel_volume"] = config.cost_model.kernel_volume;
  cost["se_multiplier"] = config.cost_model.se_multiplier;
  for (const auto& [kind, m] : config.cost_model.multiplier) cost[std::string(to_string(kind))] = m;
  doc["cost_model"] = cost;
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace unetpipe
