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
#ifndef UNETPIPE_GRAPH_IO_HPP
#define UNETPIPE_GRAPH_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "unetpipe/model_ir.hpp"

namespace unetpipe {

// Edge-list text format, one layer per line:
//
//   <id> <kind> <compute_cost> <input ids...> ; name=<s> block=<s|-> channels=<n>
//        grid=<x>x<y>x<z> params=<n> acts=<n>
//
// plus a single `output <id>` directive. Lines starting with '#' are comments.
// Costs are printed in shortest round-trip form so export/parse is lossless.

std::string export_edge_list(const ModelGraph& graph);

/// Throws ValidationError naming the offending line number.
ModelGraph parse_edge_list(std::string_view text);

/// Parses a model-spec document (JSON object). Accepted top-level keys:
/// base_filters, encoder_blocks, input_shape, se_blocks, cost_model.
/// cost_model accepts layer-kind names plus kernel_volume and se_multiplier.
/// Throws ValidationError naming the offending key, or carrying the parser's
/// line/column for syntax errors.
UNetConfig parse_model_spec(std::string_view text);

std::string model_spec_to_json(const UNetConfig& config);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Throws IoError.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace unetpipe

#endif  // UNETPIPE_GRAPH_IO_HPP
