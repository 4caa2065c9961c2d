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
#include <sstream>

#include "unetpipe/error.hpp"
#include "unetpipe/graph_io.hpp"
#include "unetpipe/tensor.hpp"

namespace unetpipe {

std::string format_tensor(const Tensor& tensor) {
  std::ostringstream os;
  os << "shape:";
  for (auto d : tensor.shape()) os << ' ' << d;
  os << '\n';
  const auto& data = tensor.data();
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      os << (c == 0 ? "" : " ") << format_double(data(r, c));
    }
    os << '\n';
  }
  return os.str();
}

Tensor parse_tensor(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  constexpr std::string_view kTag = "shape:";
  if (line.rfind(kTag, 0) != 0) throw ValidationError("tensor: expected a 'shape:' line");
  std::istringstream dims(line.substr(kTag.size()));
  std::vector<std::int64_t> shape;
  std::int64_t d = 0;
  while (dims >> d) shape.push_back(d);
  if (!dims.eof() || shape.empty()) throw ValidationError("tensor: malformed shape line");

  Tensor t;
  try {
    t = Tensor(shape);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("tensor: ") + e.what());
  }
  auto& data = t.data();
  std::int64_t count = 0;
  std::string token;
  while (in >> token) {
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ValidationError("tensor: bad value '" + token + "'");
    }
    if (count < t.size()) {
      data(count / data.cols(), count % data.cols()) = v;
    }
    ++count;
  }
  if (count != t.size()) {
    throw ValidationError("tensor: expected " + std::to_string(t.size()) + " values, got " +
                          std::to_string(count));
  }
  return t;
}

}  // namespace unetpipe
