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
#ifndef UNETPIPE_TENSOR_HPP
#define UNETPIPE_TENSOR_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace unetpipe {

/// Dense array with a leading batch dimension. Each batch item occupies one
/// row of the backing matrix; within an item, values are laid out row-major
/// over the remaining dimensions (channels first, then x, y, z).
template <typename Scalar>
class BasicTensor {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ItemMap = Eigen::Map<Matrix>;
  using ConstItemMap = Eigen::Map<const Matrix>;

  BasicTensor() = default;

  /// Zero-filled tensor. Throws std::invalid_argument for an empty shape or a
  /// negative extent.
  explicit BasicTensor(std::vector<std::int64_t> shape) : shape_(std::move(shape)) {
    if (shape_.empty()) throw std::invalid_argument("tensor shape needs a batch dimension");
    for (auto d : shape_) {
      if (d < 0) throw std::invalid_argument("tensor extent must be non-negative");
    }
    data_ = Matrix::Zero(shape_[0], item_size());
  }

  BasicTensor(std::vector<std::int64_t> shape, Matrix data) : BasicTensor(std::move(shape)) {
    if (data.rows() != data_.rows() || data.cols() != data_.cols()) {
      throw std::invalid_argument("tensor data does not match its shape");
    }
    data_ = std::move(data);
  }

  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t batch() const { return shape_.empty() ? 0 : shape_[0]; }
  std::int64_t channels() const { return shape_.size() > 1 ? shape_[1] : 1; }
  std::int64_t item_size() const {
    return std::accumulate(shape_.begin() + (shape_.empty() ? 0 : 1), shape_.end(),
                           std::int64_t{1}, std::multiplies<>());
  }
  /// Elements per channel of one item.
  std::int64_t voxels() const { return channels() == 0 ? 0 : item_size() / channels(); }
  std::int64_t size() const { return batch() * item_size(); }

  Matrix& data() { return data_; }
  const Matrix& data() const { return data_; }

  /// Item `i` viewed as a (channels x voxels) matrix.
  ItemMap item(std::int64_t i) { return ItemMap(data_.row(i).data(), channels(), voxels()); }
  ConstItemMap item(std::int64_t i) const {
    return ConstItemMap(data_.row(i).data(), channels(), voxels());
  }

  /// Items [first, first + count) as a new tensor.
  BasicTensor slice_batch(std::int64_t first, std::int64_t count) const {
    auto shape = shape_;
    shape[0] = count;
    return BasicTensor(std::move(shape), data_.middleRows(first, count));
  }

  bool operator==(const BasicTensor& other) const {
    return shape_ == other.shape_ && data_.rows() == other.data_.rows() &&
           data_.cols() == other.data_.cols() && (data_.array() == other.data_.array()).all();
  }

 private:
  std::vector<std::int64_t> shape_;
  Matrix data_;
};

using Tensor = BasicTensor<double>;

/// Stacks tensors of equal item shape along the batch dimension.
template <typename Scalar>
BasicTensor<Scalar> concat_batch(const std::vector<BasicTensor<Scalar>>& parts) {
  if (parts.empty()) throw std::invalid_argument("nothing to concatenate");
  auto shape = parts.front().shape();
  std::int64_t rows = 0;
  for (const auto& p : parts) {
    if (p.item_size() != parts.front().item_size()) {
      throw std::invalid_argument("batch concatenation of mismatched items");
    }
    rows += p.batch();
  }
  shape[0] = rows;
  BasicTensor<Scalar> out(shape);
  std::int64_t at = 0;
  for (const auto& p : parts) {
    out.data().middleRows(at, p.batch()) = p.data();
    at += p.batch();
  }
  return out;
}

/// Largest absolute element, 0 for an empty tensor.
template <typename Scalar>
Scalar max_abs(const BasicTensor<Scalar>& t) {
  return t.size() == 0 ? Scalar(0) : t.data().cwiseAbs().maxCoeff();
}

/// Fixture text: a `shape: d0 d1 ...` line followed by whitespace-separated
/// values in row-major order.
std::string format_tensor(const Tensor& tensor);
/// Throws ValidationError on malformed text or a value count mismatch.
Tensor parse_tensor(std::string_view text);

}  // namespace unetpipe

#endif  // UNETPIPE_TENSOR_HPP
