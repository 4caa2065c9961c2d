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
#ifndef UNETPIPE_KERNELS_HPP
#define UNETPIPE_KERNELS_HPP

// Per-item forward and adjoint kernels of the executor's layer kinds. Every
// kernel works on one batch item viewed as a (channels x voxels) matrix whose
// voxel index is (x * ny + y) * nz + z.

#include <Eigen/Dense>

#include "unetpipe/model_ir.hpp"

namespace unetpipe::kernels {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar, typename In>
Mat<Scalar> affine(const Mat<Scalar>& weight, const Vec<Scalar>& bias,
                   const Eigen::MatrixBase<In>& x) {
  Mat<Scalar> y = weight * x;
  y.colwise() += bias;
  return y;
}

/// Returns dX and accumulates dW, db.
template <typename Scalar, typename In, typename Dy>
Mat<Scalar> affine_adjoint(const Mat<Scalar>& weight, const Eigen::MatrixBase<In>& x,
                           const Eigen::MatrixBase<Dy>& dy, Mat<Scalar>& d_weight,
                           Vec<Scalar>& d_bias) {
  d_weight.noalias() += dy * x.transpose();
  d_bias += dy.rowwise().sum();
  return weight.transpose() * dy;
}

template <typename Scalar, typename In>
Mat<Scalar> relu(const Eigen::MatrixBase<In>& x) {
  return x.cwiseMax(Scalar(0));
}

/// The derivative at 0 is taken as 0.
template <typename Scalar, typename Out, typename Dy>
Mat<Scalar> relu_adjoint(const Eigen::MatrixBase<Out>& y, const Eigen::MatrixBase<Dy>& dy) {
  return (y.array() > Scalar(0)).select(dy, Scalar(0));
}

/// 2x2x2 average pooling from `fine` (the input grid).
template <typename Scalar, typename In>
Mat<Scalar> downsample(const Eigen::MatrixBase<In>& x, const Grid& fine) {
  const Grid coarse{fine[0] / 2, fine[1] / 2, fine[2] / 2};
  Mat<Scalar> y = Mat<Scalar>::Zero(x.rows(), voxel_count(coarse));
  for (std::int64_t i = 0; i < fine[0]; ++i) {
    for (std::int64_t j = 0; j < fine[1]; ++j) {
      for (std::int64_t k = 0; k < fine[2]; ++k) {
        const auto src = (i * fine[1] + j) * fine[2] + k;
        const auto dst = ((i / 2) * coarse[1] + j / 2) * coarse[2] + k / 2;
        y.col(dst) += x.col(src);
      }
    }
  }
  return y * Scalar(0.125);
}

template <typename Scalar, typename Dy>
Mat<Scalar> downsample_adjoint(const Eigen::MatrixBase<Dy>& dy, const Grid& fine) {
  const Grid coarse{fine[0] / 2, fine[1] / 2, fine[2] / 2};
  Mat<Scalar> dx(dy.rows(), voxel_count(fine));
  for (std::int64_t i = 0; i < fine[0]; ++i) {
    for (std::int64_t j = 0; j < fine[1]; ++j) {
      for (std::int64_t k = 0; k < fine[2]; ++k) {
        const auto src = (i * fine[1] + j) * fine[2] + k;
        const auto dst = ((i / 2) * coarse[1] + j / 2) * coarse[2] + k / 2;
        dx.col(src) = dy.col(dst) * Scalar(0.125);
      }
    }
  }
  return dx;
}

/// Nearest-neighbour 2x upsampling onto `fine` (the output grid).
template <typename Scalar, typename In>
Mat<Scalar> upsample(const Eigen::MatrixBase<In>& x, const Grid& fine) {
  const Grid coarse{fine[0] / 2, fine[1] / 2, fine[2] / 2};
  Mat<Scalar> y(x.rows(), voxel_count(fine));
  for (std::int64_t i = 0; i < fine[0]; ++i) {
    for (std::int64_t j = 0; j < fine[1]; ++j) {
      for (std::int64_t k = 0; k < fine[2]; ++k) {
        const auto dst = (i * fine[1] + j) * fine[2] + k;
        const auto src = ((i / 2) * coarse[1] + j / 2) * coarse[2] + k / 2;
        y.col(dst) = x.col(src);
      }
    }
  }
  return y;
}

template <typename Scalar, typename Dy>
Mat<Scalar> upsample_adjoint(const Eigen::MatrixBase<Dy>& dy, const Grid& fine) {
  const Grid coarse{fine[0] / 2, fine[1] / 2, fine[2] / 2};
  Mat<Scalar> dx = Mat<Scalar>::Zero(dy.rows(), voxel_count(coarse));
  for (std::int64_t i = 0; i < fine[0]; ++i) {
    for (std::int64_t j = 0; j < fine[1]; ++j) {
      for (std::int64_t k = 0; k < fine[2]; ++k) {
        const auto src = (i * fine[1] + j) * fine[2] + k;
        const auto dst = ((i / 2) * coarse[1] + j / 2) * coarse[2] + k / 2;
        dx.col(dst) += dy.col(src);
      }
    }
  }
  return dx;
}

}  // namespace unetpipe::kernels

#endif  // UNETPIPE_KERNELS_HPP
