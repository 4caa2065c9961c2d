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
#ifndef UNETPIPE_CURRICULUM_HPP
#define UNETPIPE_CURRICULUM_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "unetpipe/model_ir.hpp"

namespace unetpipe {

enum class Sampling { kPositiveBiased, kWholeImage };

std::string_view to_string(Sampling sampling);

struct CurriculumStage {
  Grid patch{1, 1, 1};
  std::int64_t batch = 1;
  std::int64_t epochs = 1;
  double learning_rate = 1e-3;
  std::string optimizer = "rmsprop";
  Sampling sampling = Sampling::kPositiveBiased;
  bool reset_optimizer = true;

  bool operator==(const CurriculumStage&) const = default;
};

struct CurriculumPlan {
  Grid whole_image{1, 1, 1};
  std::vector<CurriculumStage> stages;
  /// Set when the image is too small for the full schedule and stages were dropped.
  bool clamped = false;
  std::vector<std::string> warnings;

  bool operator==(const CurriculumPlan&) const = default;
};

/// Small positive patches, then medium ones, then the whole image:
///   64^3, batch 16, 4800 epochs; 128^3, batch 4, 1200 epochs; whole, batch 1,
///   300 epochs; learning rate 1e-3 and RMSProp throughout.
/// An image smaller than 128 on some axis keeps only the patch stages that fit
/// strictly inside it, followed by the whole-image stage, and is flagged.
/// Throws std::invalid_argument for a non-positive axis.
CurriculumPlan default_plan(const Grid& whole_image);

/// Patch sizes never shrink along any axis from one stage to the next, and
/// every stage has positive extents and at least one epoch.
bool is_monotone(const CurriculumPlan& plan);

std::string plan_to_json(const CurriculumPlan& plan);
/// Throws ValidationError naming the offending key.
CurriculumPlan parse_plan(std::string_view text);

template <typename T>
struct Volume {
  Grid shape{0, 0, 0};
  std::vector<T> data;

  Volume() = default;
  explicit Volume(const Grid& s, T fill = T{})
      : shape(s), data(static_cast<std::size_t>(voxel_count(s)), fill) {}

  std::size_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return static_cast<std::size_t>((x * shape[1] + y) * shape[2] + z);
  }
  T& at(std::int64_t x, std::int64_t y, std::int64_t z) { return data[index(x, y, z)]; }
  const T& at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return data[index(x, y, z)];
  }

  /// Sub-volume [origin, origin + size).
  Volume crop(const Grid& origin, const Grid& size) const {
    Volume out(size);
    for (std::int64_t x = 0; x < size[0]; ++x) {
      for (std::int64_t y = 0; y < size[1]; ++y) {
        for (std::int64_t z = 0; z < size[2]; ++z) {
          out.at(x, y, z) = at(origin[0] + x, origin[1] + y, origin[2] + z);
        }
      }
    }
    return out;
  }

  bool operator==(const Volume&) const = default;
};

using ImageVolume = Volume<double>;
using LabelVolume = Volume<std::uint8_t>;

/// Axis-aligned box of foreground voxels [origin, origin + size) in an
/// otherwise empty volume.
LabelVolume make_blob_labels(const Grid& shape, const Grid& origin, const Grid& size);

/// qualifying(labels, size).at(o) is 1 iff the patch at origin o contains a
/// foreground voxel. Its shape is labels.shape - size + 1 per axis.
LabelVolume qualifying_origins(const LabelVolume& labels, const Grid& size);

struct PatchSample {
  ImageVolume patch;
  LabelVolume labels;
  Grid origin{0, 0, 0};
  /// False when the labels hold no foreground and the origin is uniform.
  bool positive = false;
};

/// Picks an origin uniformly among those whose patch contains foreground, or
/// uniformly among all origins when there is none. Throws
/// std::invalid_argument if the patch does not fit or the shapes disagree.
PatchSample sample_positive_patch(const ImageVolume& volume, const LabelVolume& labels,
                                  const Grid& size, std::mt19937_64& rng);
PatchSample sample_positive_patch(const ImageVolume& volume, const LabelVolume& labels,
                                  const Grid& size, std::uint64_t seed);

/// Monte-Carlo mean foreground fraction of positive-biased patches drawn from
/// one generator seeded with `seed`. Throws std::invalid_argument unless
/// n_samples >= 1.
double imbalance_ratio(const LabelVolume& labels, const Grid& size, int n_samples,
                       std::uint64_t seed);

/// The same expectation computed exactly over every qualifying origin.
double expected_foreground_fraction(const LabelVolume& labels, const Grid& size);

}  // namespace unetpipe

#endif  // UNETPIPE_CURRICULUM_HPP
