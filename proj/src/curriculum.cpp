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
#include "unetpipe/curriculum.hpp"

#include <algorithm>

#include "json.hpp"
#include "unetpipe/error.hpp"

namespace unetpipe {

namespace {

using nlohmann::json;

void require_fit(const Grid& shape, const Grid& size) {
  for (int a = 0; a < 3; ++a) {
    if (size[a] < 1 || size[a] > shape[a]) {
      throw std::invalid_argument("patch " + std::to_string(size[0]) + "x" +
                                  std::to_string(size[1]) + "x" + std::to_string(size[2]) +
                                  " does not fit the volume");
    }
  }
}

// Sliding-window logical OR of width `w` along `axis`; the axis shrinks by w-1.
LabelVolume window_any(const LabelVolume& in, int axis, std::int64_t w) {
  Grid out_shape = in.shape;
  out_shape[axis] = in.shape[axis] - w + 1;
  LabelVolume out(out_shape);
  Grid p{0, 0, 0};
  for (p[0] = 0; p[0] < out_shape[0]; ++p[0]) {
    for (p[1] = 0; p[1] < out_shape[1]; ++p[1]) {
      for (p[2] = 0; p[2] < out_shape[2]; ++p[2]) {
        Grid q = p;
        std::uint8_t any = 0;
        for (std::int64_t d = 0; d < w && !any; ++d, ++q[axis]) any = in.at(q[0], q[1], q[2]) != 0;
        out.at(p[0], p[1], p[2]) = any;
      }
    }
  }
  return out;
}

// Summed-volume table with a zero border: s(x, y, z) counts foreground in
// [0, x) x [0, y) x [0, z).
class ForegroundCounter {
 public:
  explicit ForegroundCounter(const LabelVolume& labels)
      : table_(Grid{labels.shape[0] + 1, labels.shape[1] + 1, labels.shape[2] + 1}) {
    for (std::int64_t x = 1; x <= labels.shape[0]; ++x) {
      for (std::int64_t y = 1; y <= labels.shape[1]; ++y) {
        for (std::int64_t z = 1; z <= labels.shape[2]; ++z) {
          table_.at(x, y, z) = (labels.at(x - 1, y - 1, z - 1) != 0 ? 1 : 0) +
                               table_.at(x - 1, y, z) + table_.at(x, y - 1, z) +
                               table_.at(x, y, z - 1) - table_.at(x - 1, y - 1, z) -
                               table_.at(x - 1, y, z - 1) - table_.at(x, y - 1, z - 1) +
                               table_.at(x - 1, y - 1, z - 1);
        }
      }
    }
  }

  std::int64_t count(const Grid& o, const Grid& s) const {
    const Grid e{o[0] + s[0], o[1] + s[1], o[2] + s[2]};
    return table_.at(e[0], e[1], e[2]) - table_.at(o[0], e[1], e[2]) -
           table_.at(e[0], o[1], e[2]) - table_.at(e[0], e[1], o[2]) +
           table_.at(o[0], o[1], e[2]) + table_.at(o[0], e[1], o[2]) +
           table_.at(e[0], o[1], o[2]) - table_.at(o[0], o[1], o[2]);
  }

 private:
  Volume<std::int64_t> table_;
};

Grid origin_at(const Grid& shape, std::int64_t flat) {
  return {flat / (shape[1] * shape[2]), (flat / shape[2]) % shape[1], flat % shape[2]};
}

std::pair<Grid, bool> draw_origin(const LabelVolume& qualifying, std::int64_t qualifying_count,
                                  std::mt19937_64& rng) {
  if (qualifying_count == 0) {
    std::uniform_int_distribution<std::int64_t> pick(0, voxel_count(qualifying.shape) - 1);
    return {origin_at(qualifying.shape, pick(rng)), false};
  }
  std::uniform_int_distribution<std::int64_t> pick(0, qualifying_count - 1);
  std::int64_t j = pick(rng);
  for (std::size_t i = 0; i < qualifying.data.size(); ++i) {
    if (qualifying.data[i] != 0 && j-- == 0) {
      return {origin_at(qualifying.shape, static_cast<std::int64_t>(i)), true};
    }
  }
  throw std::logic_error("qualifying origin count is inconsistent");
}

Grid grid_from_json(const json& j, const std::string& key) {
  auto v = j.get<std::vector<std::int64_t>>();
  if (v.size() != 3) throw ValidationError("plan: '" + key + "' needs 3 extents");
  return {v[0], v[1], v[2]};
}

}  // namespace

std::string_view to_string(Sampling sampling) {
  return sampling == Sampling::kWholeImage ? "whole_image" : "positive_biased";
}

CurriculumPlan default_plan(const Grid& whole_image) {
  for (auto axis : whole_image) {
    if (axis < 1) throw std::invalid_argument("image extents must be positive");
  }
  CurriculumPlan plan;
  plan.whole_image = whole_image;
  const auto smallest = *std::min_element(whole_image.begin(), whole_image.end());
  auto patch_stage = [](std::int64_t edge, std::int64_t batch, std::int64_t epochs) {
    CurriculumStage s;
    s.patch = {edge, edge, edge};
    s.batch = batch;
    s.epochs = epochs;
    return s;
  };
  if (smallest >= 128) {
    plan.stages.push_back(patch_stage(64, 16, 4800));
    plan.stages.push_back(patch_stage(128, 4, 1200));
  } else {
    plan.clamped = true;
    if (smallest > 64) {
      plan.stages.push_back(patch_stage(64, 16, 4800));
      plan.warnings.push_back("image smaller than 128 voxels on some axis: 128^3 stage dropped");
    } else {
      plan.warnings.push_back(
          "image not larger than 64 voxels on some axis: patch stages dropped");
    }
  }
  CurriculumStage whole;
  whole.patch = whole_image;
  whole.batch = 1;
  whole.epochs = 300;
  whole.sampling = Sampling::kWholeImage;
  plan.stages.push_back(whole);
  return plan;
}

bool is_monotone(const CurriculumPlan& plan) {
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const auto& s = plan.stages[i];
    if (s.epochs < 1 || s.batch < 1) return false;
    for (int a = 0; a < 3; ++a) {
      if (s.patch[a] < 1) return false;
      if (i > 0 && s.patch[a] < plan.stages[i - 1].patch[a]) return false;
    }
  }
  return true;
}

std::string plan_to_json(const CurriculumPlan& plan) {
  json doc;
  doc["whole_image"] = plan.whole_image;
  doc["clamped"] = plan.clamped;
  doc["warnings"] = plan.warnings;
  json stages = json::array();
  for (const auto& s : plan.stages) {
    stages.push_back({{"patch", s.patch},
                      {"batch", s.batch},
                      {"epochs", s.epochs},
                      {"lr", s.learning_rate},
                      {"optimizer", s.optimizer},
                      {"sampling", std::string(to_string(s.sampling))},
                      {"reset_optimizer", s.reset_optimizer}});
  }
  doc["stages"] = stages;
  return doc.dump(2) + "\n";
}

CurriculumPlan parse_plan(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("plan: ") + e.what());
  }
  try {
    CurriculumPlan plan;
    plan.whole_image = grid_from_json(doc.at("whole_image"), "whole_image");
    plan.clamped = doc.value("clamped", false);
    plan.warnings = doc.value("warnings", std::vector<std::string>{});
    for (const auto& js : doc.at("stages")) {
      for (const auto& [key, _] : js.items()) {
        static const std::vector<std::string> kKeys{
            "patch", "batch", "epochs", "lr", "optimizer", "sampling", "reset_optimizer"};
        if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
          throw ValidationError("plan: unknown key '" + key + "'");
        }
      }
      CurriculumStage s;
      s.patch = grid_from_json(js.at("patch"), "patch");
      s.batch = js.at("batch").get<std::int64_t>();
      s.epochs = js.at("epochs").get<std::int64_t>();
      s.learning_rate = js.at("lr").get<double>();
      s.optimizer = js.value("optimizer", std::string("rmsprop"));
      const auto sampling = js.value("sampling", std::string("positive_biased"));
      if (sampling == "positive_biased") {
        s.sampling = Sampling::kPositiveBiased;
      } else if (sampling == "whole_image") {
        s.sampling = Sampling::kWholeImage;
      } else {
        throw ValidationError("plan: unknown sampling '" + sampling + "'");
      }
      s.reset_optimizer = js.value("reset_optimizer", true);
      plan.stages.push_back(s);
    }
    return plan;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("plan: ") + e.what());
  }
}

LabelVolume make_blob_labels(const Grid& shape, const Grid& origin, const Grid& size) {
  LabelVolume labels(shape);
  for (std::int64_t x = origin[0]; x < std::min(shape[0], origin[0] + size[0]); ++x) {
    for (std::int64_t y = origin[1]; y < std::min(shape[1], origin[1] + size[1]); ++y) {
      for (std::int64_t z = origin[2]; z < std::min(shape[2], origin[2] + size[2]); ++z) {
        labels.at(x, y, z) = 1;
      }
    }
  }
  return labels;
}

LabelVolume qualifying_origins(const LabelVolume& labels, const Grid& size) {
  require_fit(labels.shape, size);
  LabelVolume v = window_any(labels, 0, size[0]);
  v = window_any(v, 1, size[1]);
  return window_any(v, 2, size[2]);
}

PatchSample sample_positive_patch(const ImageVolume& volume, const LabelVolume& labels,
                                  const Grid& size, std::mt19937_64& rng) {
  if (volume.shape != labels.shape) {
    throw std::invalid_argument("labels and volume differ in shape");
  }
  const LabelVolume qualifying = qualifying_origins(labels, size);
  const auto count = std::count_if(qualifying.data.begin(), qualifying.data.end(),
                                   [](std::uint8_t q) { return q != 0; });
  auto [origin, positive] = draw_origin(qualifying, count, rng);
  PatchSample sample;
  sample.origin = origin;
  sample.positive = positive;
  sample.patch = volume.crop(origin, size);
  sample.labels = labels.crop(origin, size);
  return sample;
}

PatchSample sample_positive_patch(const ImageVolume& volume, const LabelVolume& labels,
                                  const Grid& size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_positive_patch(volume, labels, size, rng);
}

double imbalance_ratio(const LabelVolume& labels, const Grid& size, int n_samples,
                       std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  const LabelVolume qualifying = qualifying_origins(labels, size);
  const auto count = std::count_if(qualifying.data.begin(), qualifying.data.end(),
                                   [](std::uint8_t q) { return q != 0; });
  const ForegroundCounter counter(labels);
  const double patch_voxels = static_cast<double>(voxel_count(size));
  std::mt19937_64 rng(seed);
  double sum = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const auto origin = draw_origin(qualifying, count, rng).first;
    sum += static_cast<double>(counter.count(origin, size)) / patch_voxels;
  }
  return sum / n_samples;
}

double expected_foreground_fraction(const LabelVolume& labels, const Grid& size) {
  const LabelVolume qualifying = qualifying_origins(labels, size);
  const ForegroundCounter counter(labels);
  const double patch_voxels = static_cast<double>(voxel_count(size));
  double sum = 0.0;
  std::int64_t n = 0;
  for (std::size_t i = 0; i < qualifying.data.size(); ++i) {
    if (qualifying.data[i] == 0) continue;
    sum += static_cast<double>(counter.count(origin_at(qualifying.shape,
                                                       static_cast<std::int64_t>(i)),
                                             size)) /
           patch_voxels;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace unetpipe
