// Copyright 2026 The vpe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <vector>

#include "vpe/common.h"
#include "vpe/geometry.h"

namespace vpe {

// Depth maps and flow fields live on the 1/8-resolution grid.
inline constexpr int kDepthStride = 8;

inline int low_res_rows(double full_h) {
  return static_cast<int>(std::ceil(full_h / kDepthStride));
}
inline int low_res_cols(double full_w) {
  return static_cast<int>(std::ceil(full_w / kDepthStride));
}

// Dense correspondence field between two frames on the low-res grid.
// flow(r, c) is the displacement (in low-res pixels) from pixel (c, r) of the
// source frame to its match in the target frame; weight in [0, 1], 0 = unusable.
struct FlowField {
  Grid<Vec2> flow;
  Grid<double> weight;

  FlowField() = default;
  FlowField(int rows, int cols)
      : flow(rows, cols, Vec2::Zero()), weight(rows, cols, 0.0) {}
  bool empty() const { return flow.empty(); }
  int rows() const { return flow.rows(); }
  int cols() const { return flow.cols(); }
};

// A single long-range correspondence in full-resolution pixel coordinates.
struct Track {
  int frame_i = -1;
  Vec2 p_i = Vec2::Zero();
  int frame_j = -1;
  Vec2 p_j = Vec2::Zero();
  double confidence = 1.0;
};

struct TrackSet {
  std::vector<Track> tracks;
  bool empty() const { return tracks.empty(); }
  size_t size() const { return tracks.size(); }
};

struct TimedPose {
  double t = 0.0;
  Pose pose;
};
using Trajectory = std::vector<TimedPose>;

}  // namespace vpe
