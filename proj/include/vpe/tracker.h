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

#include "vpe/types.h"

namespace vpe {

using ImageF = Grid<float>;

struct Corner {
  Vec2 position = Vec2::Zero();
  double score = 0.0;
};

// Downsampling pyramid (2x2 box filter per level) with per-level central-
// difference gradients, shared by detection-free LK tracking.
struct ImagePyramid {
  std::vector<ImageF> levels;
  std::vector<ImageF> grad_x;
  std::vector<ImageF> grad_y;

  static ImagePyramid build(const ImageF& image, int num_levels);
  int num_levels() const { return static_cast<int>(levels.size()); }
};

// Levels above the base: floor(log2(min(H, W) / 32)), at least 1 level total.
int default_pyramid_levels(int rows, int cols);

// Shi-Tomasi minimum-eigenvalue corners: Gaussian presmoothing (sigma 1),
// 7x7 structure tensor, threshold at quality * best response, greedy
// min-distance suppression, per-axis parabolic sub-pixel refinement.
std::vector<Corner> detect_corners(const ImageF& image, int max_corners,
                                   double quality, double min_distance);

struct LKTrack {
  Vec2 point = Vec2::Zero();
  bool ok = false;
};

// Pyramidal Lucas-Kanade with a forward-backward consistency check
// (round-trip error > 1 px marks the point lost). Patch is
// (2*half_window+1)^2. Parallel over points; the serial reference is
// bit-identical.
std::vector<LKTrack> track_lk(const ImagePyramid& prev, const ImagePyramid& next,
                              const std::vector<Vec2>& points, int half_window = 7,
                              int max_iters = 30);
std::vector<LKTrack> track_lk_serial(const ImagePyramid& prev, const ImagePyramid& next,
                                     const std::vector<Vec2>& points,
                                     int half_window = 7, int max_iters = 30);

// Scalar motion score driving keyframe selection: the mean of (a) the
// weighted mean dense-flow magnitude and (b) the mean track displacement
// scaled to the low-res grid, over whichever sources carry signal. Throws
// NoMotionData when neither does.
double motion_magnitude(const FlowField& flow, const TrackSet& tracks);

}  // namespace vpe
