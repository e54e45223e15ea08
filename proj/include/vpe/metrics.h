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

#include <functional>
#include <utility>
#include <vector>

#include "vpe/types.h"

namespace vpe {

enum class AlignMode { kNone, kRigid, kSimilarity };

// Least-squares similarity/rigid transform est -> ref over matched positions.
// Collinear or coincident position sets are flagged degenerate; the transform
// is still returned.
struct Alignment {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;
  bool degenerate = false;

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
};
Alignment umeyama_align(const Trajectory& est, const Trajectory& ref, bool with_scale);

// RMSE of aligned position differences.
double ate(const Trajectory& est, const Trajectory& ref, AlignMode mode = AlignMode::kRigid);

// RMSE of relative translation / rotation discrepancies over pairs (i, i+delta).
double rte(const Trajectory& est, const Trajectory& ref, int delta = 1);
double rre_deg(const Trajectory& est, const Trajectory& ref, int delta = 1);

// Absolute field-of-view difference in degrees.
double focal_error_deg(const Intrinsics& est, const Intrinsics& gt);

// Sum of consecutive position distances.
double path_length(const Trajectory& traj);

// F = K^-T [t]x R K^-1 for rel mapping camera-i coordinates to camera-j;
// pinhole intrinsics only.
Mat3 fundamental_from_relative(const Pose& rel, const Intrinsics& k);

// Correspondences for adjacent trajectory pairs: pairs[i][k] = (pixel in
// frame i, pixel in frame i+1).
struct CorrespondenceSet {
  std::vector<std::vector<std::pair<Vec2, Vec2>>> pairs;
};

struct SampsonResult {
  double mean_px = 0.0;
  int used = 0;
  int skipped = 0;  // zero-denominator pairs excluded from the mean
};
// Mean over frames of the mean first-order epipolar distance
// |y^T F x| / sqrt(|SFx|^2 + |SF^T y|^2), S = diag(1, 1, 0).
SampsonResult sampson_error(const Trajectory& traj, const Intrinsics& k,
                            const CorrespondenceSet& correspondences);

// Shuttle self-consistency: the reversed-video trajectory is re-reversed,
// both are scaled to unit path length, rigidly aligned, then compared.
struct ShuttleResult {
  double s_ate = 0.0;
  double s_rte = 0.0;
  double s_rre_deg = 0.0;
  double s_focal_deg = 0.0;
};
ShuttleResult shuttle_compare(const Trajectory& forward,
                              const Trajectory& reversed_run, double fov_forward_deg,
                              double fov_reversed_deg);

// Runs the engine on the video and its time-reversed copy. The engine returns
// (trajectory in its own input order, estimated FOV in degrees).
using ShuttleEngine = std::function<std::pair<Trajectory, double>(bool reversed)>;
ShuttleResult shuttle_eval(const ShuttleEngine& engine);

}  // namespace vpe
