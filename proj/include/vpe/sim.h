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

#include "vpe/tracker.h"
#include "vpe/types.h"

namespace vpe::sim {

// Axis-spanned textured rectangle: origin + a * u_dir + b * v_dir,
// a in [0, u_extent], b in [0, v_extent]. u_dir, v_dir are unit vectors.
struct PlaneGeom {
  Vec3 origin = Vec3::Zero();
  Vec3 u_dir = Vec3::UnitX();
  Vec3 v_dir = Vec3::UnitY();
  double u_extent = 1.0;
  double v_extent = 1.0;
  int texture = 0;
};

// Rigidly moving textured box; its pose traces a smooth closed path so the
// object stays in frame for the whole sequence.
struct DynamicBox {
  Vec3 half_extents = Vec3(1.0, 1.0, 1.0);
  Vec3 center = Vec3(0.0, 0.0, 4.0);
  Vec3 translation_amp = Vec3(1.2, 0.3, 0.8);
  double rot_amp_rad = 0.5;
  Vec3 rot_axis = Vec3::UnitY();
  int texture = 3;
};

struct SceneConfig {
  int num_frames = 100;
  int width = 320;
  int height = 240;
  double fov_deg = 60.0;
  uint64_t seed = 0;
  int sprinkle_points = 500;
  double motion_scale = 1.0;
  bool palindrome = false;
  bool dynamic_object = false;
  double dynamic_size = 1.0;
};

// Three textured planes forming an open box, surface-sampled landmark
// points, an optional dynamic box, and a smooth camera trajectory starting
// at the identity.
struct Scene {
  SceneConfig cfg;
  Intrinsics camera;  // ground-truth full-resolution camera
  std::vector<PlaneGeom> planes;
  std::vector<DynamicBox> boxes;
  std::vector<Vec3> surface_points;          // world space, on static planes
  std::vector<Vec3> object_points;           // object frame, on box surfaces
  std::vector<Pose> trajectory;              // camera-to-world per frame

  static Scene build(const SceneConfig& cfg);
  const Pose& pose(int frame) const { return trajectory[frame]; }
  Pose object_pose(int box, double frame) const;
};

struct RaycastHit {
  double s = 0.0;  // camera depth when cast along a z-normalized direction
  bool dynamic = false;
  int texture = 0;
  Vec2 tex_uv = Vec2::Zero();
};
// First intersection along origin + s * dir, s > 0. dir need not be
// normalized; s is measured in units of |dir|.
bool raycast(const Scene& scene, double frame, const Vec3& origin, const Vec3& dir,
             RaycastHit* hit);

struct DepthRender {
  Grid<double> inv_depth;     // NaN where no geometry is hit
  Grid<uint8_t> static_mask;  // 0 where a dynamic object covers the pixel
};
DepthRender render_depth(const Scene& scene, int frame, const Intrinsics& k,
                         int rows, int cols);
DepthRender render_depth_serial(const Scene& scene, int frame, const Intrinsics& k,
                                int rows, int cols);

// Ground-truth correspondence field i -> j, occlusion-checked against the
// target frame. Pixels on dynamic objects carry the object-motion flow at
// full weight (masking is the consumer's job). sigma > 0 adds pixel-space
// Gaussian noise from a stream keyed by (scene seed, i, j); sigma = 0 draws
// nothing and is bit-reproducible.
FlowField induced_flow(const Scene& scene, int frame_i, int frame_j,
                       const Intrinsics& k, int rows, int cols, double sigma = 0.0);
FlowField induced_flow_serial(const Scene& scene, int frame_i, int frame_j,
                              const Intrinsics& k, int rows, int cols,
                              double sigma = 0.0);

// Long-range correspondences on landmark points visible (and unoccluded) in
// both frames, in full-resolution pixels. Noise applies to the target side.
TrackSet sample_tracks(const Scene& scene, int frame_i, int frame_j, int count,
                       double sigma = 0.0, bool include_dynamic = false);

// Textured grayscale rendering in [0, 1].
ImageF render_image(const Scene& scene, int frame, const Intrinsics& k, int rows,
                    int cols);

// Monocular depth oracle with a known affine corruption in inverse depth:
// 1 / d_out = alpha / z + beta. alpha = 1, beta = 0 returns true depth.
Grid<double> affine_depth(const Scene& scene, int frame, const Intrinsics& k,
                          int rows, int cols, double alpha, double beta);

}  // namespace vpe::sim
