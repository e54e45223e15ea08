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

#include <Eigen/Geometry>
#include <array>
#include <optional>

#include "vpe/common.h"

namespace vpe {

using Twist = Vec6;  // [rho; phi], translation first

Mat3 skew(const Vec3& v);
Eigen::Quaterniond so3_exp(const Vec3& phi);
Vec3 so3_log(const Eigen::Quaterniond& q);

// Rigid transform, camera-to-world when used as a camera pose
// (X_world = R * X_cam + t). Updates are left-multiplicative:
// retract(xi) = exp(xi) * T.
struct Pose {
  Eigen::Quaterniond q{1.0, 0.0, 0.0, 0.0};
  Vec3 t{0.0, 0.0, 0.0};

  Pose() = default;
  Pose(const Eigen::Quaterniond& q_in, const Vec3& t_in) : q(q_in.normalized()), t(t_in) {}

  static Pose exp(const Twist& xi);
  Twist log() const;

  Pose inverse() const;
  Pose operator*(const Pose& rhs) const;
  Vec3 operator*(const Vec3& x) const { return q * x + t; }

  Pose retract(const Twist& xi) const { return exp(xi) * *this; }
  Mat3 rotation() const { return q.toRotationMatrix(); }
  Eigen::Matrix4d matrix() const;

  bool approx_equal(const Pose& other, double tol = 1e-9) const;
};

// Constant-velocity (geodesic) interpolation a * exp(s * log(a^-1 b));
// s outside [0, 1] extrapolates.
Pose pose_interpolate(const Pose& a, const Pose& b, double s);

double rotation_angle_rad(const Eigen::Quaterniond& q);

enum class CameraModel { kPinhole, kUnified };

// Radial camera u = c + f * q(theta) * (cos phi, sin phi) with the principal
// point pinned at the image center. Pinhole: q = tan(theta). Unified:
// q = tan(theta) / (1 + alpha * sqrt(tan^2 theta + 1)), alpha in [0, 1);
// alpha = 0 reduces exactly to pinhole.
struct Intrinsics {
  CameraModel model = CameraModel::kPinhole;
  double f = 0.0;
  double alpha = 0.0;
  double width = 0.0;
  double height = 0.0;

  static Intrinsics pinhole(double f, double w, double h);
  static Intrinsics unified(double f, double alpha, double w, double h);
  // Focal from a horizontal field of view: f = (W/2) / tan(fov/2).
  static Intrinsics from_fov_deg(double fov_deg, double w, double h);

  int param_count() const { return model == CameraModel::kUnified ? 2 : 1; }
  Vec2 principal() const { return {0.5 * width, 0.5 * height}; }
  double fov_deg() const;  // horizontal
  Intrinsics scaled(double s) const;
  Mat3 k_matrix() const;  // pinhole-style K (valid for alpha = 0)
};

// Rays through theta >= kThetaMaxRad are rejected as degenerate.
inline constexpr double kThetaMaxRad = 89.5 * M_PI / 180.0;

bool try_project(const Vec3& x_cam, const Intrinsics& k, Vec2* uv);
Vec2 project(const Vec3& x_cam, const Intrinsics& k);  // throws DegeneratePoint

// J_point = d(uv)/d(x_cam), 2x3. J_params = d(uv)/d(f[, alpha]), 2 x
// param_count, in the raw parameters (not log/logit).
struct ProjectionJacobians {
  Vec2 uv;
  Mat23 j_point;
  Eigen::Matrix<double, 2, 2> j_params;  // column 0: f; column 1: alpha (unified)
};
bool try_projection_jacobians(const Vec3& x_cam, const Intrinsics& k,
                              ProjectionJacobians* out);

// Unit-depth unprojection direction (z = 1 before scaling); X = dir / inv_d
// has camera depth z = 1/inv_d for pinhole. For unified the direction is
// still z-normalized so "depth" means z-depth consistently.
struct Ray {
  Vec2 pixel;
  Vec3 dir;  // z == 1
};

bool try_unproject(const Vec2& uv, double inv_depth, const Intrinsics& k, Vec3* x_cam);
Vec3 unproject(const Vec2& uv, double inv_depth, const Intrinsics& k);
bool try_unproject_dir(const Vec2& uv, const Intrinsics& k, Vec3* dir);

// d(dir)/d(f[, alpha]) for the z-normalized direction; rows x, y, z(=0).
bool try_unproject_dir_jacobian(const Vec2& uv, const Intrinsics& k,
                                Vec3* dir, Eigen::Matrix<double, 3, 2>* j_params);

// Precomputed resampling map from a unified-model image to a pinhole target.
// src(r, c) holds the source pixel for target pixel (c, r); valid == 0 marks
// targets mapping outside the source image.
struct RectifyMap {
  Intrinsics source;
  Intrinsics target;
  Grid<Vec2> src;
  Grid<uint8_t> valid;
};
RectifyMap rectify_unified_to_pinhole(const Intrinsics& unified, const Intrinsics& pinhole);
Grid<float> rectify_apply(const RectifyMap& map, const Grid<float>& image);

// Six pinhole views with 90 degree horizontal FOV covering the sphere.
// Extrinsics map camera coordinates to rig coordinates; the rig frame
// coincides with the "front" camera.
struct CubeRig {
  static constexpr int kFaces = 6;
  enum Face { kFront = 0, kBack, kLeft, kRight, kUp, kDown };
  std::array<Pose, kFaces> extrinsics;
  Intrinsics face_camera;

  static CubeRig make(int face_size);
  // Face whose frustum contains the rig-frame direction, and the pixel it
  // projects to.
  std::optional<std::pair<int, Vec2>> project_rig_dir(const Vec3& dir_rig) const;
};

}  // namespace vpe
