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

#include "vpe/geometry.h"

#include <cmath>

namespace vpe {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Eigen::Quaterniond so3_exp(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const double theta = std::sqrt(theta2);
  double w, k;
  if (theta < 1e-8) {
    // cos(t/2) and sin(t/2)/t to second order
    w = 1.0 - theta2 / 8.0;
    k = 0.5 - theta2 / 48.0;
  } else {
    w = std::cos(0.5 * theta);
    k = std::sin(0.5 * theta) / theta;
  }
  Eigen::Quaterniond q(w, k * phi.x(), k * phi.y(), k * phi.z());
  q.normalize();
  return q;
}

Vec3 so3_log(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  const Vec3 v(q.x(), q.y(), q.z());
  const double vn = v.norm();
  if (vn < 1e-12) return 2.0 * v;
  const double theta = 2.0 * std::atan2(vn, q.w());
  return (theta / vn) * v;
}

Pose Pose::exp(const Twist& xi) {
  const Vec3 rho = xi.head<3>();
  const Vec3 phi = xi.tail<3>();
  const double theta2 = phi.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 w = skew(phi);
  double a, b;  // V = I + a*W + b*W^2
  if (theta < 1e-6) {
    a = 0.5 - theta2 / 24.0;
    b = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    a = (1.0 - std::cos(theta)) / theta2;
    b = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Mat3 v_mat = Mat3::Identity() + a * w + b * w * w;
  Pose out;
  out.q = so3_exp(phi);
  out.t = v_mat * rho;
  return out;
}

Twist Pose::log() const {
  const Vec3 phi = so3_log(q);
  const double theta2 = phi.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 w = skew(phi);
  Mat3 v_inv;
  if (theta < 1e-6) {
    v_inv = Mat3::Identity() - 0.5 * w + (1.0 / 12.0 + theta2 / 720.0) * w * w;
  } else {
    const double c =
        (1.0 - 0.5 * theta * std::sin(theta) / (1.0 - std::cos(theta))) / theta2;
    v_inv = Mat3::Identity() - 0.5 * w + c * w * w;
  }
  Twist xi;
  xi.head<3>() = v_inv * t;
  xi.tail<3>() = phi;
  return xi;
}

Pose Pose::inverse() const {
  Pose out;
  out.q = q.conjugate();
  out.t = -(out.q * t);
  return out;
}

Pose Pose::operator*(const Pose& rhs) const {
  Pose out;
  out.q = (q * rhs.q).normalized();
  out.t = q * rhs.t + t;
  return out;
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation();
  m.topRightCorner<3, 1>() = t;
  return m;
}

bool Pose::approx_equal(const Pose& other, double tol) const {
  const double dt = (t - other.t).norm();
  const double dq = rotation_angle_rad(q.conjugate() * other.q);
  return dt <= tol && dq <= tol;
}

Pose pose_interpolate(const Pose& a, const Pose& b, double s) {
  return a * Pose::exp(s * (a.inverse() * b).log());
}

double rotation_angle_rad(const Eigen::Quaterniond& q) {
  return so3_log(q).norm();
}

Intrinsics Intrinsics::pinhole(double f, double w, double h) {
  Intrinsics k;
  k.model = CameraModel::kPinhole;
  k.f = f;
  k.alpha = 0.0;
  k.width = w;
  k.height = h;
  return k;
}

Intrinsics Intrinsics::unified(double f, double alpha, double w, double h) {
  Intrinsics k;
  k.model = CameraModel::kUnified;
  k.f = f;
  k.alpha = alpha;
  k.width = w;
  k.height = h;
  return k;
}

Intrinsics Intrinsics::from_fov_deg(double fov_deg, double w, double h) {
  const double half = 0.5 * fov_deg * M_PI / 180.0;
  return pinhole(0.5 * w / std::tan(half), w, h);
}

double Intrinsics::fov_deg() const {
  return 2.0 * std::atan2(0.5 * width, f) * 180.0 / M_PI;
}

Intrinsics Intrinsics::scaled(double s) const {
  Intrinsics k = *this;
  k.f = f * s;
  k.width = width * s;
  k.height = height * s;
  return k;
}

Mat3 Intrinsics::k_matrix() const {
  Mat3 k = Mat3::Identity();
  k(0, 0) = f;
  k(1, 1) = f;
  k(0, 2) = 0.5 * width;
  k(1, 2) = 0.5 * height;
  return k;
}

namespace {

// Both models share the closed form u = c + f * (x, y) / (z + alpha * |X|);
// pinhole is alpha = 0 (the alpha term then contributes exactly 0.0, so the
// pinhole path is bit-identical to unified with alpha = 0).
inline double effective_alpha(const Intrinsics& k) {
  return k.model == CameraModel::kUnified ? k.alpha : 0.0;
}

}  // namespace

bool try_project(const Vec3& x_cam, const Intrinsics& k, Vec2* uv) {
  const double rho2 = x_cam.x() * x_cam.x() + x_cam.y() * x_cam.y();
  if (rho2 == 0.0) {
    if (x_cam.z() <= 0.0) return false;
    *uv = k.principal();  // phi defined as 0 on the axis
    return true;
  }
  const double theta = std::atan2(std::sqrt(rho2), x_cam.z());
  if (!(theta < kThetaMaxRad)) return false;
  const double alpha = effective_alpha(k);
  const double denom = x_cam.z() + alpha * x_cam.norm();
  *uv = k.principal() + (k.f / denom) * Vec2(x_cam.x(), x_cam.y());
  return true;
}

Vec2 project(const Vec3& x_cam, const Intrinsics& k) {
  Vec2 uv;
  if (!try_project(x_cam, k, &uv)) {
    fail("DegeneratePoint", "point at or beyond the 89.5 degree field-of-view cap");
  }
  return uv;
}

bool try_projection_jacobians(const Vec3& x_cam, const Intrinsics& k,
                              ProjectionJacobians* out) {
  const double x = x_cam.x(), y = x_cam.y(), z = x_cam.z();
  const double rho2 = x * x + y * y;
  const double alpha = effective_alpha(k);
  if (rho2 == 0.0) {
    if (z <= 0.0) return false;
    out->uv = k.principal();
    const double s = z * (1.0 + alpha);  // |X| = z on the axis
    out->j_point.setZero();
    out->j_point(0, 0) = k.f / s;
    out->j_point(1, 1) = k.f / s;
    out->j_params.setZero();
    return true;
  }
  const double theta = std::atan2(std::sqrt(rho2), z);
  if (!(theta < kThetaMaxRad)) return false;
  const double r = x_cam.norm();
  const double s = z + alpha * r;
  const double inv_s = 1.0 / s;
  const double f_s2 = k.f * inv_s * inv_s;
  out->uv = k.principal() + (k.f * inv_s) * Vec2(x, y);
  // ds/dX = alpha * X / r + (0, 0, 1)
  const Vec3 ds(alpha * x / r, alpha * y / r, 1.0 + alpha * z / r);
  out->j_point.row(0) = -f_s2 * x * ds.transpose();
  out->j_point(0, 0) += k.f * inv_s;
  out->j_point.row(1) = -f_s2 * y * ds.transpose();
  out->j_point(1, 1) += k.f * inv_s;
  out->j_params.setZero();
  out->j_params(0, 0) = x * inv_s;
  out->j_params(1, 0) = y * inv_s;
  if (k.model == CameraModel::kUnified) {
    out->j_params(0, 1) = -f_s2 * x * r;
    out->j_params(1, 1) = -f_s2 * y * r;
  }
  return true;
}

namespace {

// Solves tan(theta) from the normalized radial distance rd = q(theta):
//   T = rd * (1 + alpha * sqrt(1 + rd^2 (1 - alpha^2))) / (1 - rd^2 alpha^2).
// Returns false outside the model's valid radius.
inline bool unified_radial_inverse(double rd, double alpha, double* t_out) {
  const double denom = 1.0 - rd * rd * alpha * alpha;
  if (denom <= 1e-12) return false;
  const double root = std::sqrt(1.0 + rd * rd * (1.0 - alpha * alpha));
  *t_out = rd * (1.0 + alpha * root) / denom;
  return true;
}

}  // namespace

bool try_unproject_dir(const Vec2& uv, const Intrinsics& k, Vec3* dir) {
  const Vec2 c = k.principal();
  const double dx = (uv.x() - c.x()) / k.f;
  const double dy = (uv.y() - c.y()) / k.f;
  const double rd = std::sqrt(dx * dx + dy * dy);
  const double alpha = effective_alpha(k);
  double t;
  if (alpha == 0.0) {
    t = rd;
  } else if (!unified_radial_inverse(rd, alpha, &t)) {
    return false;
  }
  if (!(t < std::tan(kThetaMaxRad))) return false;
  if (rd == 0.0) {
    *dir = Vec3(0.0, 0.0, 1.0);
  } else {
    const double scale = t / rd;
    *dir = Vec3(scale * dx, scale * dy, 1.0);
  }
  return true;
}

bool try_unproject(const Vec2& uv, double inv_depth, const Intrinsics& k, Vec3* x_cam) {
  if (!(std::isfinite(inv_depth) && inv_depth > 0.0)) return false;
  Vec3 dir;
  if (!try_unproject_dir(uv, k, &dir)) return false;
  *x_cam = dir / inv_depth;
  return true;
}

Vec3 unproject(const Vec2& uv, double inv_depth, const Intrinsics& k) {
  if (!(std::isfinite(inv_depth) && inv_depth > 0.0)) {
    fail("InvalidDepth", "inverse depth must be finite and positive");
  }
  Vec3 x;
  if (!try_unproject(uv, inv_depth, k, &x)) {
    fail("DegeneratePoint", "pixel unprojects outside the valid field of view");
  }
  return x;
}

bool try_unproject_dir_jacobian(const Vec2& uv, const Intrinsics& k, Vec3* dir,
                                Eigen::Matrix<double, 3, 2>* j_params) {
  const Vec2 c = k.principal();
  const double dx = (uv.x() - c.x()) / k.f;
  const double dy = (uv.y() - c.y()) / k.f;
  const double rd = std::sqrt(dx * dx + dy * dy);
  const double alpha = effective_alpha(k);
  j_params->setZero();
  if (rd == 0.0) {
    // Center ray stays (0,0,1) under any f or alpha.
    *dir = Vec3(0.0, 0.0, 1.0);
    return true;
  }
  double t;
  double dt_drd, dt_dalpha;
  if (alpha == 0.0) {
    t = rd;
    dt_drd = 1.0;
    dt_dalpha = rd * std::sqrt(t * t + 1.0);  // implicit form below at alpha=0
  } else {
    if (!unified_radial_inverse(rd, alpha, &t)) return false;
    // Implicit F(T) = T - rd (1 + alpha sqrt(T^2+1)) = 0.
    const double root = std::sqrt(t * t + 1.0);
    const double f_t = 1.0 - rd * alpha * t / root;
    if (std::abs(f_t) < 1e-12) return false;
    dt_drd = (1.0 + alpha * root) / f_t;
    dt_dalpha = rd * root / f_t;
  }
  if (!(t < std::tan(kThetaMaxRad))) return false;
  const double cos_phi = dx / rd;
  const double sin_phi = dy / rd;
  *dir = Vec3(t * cos_phi, t * sin_phi, 1.0);
  // rd scales as 1/f, phi is f-invariant: d(dir_xy)/df = (cos,sin) dT/drd * (-rd/f).
  const double drd_df = -rd / k.f;
  (*j_params)(0, 0) = cos_phi * dt_drd * drd_df;
  (*j_params)(1, 0) = sin_phi * dt_drd * drd_df;
  if (k.model == CameraModel::kUnified) {
    (*j_params)(0, 1) = cos_phi * dt_dalpha;
    (*j_params)(1, 1) = sin_phi * dt_dalpha;
  }
  return true;
}

RectifyMap rectify_unified_to_pinhole(const Intrinsics& unified, const Intrinsics& pinhole) {
  RectifyMap map;
  map.source = unified;
  map.target = pinhole;
  const int rows = static_cast<int>(std::lround(pinhole.height));
  const int cols = static_cast<int>(std::lround(pinhole.width));
  map.src = Grid<Vec2>(rows, cols, Vec2::Zero());
  map.valid = Grid<uint8_t>(rows, cols, 0);
  for (int r = 0; r < rows; ++r) {
    for (int cidx = 0; cidx < cols; ++cidx) {
      Vec3 dir;
      if (!try_unproject_dir(Vec2(cidx, r), pinhole, &dir)) continue;
      Vec2 uv;
      if (!try_project(dir, unified, &uv)) continue;
      if (uv.x() < 0.0 || uv.x() > unified.width - 1.0 || uv.y() < 0.0 ||
          uv.y() > unified.height - 1.0) {
        continue;
      }
      map.src(r, cidx) = uv;
      map.valid(r, cidx) = 1;
    }
  }
  return map;
}

Grid<float> rectify_apply(const RectifyMap& map, const Grid<float>& image) {
  Grid<float> out(map.src.rows(), map.src.cols(), 0.0f);
  for (int r = 0; r < out.rows(); ++r) {
    for (int c = 0; c < out.cols(); ++c) {
      if (!map.valid(r, c)) continue;
      const Vec2& s = map.src(r, c);
      out(r, c) = static_cast<float>(bilinear(image, s.x(), s.y()));
    }
  }
  return out;
}

CubeRig CubeRig::make(int face_size) {
  CubeRig rig;
  const double w = static_cast<double>(face_size);
  // 90 degree horizontal FOV: f = W/2.
  rig.face_camera = Intrinsics::pinhole(0.5 * w, w, w);
  auto rot = [](const Vec3& axis, double deg) {
    return Pose(Eigen::Quaterniond(Eigen::AngleAxisd(deg * M_PI / 180.0, axis)),
                Vec3::Zero());
  };
  rig.extrinsics[kFront] = Pose();
  rig.extrinsics[kBack] = rot(Vec3::UnitY(), 180.0);
  rig.extrinsics[kLeft] = rot(Vec3::UnitY(), -90.0);
  rig.extrinsics[kRight] = rot(Vec3::UnitY(), 90.0);
  rig.extrinsics[kUp] = rot(Vec3::UnitX(), 90.0);    // camera +z -> rig -y
  rig.extrinsics[kDown] = rot(Vec3::UnitX(), -90.0);
  return rig;
}

std::optional<std::pair<int, Vec2>> CubeRig::project_rig_dir(const Vec3& dir_rig) const {
  if (dir_rig.squaredNorm() == 0.0) return std::nullopt;
  int best = -1;
  double best_z = 0.0;
  for (int face = 0; face < kFaces; ++face) {
    const Vec3 d_cam = extrinsics[face].q.conjugate() * dir_rig;
    if (d_cam.z() > best_z) {
      best_z = d_cam.z();
      best = face;
    }
  }
  if (best < 0) return std::nullopt;
  const Vec3 d_cam = extrinsics[best].q.conjugate() * dir_rig;
  Vec2 uv;
  if (!try_project(d_cam, face_camera, &uv)) return std::nullopt;
  return std::make_pair(best, uv);
}

}  // namespace vpe
