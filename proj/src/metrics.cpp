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

#include "vpe/metrics.h"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

namespace vpe {
namespace {

void check_matched(const Trajectory& est, const Trajectory& ref) {
  if (est.size() != ref.size())
    fail("ConfigError", "trajectory size mismatch: " + std::to_string(est.size()) +
                            " vs " + std::to_string(ref.size()));
  if (est.empty()) fail("ConfigError", "empty trajectory");
}

Eigen::Matrix3Xd positions(const Trajectory& traj) {
  Eigen::Matrix3Xd p(3, traj.size());
  for (size_t i = 0; i < traj.size(); ++i) p.col(i) = traj[i].pose.t;
  return p;
}

}  // namespace

Alignment umeyama_align(const Trajectory& est, const Trajectory& ref, bool with_scale) {
  check_matched(est, ref);
  Alignment out;
  const Eigen::Matrix3Xd src = positions(est);
  const Eigen::Matrix3Xd dst = positions(ref);
  const int n = static_cast<int>(src.cols());

  // Rotation is only well determined when the points span a plane; flag
  // coincident/collinear clouds but still return the least-squares fit.
  const Vec3 mean = src.rowwise().mean();
  const Eigen::Matrix3d cov =
      (src.colwise() - mean) * (src.colwise() - mean).transpose() / std::max(1, n);
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov);
  const double s0 = svd.singularValues()(0);
  out.degenerate = n < 3 || s0 < 1e-24 || svd.singularValues()(1) <= 1e-12 * s0;

  const Eigen::Matrix4d t = Eigen::umeyama(src, dst, with_scale);
  const Eigen::Matrix3d sr = t.topLeftCorner<3, 3>();
  out.scale = with_scale ? std::cbrt(sr.determinant()) : 1.0;
  out.rotation = sr / out.scale;
  out.translation = t.topRightCorner<3, 1>();
  return out;
}

double ate(const Trajectory& est, const Trajectory& ref, AlignMode mode) {
  check_matched(est, ref);
  Alignment align;  // identity for kNone
  if (mode != AlignMode::kNone)
    align = umeyama_align(est, ref, mode == AlignMode::kSimilarity);
  double sum = 0.0;
  for (size_t i = 0; i < est.size(); ++i) {
    sum += (align.apply(est[i].pose.t) - ref[i].pose.t).squaredNorm();
  }
  return std::sqrt(sum / est.size());
}

double rte(const Trajectory& est, const Trajectory& ref, int delta) {
  check_matched(est, ref);
  if (delta < 1 || delta >= static_cast<int>(est.size()))
    fail("NoValidPairs", "delta " + std::to_string(delta) + " leaves no index pairs");
  double sum = 0.0;
  int count = 0;
  for (size_t i = 0; i + delta < est.size(); ++i) {
    const Pose rel_ref = ref[i].pose.inverse() * ref[i + delta].pose;
    const Pose rel_est = est[i].pose.inverse() * est[i + delta].pose;
    sum += (rel_ref.inverse() * rel_est).t.squaredNorm();
    ++count;
  }
  return std::sqrt(sum / count);
}

double rre_deg(const Trajectory& est, const Trajectory& ref, int delta) {
  check_matched(est, ref);
  if (delta < 1 || delta >= static_cast<int>(est.size()))
    fail("NoValidPairs", "delta " + std::to_string(delta) + " leaves no index pairs");
  double sum = 0.0;
  int count = 0;
  for (size_t i = 0; i + delta < est.size(); ++i) {
    const Pose rel_ref = ref[i].pose.inverse() * ref[i + delta].pose;
    const Pose rel_est = est[i].pose.inverse() * est[i + delta].pose;
    const double angle = rotation_angle_rad((rel_ref.inverse() * rel_est).q);
    sum += angle * angle;
    ++count;
  }
  return std::sqrt(sum / count) * 180.0 / M_PI;
}

double focal_error_deg(const Intrinsics& est, const Intrinsics& gt) {
  return std::abs(est.fov_deg() - gt.fov_deg());
}

double path_length(const Trajectory& traj) {
  double length = 0.0;
  for (size_t i = 1; i < traj.size(); ++i) {
    length += (traj[i].pose.t - traj[i - 1].pose.t).norm();
  }
  return length;
}

Mat3 fundamental_from_relative(const Pose& rel, const Intrinsics& k) {
  if (k.model != CameraModel::kPinhole)
    fail("ConfigError", "fundamental matrix requires pinhole intrinsics");
  if (rel.t.norm() < 1e-12)
    fail("ZeroBaseline", "relative translation is numerically zero");
  const Mat3 k_inv = k.k_matrix().inverse();
  return k_inv.transpose() * skew(rel.t) * rel.q.toRotationMatrix() * k_inv;
}

SampsonResult sampson_error(const Trajectory& traj, const Intrinsics& k,
                            const CorrespondenceSet& correspondences) {
  if (traj.size() < 2) fail("NoValidPairs", "need at least two poses");
  SampsonResult result;
  double frame_sum = 0.0;
  int frames_used = 0;
  const size_t n_pairs = std::min(correspondences.pairs.size(), traj.size() - 1);
  for (size_t i = 0; i < n_pairs; ++i) {
    const auto& list = correspondences.pairs[i];
    if (list.empty()) continue;
    const Pose rel = traj[i + 1].pose.inverse() * traj[i].pose;
    const Mat3 f = fundamental_from_relative(rel, k);
    double sum = 0.0;
    int used = 0;
    for (const auto& [x, y] : list) {
      const Vec3 xb(x.x(), x.y(), 1.0);
      const Vec3 yb(y.x(), y.y(), 1.0);
      const Vec3 fx = f * xb;
      const Vec3 fty = f.transpose() * yb;
      const double denom_sq =
          fx.x() * fx.x() + fx.y() * fx.y() + fty.x() * fty.x() + fty.y() * fty.y();
      if (denom_sq < 1e-30) {
        ++result.skipped;  // correspondence at the epipole
        continue;
      }
      sum += std::abs(yb.dot(fx)) / std::sqrt(denom_sq);
      ++used;
    }
    if (used > 0) {
      frame_sum += sum / used;
      ++frames_used;
      result.used += used;
    }
  }
  if (frames_used == 0) fail("NoValidPairs", "no usable correspondences");
  result.mean_px = frame_sum / frames_used;
  return result;
}

ShuttleResult shuttle_compare(const Trajectory& forward, const Trajectory& reversed_run,
                              double fov_forward_deg, double fov_reversed_deg) {
  if (forward.size() != reversed_run.size() || forward.size() < 2)
    fail("ConfigError", "shuttle trajectories must match and have >= 2 poses");

  // Put the reversed run back into forward frame order, keeping forward
  // timestamps so the pairing is by video position.
  Trajectory rev = reversed_run;
  std::reverse(rev.begin(), rev.end());
  for (size_t i = 0; i < rev.size(); ++i) rev[i].t = forward[i].t;

  const auto normalize = [](Trajectory traj) {
    const double length = path_length(traj);
    if (length < 1e-15)
      fail("NormalizationDegenerate", "zero-length trajectory in shuttle protocol");
    for (TimedPose& tp : traj) tp.pose.t /= length;
    return traj;
  };
  const Trajectory fwd_n = normalize(forward);
  Trajectory rev_n = normalize(rev);

  const Alignment align = umeyama_align(rev_n, fwd_n, /*with_scale=*/false);
  for (TimedPose& tp : rev_n) {
    tp.pose.t = align.apply(tp.pose.t);
    tp.pose.q = Eigen::Quaterniond(align.rotation) * tp.pose.q;
  }

  ShuttleResult result;
  result.s_ate = ate(rev_n, fwd_n, AlignMode::kNone);
  result.s_rte = rte(rev_n, fwd_n, 1);
  result.s_rre_deg = rre_deg(rev_n, fwd_n, 1);
  result.s_focal_deg = std::abs(fov_forward_deg - fov_reversed_deg);
  return result;
}

ShuttleResult shuttle_eval(const ShuttleEngine& engine) {
  const auto [fwd, fov_fwd] = engine(false);
  const auto [rev, fov_rev] = engine(true);
  return shuttle_compare(fwd, rev, fov_fwd, fov_rev);
}

}  // namespace vpe
