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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "test_util.h"
#include "vpe/metrics.h"

using namespace vpe;

namespace {

Trajectory line_trajectory(int n, double step = 1.0) {
  Trajectory t;
  for (int i = 0; i < n; ++i)
    t.push_back({static_cast<double>(i), Pose(Eigen::Quaterniond::Identity(),
                                              Vec3(step * i, 0.0, 0.0))});
  return t;
}

Trajectory random_trajectory(std::mt19937_64& rng, int n) {
  Trajectory t;
  Pose p;
  for (int i = 0; i < n; ++i) {
    t.push_back({static_cast<double>(i), p});
    p = p * test::random_pose(rng, 0.5, 0.2);
  }
  return t;
}

Trajectory transformed(const Trajectory& t, const Pose& g, double scale = 1.0) {
  Trajectory out = t;
  for (TimedPose& tp : out) {
    tp.pose.t = scale * (g.q * tp.pose.t) + g.t;
    tp.pose.q = g.q * tp.pose.q;
  }
  return out;
}

}  // namespace

TEST_CASE("umeyama alignment recovers rigid and similarity transforms") {
  std::mt19937_64 rng(31);
  const Trajectory ref = random_trajectory(rng, 12);

  SUBCASE("identity") {
    const Alignment a = umeyama_align(ref, ref, false);
    CHECK_FALSE(a.degenerate);
    CHECK((a.rotation - Mat3::Identity()).norm() < 1e-12);
    CHECK(a.translation.norm() < 1e-12);
    CHECK(a.scale == 1.0);
  }

  SUBCASE("known rigid motion") {
    const Pose g = test::random_pose(rng, 3.0, 1.5);
    const Trajectory est = transformed(ref, g.inverse());
    const Alignment a = umeyama_align(est, ref, false);
    for (size_t i = 0; i < ref.size(); ++i)
      CHECK((a.apply(est[i].pose.t) - ref[i].pose.t).norm() < 1e-9);
  }

  SUBCASE("known similarity with scale two") {
    Trajectory est = ref;
    for (TimedPose& tp : est) tp.pose.t *= 2.0;
    const Alignment a = umeyama_align(est, ref, true);
    CHECK(a.scale == doctest::Approx(0.5).epsilon(1e-12));
    for (size_t i = 0; i < ref.size(); ++i)
      CHECK((a.apply(est[i].pose.t) - ref[i].pose.t).norm() < 1e-9);
  }

  SUBCASE("collinear clouds are flagged degenerate") {
    const Trajectory line = line_trajectory(8);
    const Alignment a = umeyama_align(line, line, false);
    CHECK(a.degenerate);
    const Alignment b = umeyama_align(ref, ref, false);
    CHECK_FALSE(b.degenerate);
  }

  SUBCASE("two points are degenerate") {
    Trajectory two = {{0.0, Pose()}, {1.0, Pose(Eigen::Quaterniond::Identity(),
                                               Vec3(1, 2, 3))}};
    CHECK(umeyama_align(two, two, false).degenerate);
  }
}

TEST_CASE("ATE hand values and alignment invariances") {
  std::mt19937_64 rng(32);
  const Trajectory ref = random_trajectory(rng, 16);
  CHECK(ate(ref, ref, AlignMode::kNone) == 0.0);
  CHECK(ate(ref, ref) == doctest::Approx(0.0));

  // A single pose displaced by 0.1 raises the unaligned RMSE to 0.1/sqrt(N).
  Trajectory est = ref;
  est[5].pose.t += Vec3(0.0, 0.1, 0.0);
  CHECK(ate(est, ref, AlignMode::kNone) ==
        doctest::Approx(0.1 / std::sqrt(16.0)).epsilon(1e-12));

  // Rigid alignment removes any common rigid motion.
  const Pose g = test::random_pose(rng, 5.0, 2.0);
  CHECK(ate(transformed(est, g), ref, AlignMode::kRigid) ==
        doctest::Approx(ate(est, ref, AlignMode::kRigid)).epsilon(1e-9));

  // A pure scale error survives rigid alignment but not similarity alignment.
  Trajectory scaled = ref;
  for (TimedPose& tp : scaled) tp.pose.t *= 1.3;
  CHECK(ate(scaled, ref, AlignMode::kSimilarity) < 1e-9);
  CHECK(ate(scaled, ref, AlignMode::kRigid) > 1e-3);

  // Mismatched lengths are a configuration error.
  Trajectory shorter(ref.begin(), ref.end() - 1);
  try {
    ate(shorter, ref);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "ConfigError");
  }
}

TEST_CASE("relative errors on hand-built discrepancies") {
  const int n = 11;
  const Trajectory ref = line_trajectory(n);

  SUBCASE("identical trajectories score zero") {
    CHECK(rte(ref, ref, 1) == 0.0);
    CHECK(rre_deg(ref, ref, 1) == 0.0);
  }

  SUBCASE("one stretched step") {
    Trajectory est = ref;
    for (int i = 1; i < n; ++i) est[i].pose.t += Vec3(0.1, 0.0, 0.0);
    for (int delta = 1; delta <= 3; ++delta) {
      // Exactly the pairs straddling index 0 disagree, by 0.1 each.
      CHECK(rte(est, ref, delta) ==
            doctest::Approx(0.1 / std::sqrt(double(n - delta))).epsilon(1e-12));
    }
    CHECK(rre_deg(est, ref, 1) == doctest::Approx(0.0));
  }

  SUBCASE("uniform one-degree-per-step rotation drift") {
    Trajectory est = ref;
    for (int i = 0; i < n; ++i)
      est[i].pose.q = so3_exp(Vec3(0, 0, i * M_PI / 180.0));
    CHECK(rre_deg(est, ref, 1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rre_deg(est, ref, 3) == doctest::Approx(3.0).epsilon(1e-10));
  }

  SUBCASE("delta must leave pairs") {
    try {
      rte(ref, ref, n);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.error_class() == "NoValidPairs");
    }
    try {
      rre_deg(ref, ref, 0);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.error_class() == "NoValidPairs");
    }
  }
}

TEST_CASE("focal error measures field-of-view discrepancy in degrees") {
  const Intrinsics gt = Intrinsics::from_fov_deg(60.0, 640.0, 480.0);
  CHECK(focal_error_deg(gt, gt) == 0.0);
  const Intrinsics wide = Intrinsics::from_fov_deg(66.0, 640.0, 480.0);
  CHECK(focal_error_deg(wide, gt) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(focal_error_deg(gt, wide) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("path length accumulates step norms") {
  CHECK(path_length(line_trajectory(5, 2.0)) == doctest::Approx(8.0));
  CHECK(path_length(line_trajectory(1)) == 0.0);
}

TEST_CASE("fundamental matrix annihilates exact correspondences") {
  std::mt19937_64 rng(33);
  const Intrinsics k = Intrinsics::pinhole(400.0, 640.0, 480.0);
  const Pose pose_i = test::random_pose(rng, 0.5, 0.3);
  Pose pose_j = test::random_pose(rng, 0.5, 0.3);
  const Pose rel = pose_j.inverse() * pose_i;  // camera-i point into camera j
  const Mat3 f = fundamental_from_relative(rel, k);

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int s = 0; s < 200; ++s) {
    const Vec3 x_i(u(rng), u(rng), 2.0 + u(rng));  // in camera i
    Vec2 uv_i, uv_j;
    if (!try_project(x_i, k, &uv_i)) continue;
    if (!try_project(rel * x_i, k, &uv_j)) continue;
    const Vec3 a(uv_i.x(), uv_i.y(), 1.0);
    const Vec3 b(uv_j.x(), uv_j.y(), 1.0);
    CHECK(std::abs(b.dot(f * a)) < 1e-6);  // epipolar constraint
  }

  try {
    fundamental_from_relative(Pose(), k);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "ZeroBaseline");
  }
  try {
    fundamental_from_relative(rel, Intrinsics::unified(400.0, 0.5, 640.0, 480.0));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "ConfigError");
  }
}

TEST_CASE("sampson error on exact, scaled, and perturbed geometry") {
  std::mt19937_64 rng(34);
  const Intrinsics k = Intrinsics::pinhole(400.0, 640.0, 480.0);
  Trajectory traj = random_trajectory(rng, 6);

  // Exact correspondences frame-to-frame.
  CorrespondenceSet corr;
  corr.pairs.resize(traj.size() - 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (size_t i = 0; i + 1 < traj.size(); ++i) {
    const Pose rel = traj[i + 1].pose.inverse() * traj[i].pose;
    int placed = 0;
    while (placed < 8) {
      const Vec3 x(u(rng), u(rng), 2.5 + u(rng));
      Vec2 a, b;
      if (!try_project(x, k, &a) || !try_project(rel * x, k, &b)) continue;
      corr.pairs[i].push_back({a, b});
      ++placed;
    }
  }

  const SampsonResult exact = sampson_error(traj, k, corr);
  CHECK(exact.mean_px <= 1e-9);
  CHECK(exact.used == 8 * static_cast<int>(traj.size() - 1));
  CHECK(exact.skipped == 0);

  // Scaling the baseline scales F but not the Sampson distance: by a power
  // of two the result is bit-identical, generally equal to high precision.
  for (const double c : {8.0, 7.3}) {
    Trajectory scaled = traj;
    for (TimedPose& tp : scaled) tp.pose.t *= c;
    const SampsonResult res = sampson_error(scaled, k, corr);
    if (c == 8.0) {
      CHECK(res.mean_px == exact.mean_px);
    } else {
      CHECK(res.mean_px <= 1e-12);
    }
  }

  // A perpendicular nudge of one target point contributes, to first order,
  // its distance times a fixed geometric factor: doubling the nudge doubles
  // the mean.
  const Pose rel0 = traj[1].pose.inverse() * traj[0].pose;
  const Mat3 f0 = fundamental_from_relative(rel0, k);
  const auto nudged = [&](double d) {
    CorrespondenceSet c2 = corr;
    auto& [a, b] = c2.pairs[0][0];
    const Vec3 fx = f0 * Vec3(a.x(), a.y(), 1.0);
    const Vec2 normal = Vec2(fx.x(), fx.y()).normalized();
    c2.pairs[0][0].second = b + d * normal;
    return sampson_error(traj, k, c2).mean_px;
  };
  const double small = nudged(0.01), twice = nudged(0.02);
  CHECK(twice / small == doctest::Approx(2.0).epsilon(1e-3));
  // The nudged pair is one of eight in one of five frames; its first-order
  // distance never exceeds the true perpendicular displacement.
  const double per_pair = small * 8.0 * 5.0;
  CHECK(per_pair > 0.001);
  CHECK(per_pair < 0.01 * (1.0 + 1e-6));

  // Correspondences at the epipole are skipped, not counted.
  Trajectory fwd(2);
  fwd[0].pose = Pose();
  fwd[1].pose = Pose(Eigen::Quaterniond::Identity(), Vec3(0, 0, 0.5));
  CorrespondenceSet ec;
  ec.pairs.resize(1);
  ec.pairs[0].push_back({k.principal(), k.principal()});  // the epipole
  const Vec3 x(0.4, 0.2, 2.0);
  Vec2 a, b;
  REQUIRE(try_project(x, k, &a));
  REQUIRE(try_project(fwd[1].pose.inverse() * x, k, &b));
  ec.pairs[0].push_back({a, b});
  const SampsonResult er = sampson_error(fwd, k, ec);
  CHECK(er.skipped == 1);
  CHECK(er.used == 1);

  // No usable correspondences at all.
  CorrespondenceSet empty;
  empty.pairs.resize(1);
  try {
    sampson_error(fwd, k, empty);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "NoValidPairs");
  }
}

TEST_CASE("shuttle comparison of a perfectly symmetric pair is zero") {
  std::mt19937_64 rng(35);
  const Trajectory fwd = random_trajectory(rng, 14);
  Trajectory rev(fwd.rbegin(), fwd.rend());
  const ShuttleResult res = shuttle_compare(fwd, rev, 60.0, 60.0);
  CHECK(res.s_ate <= 1e-12);
  CHECK(res.s_rte <= 1e-12);
  CHECK(res.s_rre_deg <= 1e-10);
  CHECK(res.s_focal_deg == 0.0);
}

TEST_CASE("shuttle evaluation drives the engine in both directions") {
  std::mt19937_64 rng(37);
  const Trajectory fwd = random_trajectory(rng, 10);
  int calls = 0;
  const ShuttleEngine engine = [&](bool reversed) {
    ++calls;
    if (!reversed) return std::make_pair(fwd, 58.0);
    Trajectory rev(fwd.rbegin(), fwd.rend());
    return std::make_pair(rev, 58.5);
  };
  const ShuttleResult res = shuttle_eval(engine);
  CHECK(calls == 2);
  CHECK(res.s_ate <= 1e-12);
  CHECK(res.s_focal_deg == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("shuttle comparison matches a hand-rolled replication") {
  std::mt19937_64 rng(36);
  const Trajectory fwd = random_trajectory(rng, 12);
  Trajectory other = random_trajectory(rng, 12);
  Trajectory rev_run(other.rbegin(), other.rend());

  const ShuttleResult res = shuttle_compare(fwd, rev_run, 61.5, 60.25);
  CHECK(res.s_focal_deg == doctest::Approx(1.25).epsilon(1e-12));

  // Replicate: re-reverse, normalize both by path length, rigid-align the
  // reversed onto the forward run, read the raw RMSE.
  Trajectory rev = other;  // already forward order
  Trajectory fwd_n = fwd, rev_n = rev;
  const double lf = path_length(fwd_n), lr = path_length(rev_n);
  for (TimedPose& tp : fwd_n) tp.pose.t /= lf;
  for (TimedPose& tp : rev_n) tp.pose.t /= lr;
  const Alignment align = umeyama_align(rev_n, fwd_n, false);
  for (TimedPose& tp : rev_n) {
    tp.pose.t = align.apply(tp.pose.t);
    tp.pose.q = Eigen::Quaterniond(align.rotation) * tp.pose.q;
  }
  CHECK(res.s_ate == doctest::Approx(ate(rev_n, fwd_n, AlignMode::kNone)).epsilon(1e-12));
  CHECK(res.s_rte == doctest::Approx(rte(rev_n, fwd_n, 1)).epsilon(1e-12));
  CHECK(res.s_rre_deg ==
        doctest::Approx(rre_deg(rev_n, fwd_n, 1)).epsilon(1e-12));

  // Degenerate inputs.
  Trajectory still(12);
  for (int i = 0; i < 12; ++i) still[i].t = i;
  try {
    shuttle_compare(fwd, still, 60.0, 60.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "NormalizationDegenerate");
  }
  Trajectory shorter(fwd.begin(), fwd.end() - 1);
  try {
    shuttle_compare(fwd, shorter, 60.0, 60.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "ConfigError");
  }
}
