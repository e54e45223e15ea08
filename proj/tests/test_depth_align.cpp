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
#include <optional>

#include "test_scene.h"
#include "test_util.h"
#include "vpe/depth_align.h"

using namespace vpe;

namespace {

// Fronto-parallel wall at z = depth with the camera sliding along x, so every
// pixel of every frame sees the wall at camera depth exactly `depth`.
sim::Scene wall_scene(double depth, int frames) {
  sim::Scene s;
  s.cfg.num_frames = frames;
  s.cfg.width = 160;
  s.cfg.height = 120;
  s.camera = Intrinsics::from_fov_deg(60.0, 160.0, 120.0);
  sim::PlaneGeom plane;
  plane.origin = Vec3(-20.0, -20.0, depth);
  plane.u_extent = 40.0;
  plane.v_extent = 40.0;
  s.planes.push_back(plane);
  for (int i = 0; i < frames; ++i)
    s.trajectory.push_back(
        Pose(Eigen::Quaterniond::Identity(), Vec3(0.1 * i, 0.0, 0.0)));
  return s;
}

sim::Scene box_scene(int frames) {
  sim::SceneConfig cfg;
  cfg.num_frames = frames;
  cfg.width = 160;
  cfg.height = 120;
  return sim::Scene::build(cfg);
}

// True-depth map with the known inverse-depth corruption 1/d = 2/z + 0.3.
constexpr double kVdaAlpha = 2.0;
constexpr double kVdaBeta = 0.3;

struct FakeVda final : VideoDepthProvider {
  const sim::Scene* scene = nullptr;
  int deny_frame = -1;
  int constant_frame = -1;  // frame answered with a flat (unfittable) map
  int shrink_frame = -1;    // frame answered at the wrong resolution
  std::optional<Grid<double>> depth_full(int frame, int view) override {
    if (frame == deny_frame) return std::nullopt;
    const int rows = static_cast<int>(scene->camera.height);
    const int cols = static_cast<int>(scene->camera.width);
    if (frame == shrink_frame) return Grid<double>(rows / 2, cols / 2, 1.0);
    if (frame == constant_frame) return Grid<double>(rows, cols, 3.0);
    return sim::affine_depth(*scene, frame, scene->camera, rows, cols, kVdaAlpha,
                             kVdaBeta);
  }
};

struct FakeMask final : MaskProvider {
  Grid<uint8_t> low;
  std::optional<Grid<uint8_t>> mask_low(int frame, int view) override {
    return low;
  }
};

// Reference BA depth: the true inverse depth on the full-resolution grid.
SparseDepthMap true_sparse(const sim::Scene& scene, int frame) {
  SparseDepthMap map;
  map.inv_depth = sim::render_depth(scene, frame, scene.camera,
                                    static_cast<int>(scene.camera.height),
                                    static_cast<int>(scene.camera.width))
                      .inv_depth;
  map.recount();
  return map;
}

}  // namespace

TEST_CASE("affine fit inverts a known inverse-depth corruption") {
  const sim::Scene scene = box_scene(4);
  const int rows = 120, cols = 160;
  const Grid<double> vda =
      sim::affine_depth(scene, 0, scene.camera, rows, cols, kVdaAlpha, kVdaBeta);
  SparseDepthMap ba = true_sparse(scene, 0);

  // 1/vda = 2 * inv + 0.3, so BA inverse depth = 0.5 * (1/vda) - 0.15.
  const AffineFit fit = fit_affine(vda, ba, {});
  CHECK_FALSE(fit.degenerate);
  CHECK(test::rel_err(fit.alpha, 0.5) < 1e-9);
  CHECK(test::rel_err(fit.beta, -0.15) < 1e-9);
  CHECK(fit.samples > 5000);

  // Composition with the fitted state reproduces metric depth.
  AffineState state{fit.alpha, fit.beta, 0.9, true};
  const Grid<double> hd = compose_hd_depth(vda, state);
  int checked = 0;
  for (int i = 0; i < rows * cols; ++i) {
    if (!depth_valid(ba.inv_depth[i])) continue;
    CHECK(test::rel_err(hd[i], 1.0 / ba.inv_depth[i]) < 1e-9);
    ++checked;
  }
  CHECK(checked == fit.samples);

  // Thinning the BA observations does not move the exact fit.
  for (int i = 0; i < rows * cols; ++i)
    if (i % 37 != 0) ba.inv_depth[i] = kInvalidDepth;
  ba.recount();
  const AffineFit thin = fit_affine(vda, ba, {});
  CHECK_FALSE(thin.degenerate);
  CHECK(test::rel_err(thin.alpha, 0.5) < 1e-9);
  CHECK(test::rel_err(thin.beta, -0.15) < 1e-9);
  CHECK(thin.samples < fit.samples);
}

TEST_CASE("affine fit flags unusable inputs as degenerate") {
  SUBCASE("constant depth has no scale information") {
    Grid<double> vda(10, 10, 2.0);
    SparseDepthMap ba;
    ba.inv_depth = Grid<double>(10, 10, 0.5);
    ba.recount();
    const AffineFit fit = fit_affine(vda, ba, {});
    CHECK(fit.degenerate);
    CHECK(fit.samples == 100);
  }

  SUBCASE("fewer than two samples") {
    Grid<double> vda(4, 4, kInvalidDepth);
    vda(1, 1) = 2.0;
    SparseDepthMap ba;
    ba.inv_depth = Grid<double>(4, 4, 0.5);
    ba.recount();
    const AffineFit fit = fit_affine(vda, ba, {});
    CHECK(fit.degenerate);
    CHECK(fit.samples == 1);
  }

  SUBCASE("non-positive recovered scale") {
    // BA inverse depth decreasing in 1/d forces alpha < 0.
    Grid<double> vda(6, 6, 0.0);
    SparseDepthMap ba;
    ba.inv_depth = Grid<double>(6, 6, 0.0);
    for (int i = 0; i < 36; ++i) {
      const double x = 1.0 + i / 36.0;  // 1/d in [1, 2)
      vda[i] = 1.0 / x;
      ba.inv_depth[i] = 5.0 - x;
    }
    ba.recount();
    CHECK(fit_affine(vda, ba, {}).degenerate);
  }

  SUBCASE("a fully dynamic mask leaves nothing to fit") {
    Grid<double> vda(5, 5, 2.0);
    SparseDepthMap ba;
    ba.inv_depth = Grid<double>(5, 5, 0.5);
    ba.recount();
    const AffineFit fit = fit_affine(vda, ba, Grid<uint8_t>(5, 5, 0));
    CHECK(fit.degenerate);
    CHECK(fit.samples == 0);
  }
}

TEST_CASE("affine objective is stationary and minimal at the fit") {
  const sim::Scene scene = box_scene(4);
  const int rows = 120, cols = 160;
  const Grid<double> vda =
      sim::affine_depth(scene, 0, scene.camera, rows, cols, kVdaAlpha, kVdaBeta);
  SparseDepthMap ba = true_sparse(scene, 0);
  // Deterministic per-pixel perturbation so the fit has a genuine residual.
  for (int i = 0; i < rows * cols; ++i) {
    if (!depth_valid(ba.inv_depth[i])) continue;
    ba.inv_depth[i] += 0.01 * std::sin(0.7 * i);
  }

  const AffineFit fit = fit_affine(vda, ba, {});
  REQUIRE_FALSE(fit.degenerate);
  const double at_fit = affine_objective(vda, ba, {}, fit.alpha, fit.beta);
  CHECK(at_fit > 0.0);

  const Eigen::VectorXd g_alpha = test::central_diff(
      [&](double a) {
        return Eigen::VectorXd::Constant(1, affine_objective(vda, ba, {}, a, fit.beta));
      },
      fit.alpha);
  const Eigen::VectorXd g_beta = test::central_diff(
      [&](double b) {
        return Eigen::VectorXd::Constant(1, affine_objective(vda, ba, {}, fit.alpha, b));
      },
      fit.beta);
  CHECK(std::abs(g_alpha[0]) < 1e-5);
  CHECK(std::abs(g_beta[0]) < 1e-5);

  for (const double da : {-1e-3, 1e-3}) {
    CHECK(affine_objective(vda, ba, {}, fit.alpha + da, fit.beta) > at_fit);
    CHECK(affine_objective(vda, ba, {}, fit.alpha, fit.beta + da) > at_fit);
  }
}

TEST_CASE("momentum chain seeds then averages exponentially") {
  AffineState state;
  state.momentum = 0.9;
  CHECK_FALSE(state.initialized);

  // First update seeds regardless of momentum.
  momentum_update(&state, 1.0, 0.5);
  CHECK(state.initialized);
  CHECK(state.alpha_hat == 1.0);
  CHECK(state.beta_hat == 0.5);

  momentum_update(&state, 2.0, -0.5);
  CHECK(std::abs(state.alpha_hat - 1.1) <= 1e-12);
  CHECK(std::abs(state.beta_hat - 0.4) <= 1e-12);
  momentum_update(&state, 2.0, -0.5);
  CHECK(std::abs(state.alpha_hat - 1.19) <= 1e-12);
  CHECK(std::abs(state.beta_hat - 0.31) <= 1e-12);

  // The recursion matches a hand-unrolled chain over many updates.
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  AffineState chained;
  chained.momentum = 0.9;
  double a_hand = 0.0, b_hand = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double a = u(rng), b = u(rng) - 1.0;
    momentum_update(&chained, a, b);
    if (i == 0) {
      a_hand = a;
      b_hand = b;
    } else {
      a_hand = 0.9 * a_hand + 0.1 * a;
      b_hand = 0.9 * b_hand + 0.1 * b;
    }
    CHECK(std::abs(chained.alpha_hat - a_hand) <= 1e-12);
    CHECK(std::abs(chained.beta_hat - b_hand) <= 1e-12);
  }

  // Zero momentum tracks the latest fit exactly.
  AffineState fresh;
  fresh.momentum = 0.0;
  momentum_update(&fresh, 1.5, 0.2);
  momentum_update(&fresh, 0.75, -0.1);
  CHECK(fresh.alpha_hat == 0.75);
  CHECK(fresh.beta_hat == -0.1);
}

TEST_CASE("depth composition handles identity and invalid pixels") {
  Grid<double> d(3, 4, 0.0);
  for (int i = 0; i < 12; ++i) d[i] = 0.5 + 0.25 * i;
  d(0, 1) = kInvalidDepth;
  d(1, 2) = 0.0;
  d(2, 3) = -3.0;

  AffineState identity{1.0, 0.0, 0.9, true};
  const Grid<double> out = compose_hd_depth(d, identity);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      if ((r == 0 && c == 1) || (r == 1 && c == 2) || (r == 2 && c == 3)) {
        CHECK(std::isnan(out(r, c)));
      } else {
        CHECK(test::rel_err(out(r, c), d(r, c)) < 1e-14);
      }
    }
  }

  // Non-positive composed inverse depth is marked invalid, not negated.
  AffineState bad{1.0, -1.0, 0.9, true};
  const Grid<double> neg = compose_hd_depth(Grid<double>(2, 2, 2.0), bad);
  for (int i = 0; i < 4; ++i) CHECK(std::isnan(neg[i]));
}

TEST_CASE("consistent cloud keeps verified geometry and drops conflicts") {
  const sim::Scene scene = wall_scene(5.0, 3);
  const ConsistencyParams params;

  const BAGraph base = test::make_gt_graph(scene, {0, 1, 2});
  const std::vector<Vec3> cloud = build_consistent_cloud(base, params);
  const int per_kf = low_res_rows(120) * low_res_cols(160);
  REQUIRE(static_cast<int>(cloud.size()) == 3 * per_kf);
  for (const Vec3& p : cloud) CHECK(std::abs(p.z() - 5.0) < 1e-9);

  SUBCASE("a depth outlier contradicted by its neighbors is dropped") {
    BAGraph g = test::make_gt_graph(scene, {0, 1, 2});
    g.vertices[1].inv_depth(7, 10) *= 1.5;
    const std::vector<Vec3> pruned = build_consistent_cloud(g, params);
    CHECK(pruned.size() == cloud.size() - 1);
    for (const Vec3& p : pruned) CHECK(p.z() > 4.0);
  }

  SUBCASE("dynamic-masked pixels never enter") {
    BAGraph g = test::make_gt_graph(scene, {0, 1, 2});
    int masked = 0;
    for (int r = 2; r <= 4; ++r) {
      for (int c = 3; c <= 6; ++c) {
        g.vertices[0].static_mask(r, c) = 0;
        ++masked;
      }
    }
    CHECK(build_consistent_cloud(g, params).size() == cloud.size() - masked);
  }

  SUBCASE("points no neighbor observes survive unverified") {
    const BAGraph solo = test::make_gt_graph(scene, {1});
    CHECK(static_cast<int>(build_consistent_cloud(solo, params).size()) == per_kf);
  }
}

TEST_CASE("cloud projection z-buffers nearest points within bounds") {
  const Intrinsics k = Intrinsics::pinhole(50.0, 16.0, 12.0);
  const Vec3 far_pt(0.0, 0.0, 2.0);
  const Vec3 near_pt(1e-4, 0.0, 1.0);  // same pixel after rounding

  for (const auto& cloud : {std::vector<Vec3>{far_pt, near_pt},
                            std::vector<Vec3>{near_pt, far_pt}}) {
    const SparseDepthMap map = project_cloud(cloud, Pose(), k);
    CHECK(map.inv_depth(6, 8) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(map.coverage == doctest::Approx(1.0 / (16.0 * 12.0)));
  }

  // Behind-camera and out-of-frame points are ignored.
  const SparseDepthMap empty =
      project_cloud({Vec3(0, 0, -1), Vec3(10, 0, 1)}, Pose(), k);
  CHECK(empty.coverage == 0.0);

  // A translated camera sees the point at the shifted pixel and depth.
  const Pose cam(Eigen::Quaterniond::Identity(), Vec3(0.0, 0.0, 1.0));
  const SparseDepthMap shifted = project_cloud({far_pt}, cam, k);
  CHECK(shifted.inv_depth(6, 8) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coverage gate routes sparse, infill, and prior cases") {
  const auto with_coverage = [](int valid) {
    SparseDepthMap map;
    map.inv_depth = Grid<double>(10, 100, kInvalidDepth);
    for (int i = 0; i < valid; ++i) map.inv_depth[i] = 0.5;
    map.recount();
    return map;
  };
  GateParams params;  // lo = 0.005, hi = 0.20

  SUBCASE("high coverage passes through untouched") {
    SparseDepthMap map = with_coverage(300);
    const double before = map.inv_depth[0];
    CHECK(coverage_gate(&map, nullptr, params) == GateRoute::kSparse);
    CHECK(map.inv_depth[0] == before);
    CHECK(std::isnan(map.inv_depth[999]));
  }

  SUBCASE("intermediate coverage runs the infill hook") {
    SparseDepthMap map = with_coverage(100);
    int calls = 0;
    params.infill = [&](const SparseDepthMap& in) {
      ++calls;
      SparseDepthMap full = in;
      for (int i = 0; i < 1000; ++i)
        if (!depth_valid(full.inv_depth[i])) full.inv_depth[i] = 0.25;
      return full;
    };
    CHECK(coverage_gate(&map, nullptr, params) == GateRoute::kInfill);
    CHECK(calls == 1);
    CHECK(map.coverage == 1.0);  // recounted after the hook
  }

  SUBCASE("intermediate coverage without a hook is left as-is") {
    SparseDepthMap map = with_coverage(100);
    CHECK(coverage_gate(&map, nullptr, params) == GateRoute::kInfill);
    CHECK(map.coverage == doctest::Approx(0.1));
  }

  SUBCASE("starved coverage substitutes the metric prior") {
    SparseDepthMap map = with_coverage(2);
    const Grid<double> prior(10, 100, 4.0);
    CHECK(coverage_gate(&map, &prior, params) == GateRoute::kPrior);
    CHECK(map.coverage == 1.0);
    CHECK(map.inv_depth[999] == 4.0);
  }

  SUBCASE("starved coverage without a prior reports the route anyway") {
    SparseDepthMap map = with_coverage(2);
    CHECK(coverage_gate(&map, nullptr, params) == GateRoute::kPrior);
    CHECK(map.coverage == doctest::Approx(0.002));
  }
}

TEST_CASE("mask upsampling replicates stride cells with edge clamping") {
  Grid<uint8_t> low(3, 4, 0);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) low(r, c) = static_cast<uint8_t>((r + c) % 2);

  const Grid<uint8_t> full = upsample_mask(low, 25, 33);
  REQUIRE(full.rows() == 25);
  REQUIRE(full.cols() == 33);
  for (int r = 0; r < 25; ++r) {
    for (int c = 0; c < 33; ++c) {
      const int lr = std::min(r / kDepthStride, 2);
      const int lc = std::min(c / kDepthStride, 3);
      CHECK(full(r, c) == low(lr, lc));
    }
  }
  CHECK(upsample_mask({}, 25, 33).empty());
}

TEST_CASE("video alignment recovers metric depth through the full driver") {
  const sim::Scene scene = box_scene(4);
  const BAGraph graph = test::make_gt_graph(scene, {0});
  const Trajectory traj = {{0.0, scene.pose(0)}};
  FakeVda vda;
  vda.scene = &scene;

  AlignConfig config;
  config.momentum = 0.0;
  config.gate.coverage_hi = 0.01;  // keyframe self-projection is ~1.5% dense

  const AlignResult res =
      align_video_depth(graph, traj, &vda, nullptr, nullptr, config);
  REQUIRE(res.depth.size() == 1);
  CHECK(res.degenerate_fits == 0);
  CHECK(res.routes[0] == GateRoute::kSparse);
  // The keyframe's own low-res pixels project back to exact full-resolution
  // positions, so the fit and the composed metric depth are both exact.
  CHECK(test::rel_err(res.fits[0].alpha, 0.5) < 1e-9);
  CHECK(test::rel_err(res.fits[0].beta, -0.15) < 1e-9);
  CHECK(res.states[0].alpha_hat == res.fits[0].alpha);

  const Grid<double> truth =
      sim::render_depth(scene, 0, scene.camera, 120, 160).inv_depth;
  int checked = 0;
  for (int i = 0; i < 120 * 160; ++i) {
    if (!depth_valid(truth[i]) || !depth_valid(res.depth[0][i])) continue;
    CHECK(test::rel_err(res.depth[0][i], 1.0 / truth[i]) < 1e-9);
    ++checked;
  }
  CHECK(checked > 5000);
}

TEST_CASE("video alignment smooths fits over frames near the truth") {
  const sim::Scene scene = box_scene(8);
  const BAGraph graph = test::make_gt_graph(scene, {0, 3, 6});
  Trajectory traj;
  for (int f = 0; f < 8; ++f)
    traj.push_back({static_cast<double>(f), scene.pose(f)});
  FakeVda vda;
  vda.scene = &scene;

  AlignConfig config;
  config.momentum = 0.9;
  config.gate.coverage_hi = 0.01;

  const AlignResult res =
      align_video_depth(graph, traj, &vda, nullptr, nullptr, config);
  REQUIRE(res.depth.size() == 8);
  CHECK(res.degenerate_fits == 0);
  for (int i = 0; i < 8; ++i) {
    // Cross-view projections land between pixel centers, so the fits are
    // near-exact rather than exact.
    CHECK(test::rel_err(res.fits[i].alpha, 0.5) < 0.05);
    CHECK(std::abs(res.fits[i].beta + 0.15) < 0.05);
  }

  // Composed depth tracks the true metric depth to a few percent.
  const Grid<double> truth =
      sim::render_depth(scene, 7, scene.camera, 120, 160).inv_depth;
  double err_sum = 0.0;
  int n = 0;
  for (int i = 0; i < 120 * 160; ++i) {
    if (!depth_valid(truth[i]) || !depth_valid(res.depth[7][i])) continue;
    err_sum += test::rel_err(res.depth[7][i], 1.0 / truth[i]);
    ++n;
  }
  REQUIRE(n > 10000);
  CHECK(err_sum / n < 0.05);
}

TEST_CASE("video alignment skips degenerate frames in the momentum chain") {
  const sim::Scene scene = box_scene(4);
  const BAGraph graph = test::make_gt_graph(scene, {0});
  Trajectory traj;
  for (int f = 0; f < 3; ++f)
    traj.push_back({static_cast<double>(f), scene.pose(f)});
  FakeVda vda;
  vda.scene = &scene;
  vda.constant_frame = 1;  // flat map, nothing to fit

  AlignConfig config;
  config.momentum = 0.0;
  config.gate.coverage_hi = 0.01;

  const AlignResult res =
      align_video_depth(graph, traj, &vda, nullptr, nullptr, config);
  CHECK(res.degenerate_fits == 1);
  CHECK(res.fits[1].degenerate);
  // The state carries frame 0 across the degenerate frame 1.
  CHECK(res.states[1].alpha_hat == res.states[0].alpha_hat);
  CHECK(res.states[1].beta_hat == res.states[0].beta_hat);
  CHECK(res.states[2].alpha_hat != res.states[1].alpha_hat);
}

TEST_CASE("video alignment honors dynamic masks during the fit") {
  const sim::Scene scene = box_scene(4);
  const BAGraph graph = test::make_gt_graph(scene, {0});
  const Trajectory traj = {{0.0, scene.pose(0)}};

  // Corrupt the video depth inside a block, then mask that block out.
  struct CorruptVda final : VideoDepthProvider {
    const sim::Scene* scene = nullptr;
    std::optional<Grid<double>> depth_full(int frame, int view) override {
      Grid<double> d = sim::affine_depth(*scene, frame, scene->camera, 120, 160,
                                         kVdaAlpha, kVdaBeta);
      for (int r = 34; r <= 69; ++r)
        for (int c = 42; c <= 85; ++c) d(r, c) += 10.0;
      return d;
    }
  } vda;
  vda.scene = &scene;

  FakeMask mask;
  mask.low = Grid<uint8_t>(low_res_rows(120), low_res_cols(160), 1);
  for (int r = 4; r <= 8; ++r)
    for (int c = 5; c <= 10; ++c) mask.low(r, c) = 0;

  AlignConfig config;
  config.momentum = 0.0;
  config.gate.coverage_hi = 0.01;

  const AlignResult masked =
      align_video_depth(graph, traj, &vda, nullptr, &mask, config);
  CHECK(test::rel_err(masked.fits[0].alpha, 0.5) < 1e-9);
  CHECK(test::rel_err(masked.fits[0].beta, -0.15) < 1e-9);

  const AlignResult unmasked =
      align_video_depth(graph, traj, &vda, nullptr, nullptr, config);
  CHECK(test::rel_err(unmasked.fits[0].alpha, 0.5) > 1e-6);
}

TEST_CASE("video alignment raises typed errors on bad inputs") {
  const sim::Scene scene = box_scene(4);
  const BAGraph graph = test::make_gt_graph(scene, {0});
  Trajectory traj = {{0.0, scene.pose(0)}, {1.0, scene.pose(1)}};
  FakeVda vda;
  vda.scene = &scene;
  const AlignConfig config;

  try {
    align_video_depth(BAGraph{}, traj, &vda, nullptr, nullptr, config);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "EmptyGraph");
  }
  try {
    align_video_depth(graph, traj, nullptr, nullptr, nullptr, config);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "ConfigError");
  }

  vda.deny_frame = 1;
  try {
    align_video_depth(graph, traj, &vda, nullptr, nullptr, config);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "ProviderFailure");
  }

  vda.deny_frame = -1;
  vda.shrink_frame = 1;
  try {
    align_video_depth(graph, traj, &vda, nullptr, nullptr, config);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "ProviderFailure");
  }
}
