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

#include "vpe/depth_align.h"

#include <algorithm>
#include <cmath>

namespace vpe {
namespace {

// Temporally nearest other keyframes of the same view, by keyframe order.
std::vector<int> neighbor_vertices(const BAGraph& graph, int vertex, int count) {
  std::vector<int> same_view;
  int position = -1;
  for (size_t i = 0; i < graph.vertices.size(); ++i) {
    if (graph.vertices[i].view != graph.vertices[vertex].view) continue;
    if (static_cast<int>(i) == vertex) position = static_cast<int>(same_view.size());
    same_view.push_back(static_cast<int>(i));
  }
  std::vector<int> out;
  int lo = position - 1, hi = position + 1;
  while (static_cast<int>(out.size()) < count && (lo >= 0 || hi < static_cast<int>(same_view.size()))) {
    const bool take_lo =
        hi >= static_cast<int>(same_view.size()) ||
        (lo >= 0 && position - lo <= hi - position);
    if (take_lo) {
      out.push_back(same_view[lo--]);
    } else {
      out.push_back(same_view[hi++]);
    }
  }
  return out;
}

// One keyframe's surviving world points, in row-major pixel order.
void collect_vertex_points(const BAGraph& graph, int vertex,
                           const ConsistencyParams& params, std::vector<Vec3>* out) {
  const Keyframe& kf = graph.vertices[vertex];
  if (!kf.has_depth()) return;
  const Intrinsics low_k = graph.low_intrinsics();
  const Pose cam = graph.camera_pose(vertex);
  const std::vector<int> neighbors = neighbor_vertices(graph, vertex, params.neighbors);

  struct Observer {
    Pose world_to_cam;
    const Keyframe* kf;
  };
  std::vector<Observer> observers;
  observers.reserve(neighbors.size());
  for (int n : neighbors) {
    if (!graph.vertices[n].has_depth()) continue;
    observers.push_back({graph.camera_pose(n).inverse(), &graph.vertices[n]});
  }

  const int window = static_cast<int>(std::ceil(params.tau_px));
  for (int r = 0; r < kf.inv_depth.rows(); ++r) {
    for (int c = 0; c < kf.inv_depth.cols(); ++c) {
      const double inv = kf.inv_depth(r, c);
      if (!depth_valid(inv)) continue;
      if (!kf.static_mask.empty() && kf.static_mask(r, c) == 0) continue;
      Vec3 dir;
      if (!try_unproject_dir(Vec2(c, r), low_k, &dir)) continue;
      const Vec3 x_world = cam * (dir / inv);

      bool observed = false, verified = false;
      for (const Observer& obs : observers) {
        const Vec3 x_cam = obs.world_to_cam * x_world;
        if (x_cam.z() <= 1e-9) continue;
        Vec2 uv;
        if (!try_project(x_cam, low_k, &uv)) continue;
        if (uv.x() < 0.0 || uv.x() > obs.kf->inv_depth.cols() - 1.0 || uv.y() < 0.0 ||
            uv.y() > obs.kf->inv_depth.rows() - 1.0)
          continue;
        observed = true;
        const int cu = static_cast<int>(std::lround(uv.x()));
        const int cv = static_cast<int>(std::lround(uv.y()));
        for (int dv = -window; dv <= window && !verified; ++dv) {
          for (int du = -window; du <= window && !verified; ++du) {
            const int pu = cu + du, pv = cv + dv;
            if (!obs.kf->inv_depth.in_bounds(pv, pu)) continue;
            const double inv_obs = obs.kf->inv_depth(pv, pu);
            if (!depth_valid(inv_obs)) continue;
            if (std::abs(1.0 / inv_obs - x_cam.z()) <= params.tau_rel * x_cam.z())
              verified = true;
          }
        }
        if (verified) break;
      }
      // Unobserved points survive; observed ones need one confirming witness.
      if (!observed || verified) out->push_back(x_world);
    }
  }
}

template <bool kParallel>
std::vector<Vec3> build_cloud_impl(const BAGraph& graph,
                                   const ConsistencyParams& params) {
  const int n = static_cast<int>(graph.vertices.size());
  std::vector<std::vector<Vec3>> per_vertex(n);
#pragma omp parallel for schedule(dynamic) if (kParallel)
  for (int v = 0; v < n; ++v) {
    collect_vertex_points(graph, v, params, &per_vertex[v]);
  }
  std::vector<Vec3> cloud;  // fixed vertex-order concatenation
  for (int v = 0; v < n; ++v) {
    cloud.insert(cloud.end(), per_vertex[v].begin(), per_vertex[v].end());
  }
  return cloud;
}

}  // namespace

void SparseDepthMap::recount() {
  int valid = 0;
  const int n = inv_depth.rows() * inv_depth.cols();
  for (int i = 0; i < n; ++i) {
    if (depth_valid(inv_depth[i])) ++valid;
  }
  coverage = n > 0 ? static_cast<double>(valid) / n : 0.0;
}

std::vector<Vec3> build_consistent_cloud(const BAGraph& graph,
                                         const ConsistencyParams& params) {
  return build_cloud_impl<true>(graph, params);
}

std::vector<Vec3> build_consistent_cloud_serial(const BAGraph& graph,
                                                const ConsistencyParams& params) {
  return build_cloud_impl<false>(graph, params);
}

SparseDepthMap project_cloud(const std::vector<Vec3>& cloud, const Pose& camera,
                             const Intrinsics& k) {
  SparseDepthMap map;
  const int rows = static_cast<int>(k.height);
  const int cols = static_cast<int>(k.width);
  map.inv_depth = Grid<double>(rows, cols, kInvalidDepth);
  const Pose world_to_cam = camera.inverse();
  for (const Vec3& x_world : cloud) {
    const Vec3 x_cam = world_to_cam * x_world;
    if (x_cam.z() <= 1e-9) continue;
    Vec2 uv;
    if (!try_project(x_cam, k, &uv)) continue;
    const int c = static_cast<int>(std::lround(uv.x()));
    const int r = static_cast<int>(std::lround(uv.y()));
    if (!map.inv_depth.in_bounds(r, c)) continue;
    const double inv = 1.0 / x_cam.z();
    if (!depth_valid(map.inv_depth(r, c)) || inv > map.inv_depth(r, c)) {
      map.inv_depth(r, c) = inv;  // z-buffer: larger inverse depth is closer
    }
  }
  map.recount();
  return map;
}

SparseDepthMap aggregate_ba_depth(const BAGraph& graph, const Pose& camera,
                                  const Intrinsics& k,
                                  const ConsistencyParams& params) {
  if (graph.vertices.empty()) fail("EmptyGraph", "no keyframes to aggregate");
  return project_cloud(build_consistent_cloud(graph, params), camera, k);
}

AffineFit fit_affine(const Grid<double>& vda_depth, const SparseDepthMap& ba,
                     const Grid<uint8_t>& mask) {
  AffineFit fit;
  double sxx = 0.0, sx = 0.0, sxy = 0.0, sy = 0.0;
  int n = 0;
  const int total = vda_depth.rows() * vda_depth.cols();
  for (int i = 0; i < total; ++i) {
    const double d = vda_depth[i];
    if (!std::isfinite(d) || d <= 0.0) continue;
    const double y = ba.inv_depth[i];
    if (!depth_valid(y)) continue;
    if (!mask.empty() && mask[i] == 0) continue;
    const double x = 1.0 / d;
    sxx += x * x;
    sx += x;
    sxy += x * y;
    sy += y;
    ++n;
  }
  fit.samples = n;
  if (n < 2) {
    fit.degenerate = true;
    return fit;
  }
  const double det = sxx * n - sx * sx;  // = n^2 * var(x)
  if (det <= 1e-12 * sxx * n) {
    fit.degenerate = true;
    return fit;
  }
  const double alpha = (sxy * n - sx * sy) / det;
  const double beta = (sxx * sy - sx * sxy) / det;
  if (!(alpha > 0.0)) {
    fit.degenerate = true;  // scale positivity enforced
    return fit;
  }
  fit.alpha = alpha;
  fit.beta = beta;
  return fit;
}

double affine_objective(const Grid<double>& vda_depth, const SparseDepthMap& ba,
                        const Grid<uint8_t>& mask, double alpha, double beta) {
  double sum = 0.0;
  const int total = vda_depth.rows() * vda_depth.cols();
  for (int i = 0; i < total; ++i) {
    const double d = vda_depth[i];
    if (!std::isfinite(d) || d <= 0.0) continue;
    const double y = ba.inv_depth[i];
    if (!depth_valid(y)) continue;
    if (!mask.empty() && mask[i] == 0) continue;
    const double r = alpha / d + beta - y;
    sum += r * r;
  }
  return sum;
}

void momentum_update(AffineState* state, double alpha, double beta) {
  if (!state->initialized) {
    state->alpha_hat = alpha;
    state->beta_hat = beta;
    state->initialized = true;
    return;
  }
  const double m = state->momentum;
  state->alpha_hat = m * state->alpha_hat + (1.0 - m) * alpha;
  state->beta_hat = m * state->beta_hat + (1.0 - m) * beta;
}

Grid<double> compose_hd_depth(const Grid<double>& vda_depth, const AffineState& state) {
  Grid<double> out(vda_depth.rows(), vda_depth.cols(), kInvalidDepth);
  const int total = vda_depth.rows() * vda_depth.cols();
  for (int i = 0; i < total; ++i) {
    const double d = vda_depth[i];
    if (!std::isfinite(d) || d <= 0.0) continue;
    const double denom = state.alpha_hat / d + state.beta_hat;
    if (!(denom > 0.0)) continue;
    out[i] = 1.0 / denom;
  }
  return out;
}

GateRoute coverage_gate(SparseDepthMap* target, const Grid<double>* prior_full,
                        const GateParams& params) {
  if (target->coverage >= params.coverage_hi) return GateRoute::kSparse;
  if (target->coverage >= params.coverage_lo) {
    if (params.infill) {
      *target = params.infill(*target);
      target->recount();
    }
    return GateRoute::kInfill;
  }
  if (prior_full != nullptr) {
    target->inv_depth = *prior_full;
    target->recount();
  }
  return GateRoute::kPrior;
}

Grid<uint8_t> upsample_mask(const Grid<uint8_t>& low, int rows, int cols) {
  if (low.empty()) return {};
  Grid<uint8_t> full(rows, cols, 1);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      full(r, c) = low(std::min(r / kDepthStride, low.rows() - 1),
                       std::min(c / kDepthStride, low.cols() - 1));
    }
  }
  return full;
}

AlignResult align_video_depth(const BAGraph& graph, const Trajectory& traj,
                              VideoDepthProvider* vda, DepthPriorProvider* prior,
                              MaskProvider* mask, const AlignConfig& config) {
  if (graph.vertices.empty()) fail("EmptyGraph", "no keyframes to aggregate");
  if (vda == nullptr) fail("ConfigError", "video depth provider required");

  const std::vector<Vec3> cloud = build_consistent_cloud(graph, config.consistency);
  const int n = static_cast<int>(traj.size());
  const int rows = static_cast<int>(graph.intrinsics.height);
  const int cols = static_cast<int>(graph.intrinsics.width);

  AlignResult result;
  result.fits.resize(n);
  result.states.resize(n);
  result.routes.resize(n);
  result.depth.resize(n);

  // Pass 1: per-frame targets and affine fits (independent).
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const int frame = static_cast<int>(traj[i].t);
      const Pose camera = traj[i].pose * graph.extrinsics[0];
      SparseDepthMap sparse = project_cloud(cloud, camera, graph.intrinsics);

      std::optional<Grid<double>> prior_full;
      if (prior) prior_full = prior->prior_full(frame, 0);
      GateParams gate = config.gate;
      result.routes[i] =
          coverage_gate(&sparse, prior_full ? &*prior_full : nullptr, gate);

      auto vda_depth = vda->depth_full(frame, 0);
      if (!vda_depth) {
        errors[i] = "no video depth for frame " + std::to_string(frame);
        continue;
      }
      if (vda_depth->rows() != rows || vda_depth->cols() != cols) {
        errors[i] = "video depth resolution mismatch at frame " + std::to_string(frame);
        continue;
      }
      Grid<uint8_t> mask_full;
      if (mask) {
        if (auto low = mask->mask_low(frame, 0))
          mask_full = upsample_mask(*low, rows, cols);
      }
      result.fits[i] = fit_affine(*vda_depth, sparse, mask_full);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) fail("ProviderFailure", errors[i]);
  }

  // Pass 2: sequential momentum chain; degenerate fits leave the state as-is.
  AffineState state;
  state.momentum = config.momentum;
  for (int i = 0; i < n; ++i) {
    if (!result.fits[i].degenerate)
      momentum_update(&state, result.fits[i].alpha, result.fits[i].beta);
    else
      ++result.degenerate_fits;
    result.states[i] = state;
  }

  // Pass 3: compose metric depth (independent).
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const int frame = static_cast<int>(traj[i].t);
    auto vda_depth = vda->depth_full(frame, 0);
    result.depth[i] = compose_hd_depth(*vda_depth, result.states[i]);
  }
  return result;
}

}  // namespace vpe
