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
#include <vector>

#include "vpe/graph.h"
#include "vpe/providers.h"

namespace vpe {

// Full-resolution inverse depth with NaN marking uncovered pixels.
struct SparseDepthMap {
  Grid<double> inv_depth;
  double coverage = 0.0;  // valid fraction of H*W

  void recount();  // recomputes coverage from the grid
};

struct ConsistencyParams {
  double tau_px = 2.0;   // reprojection window half-size in low-res pixels
  double tau_rel = 0.05; // relative depth agreement
  int neighbors = 4;     // temporally nearest keyframes consulted per vertex
};

// World-space points from keyframe depth maps that pass the cross-keyframe
// consistency check: a point observed (in-bounds, in front) by at least one
// of the consulted neighbors must have its depth confirmed by one of them
// within tau_rel at some pixel within tau_px; points no neighbor observes are
// kept. Dynamic-masked pixels never enter the cloud.
std::vector<Vec3> build_consistent_cloud(const BAGraph& graph,
                                         const ConsistencyParams& params);
std::vector<Vec3> build_consistent_cloud_serial(const BAGraph& graph,
                                                const ConsistencyParams& params);

// Nearest-pixel z-buffered projection of the cloud into a full-resolution
// view (closest point wins; ties keep the earliest cloud point).
SparseDepthMap project_cloud(const std::vector<Vec3>& cloud, const Pose& camera,
                             const Intrinsics& k);

// build_consistent_cloud + project_cloud for a single target view.
SparseDepthMap aggregate_ba_depth(const BAGraph& graph, const Pose& camera,
                                  const Intrinsics& k, const ConsistencyParams& params);

// ---------------------------------------------------------------------------
// Affine alignment in inverse depth: find (alpha, beta) minimizing
// sum_M (alpha / d_vda + beta - inv_ba)^2 over masked valid pixels.

struct AffineFit {
  double alpha = 1.0;
  double beta = 0.0;
  bool degenerate = false;  // rank-deficient system or non-positive scale
  int samples = 0;
};

// mask (1 = static) may be empty = everything static. d_vda holds DEPTH.
AffineFit fit_affine(const Grid<double>& vda_depth, const SparseDepthMap& ba,
                     const Grid<uint8_t>& mask);

// The fitted objective, exposed so minimality is directly checkable.
double affine_objective(const Grid<double>& vda_depth, const SparseDepthMap& ba,
                        const Grid<uint8_t>& mask, double alpha, double beta);

// Exponential moving average over per-frame fits; the first update seeds the
// state directly.
struct AffineState {
  double alpha_hat = 1.0;
  double beta_hat = 0.0;
  double momentum = 0.9;
  bool initialized = false;
};
void momentum_update(AffineState* state, double alpha, double beta);

// Metric depth 1 / (alpha_hat / d_vda + beta_hat); pixels with a non-positive
// denominator (or invalid input) become NaN.
Grid<double> compose_hd_depth(const Grid<double>& vda_depth, const AffineState& state);

// ---------------------------------------------------------------------------
// Coverage gate selecting the alignment target per frame.

enum class GateRoute { kSparse, kInfill, kPrior };

using InfillHook = std::function<SparseDepthMap(const SparseDepthMap&)>;

struct GateParams {
  double coverage_lo = 0.005;
  double coverage_hi = 0.20;
  InfillHook infill;  // identity when unset
};

// coverage >= hi: use as-is. lo <= coverage < hi: run the infill hook.
// coverage < lo: substitute the frame's full-resolution metric prior when one
// is supplied (otherwise the sparse map is kept and the route still reports
// the substitution attempt).
GateRoute coverage_gate(SparseDepthMap* target, const Grid<double>* prior_full,
                        const GateParams& params);

// ---------------------------------------------------------------------------
// Whole-video driver: parallel per-frame fits, a sequential momentum chain,
// then parallel composition.

struct AlignConfig {
  ConsistencyParams consistency;
  GateParams gate;
  double momentum = 0.9;
};

struct AlignResult {
  std::vector<Grid<double>> depth;     // per frame, frame order of `traj`
  std::vector<AffineFit> fits;
  std::vector<AffineState> states;     // smoothed state used per frame
  std::vector<GateRoute> routes;
  int degenerate_fits = 0;
};

// traj timestamps are frame indices; view 0 of the rig is aligned.
AlignResult align_video_depth(const BAGraph& graph, const Trajectory& traj,
                              VideoDepthProvider* vda, DepthPriorProvider* prior,
                              MaskProvider* mask, const AlignConfig& config);

// Nearest (stride-cell) upsample of a low-res mask to full resolution.
Grid<uint8_t> upsample_mask(const Grid<uint8_t>& low, int rows, int cols);

}  // namespace vpe
