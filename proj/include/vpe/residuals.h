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

#include <map>

#include "vpe/graph.h"

namespace vpe {

// Per-pixel linearization of one directed flow constraint. Residual
// r[u] = project(T_j^-1 T_i unproject(u, D_i[u])) - u - flow[u], weighted by
// w[u]; invalid pixels carry weight 0 and zeroed entries. Pose Jacobians are
// with respect to left-multiplicative twists (translation first), depth with
// respect to inverse depth, intrinsics with respect to (log f, logit alpha).
// j_pose_j = -j_pose_i holds identically and is not stored.
struct ResidualBlock {
  int rows = 0;
  int cols = 0;
  int intr_params = 1;
  std::vector<Vec2> r;
  std::vector<double> w;
  std::vector<Mat26> j_pose_i;
  std::vector<Vec2> j_depth;
  std::vector<Mat2> j_intr;

  size_t size() const { return r.size(); }
  double energy() const;
};

ResidualBlock dense_flow_residual(const Pose& t_cam_i, const Pose& t_cam_j,
                                  const Grid<double>& inv_depth_i,
                                  const Intrinsics& k_lo, const FlowField& flow);

// Depth regularizer r[u] = D[u] - D_prior[u] with per-pixel weight m[u];
// pixels invalid in either map get weight 0.
struct DepthPriorBlock {
  std::vector<double> r;
  std::vector<double> w;
  double energy() const;
};
DepthPriorBlock depth_prior_residual(const Grid<double>& inv_depth,
                                     const Grid<double>& prior_inv_depth,
                                     const Grid<double>& prior_weight);

// Bilinear splat of long-range tracks onto the low-res grid, producing a
// sparse flow field in the dense constraint form. When a mask is given,
// masked (dynamic) cells receive no contributions — the residual at a cell is
// evaluated against that cell's own depth, so foreign motion must not land
// there. Cells with accumulated bilinear confidence below 1e-3 stay empty;
// the weight channel saturates at 1.
FlowField splat_tracks(const TrackSet& tracks, const Grid<uint8_t>& static_mask,
                       int rows, int cols);

// Multiplies flow weights by the static mask (0 = dynamic).
FlowField apply_static_mask(const FlowField& flow, const Grid<uint8_t>& static_mask);

struct TermSwitches {
  bool dense = true;
  bool sparse = true;
  bool depth_reg = true;
  bool masking = true;
};

struct EnergyBreakdown {
  double dense = 0.0;
  double sparse = 0.0;
  double depth_prior = 0.0;
  double total() const { return dense + sparse + depth_prior; }
};

// Which variables a solve may move. Pose slots and depth vertices absent
// from the lists stay frozen (gauge anchors, out-of-window state).
struct SolveScope {
  std::vector<int> free_pose_slots;
  std::vector<int> free_depth_vertices;
  bool optimize_intrinsics = false;

  static SolveScope all_but_first_pose(const BAGraph& graph, bool intrinsics);
  static SolveScope everything(const BAGraph& graph);
};

// Gauss-Newton normal equations with the depth block kept implicit: depth
// couples only through its diagonal h_dd and the per-pixel camera rows h_dc.
// Camera columns: 6 per free pose slot (ascending slot order), then the
// intrinsic parameters when optimized.
struct NormalEquations {
  int cam_dim = 0;
  int intr_cols = 0;  // 0, 1 (log f) or 2 (log f, logit alpha)
  std::vector<int> free_slots;
  Eigen::MatrixXd h_cc;
  Eigen::VectorXd g_c;  // -J^T W r

  struct DepthBlock {
    int vertex = -1;
    std::vector<int> cols;  // global camera columns this block touches
    Eigen::VectorXd h_dd;   // grid-sized; 0 marks invalid/unconstrained pixels
    Eigen::VectorXd g_d;
    Eigen::MatrixXd h_dc;   // grid size x cols.size()
  };
  std::vector<DepthBlock> depth;

  int col_of_slot(int slot) const;
  int intr_col() const { return intr_cols > 0 ? cam_dim - intr_cols : -1; }
};

struct AssembleParams {
  double alpha_reg = 0.05;
  double huber_delta = 0.0;  // 0 disables the robust reweighting
};

// Parallel (OpenMP) and serial reference assembly. Both group work per
// source vertex and reduce in vertex order, so their results are
// bit-identical at any thread count.
NormalEquations build_normal_equations(const BAGraph& graph, const SolveScope& scope,
                                       const TermSwitches& switches,
                                       const AssembleParams& params,
                                       EnergyBreakdown* energy);
NormalEquations build_normal_equations_serial(const BAGraph& graph,
                                              const SolveScope& scope,
                                              const TermSwitches& switches,
                                              const AssembleParams& params,
                                              EnergyBreakdown* energy);

// Energy of the subproblem seen by a scope (same edge set as the normal
// equations built from it).
EnergyBreakdown scoped_energy(const BAGraph& graph, const SolveScope& scope,
                              const TermSwitches& switches, const AssembleParams& params);
EnergyBreakdown scoped_energy_serial(const BAGraph& graph, const SolveScope& scope,
                                     const TermSwitches& switches,
                                     const AssembleParams& params);

// Whole-graph energy (every edge, every depth vertex).
EnergyBreakdown assemble_energy(const BAGraph& graph, const TermSwitches& switches,
                                double alpha_reg);

}  // namespace vpe
