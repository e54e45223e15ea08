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

#include "vpe/residuals.h"

#include <algorithm>
#include <numeric>

namespace vpe {

double ResidualBlock::energy() const {
  double e = 0.0;
  for (size_t i = 0; i < r.size(); ++i) e += w[i] * r[i].squaredNorm();
  return e;
}

double DepthPriorBlock::energy() const {
  double e = 0.0;
  for (size_t i = 0; i < r.size(); ++i) e += w[i] * r[i] * r[i];
  return e;
}

namespace {

// Unprojection directions (and their intrinsic Jacobians) for every pixel of
// the low-res grid. Depends only on the intrinsics, so it is built once per
// assembly and shared across edges.
struct UnprojCache {
  int rows = 0, cols = 0;
  std::vector<Vec3> dir;
  std::vector<Eigen::Matrix<double, 3, 2>> j_k;
  std::vector<uint8_t> ok;

  void build(const Intrinsics& k_lo, int rows_in, int cols_in) {
    rows = rows_in;
    cols = cols_in;
    const size_t n = static_cast<size_t>(rows) * cols;
    dir.resize(n);
    j_k.resize(n);
    ok.assign(n, 0);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const size_t i = static_cast<size_t>(r) * cols + c;
        ok[i] = try_unproject_dir_jacobian(Vec2(c, r), k_lo, &dir[i], &j_k[i]) ? 1 : 0;
      }
    }
  }
};

// d(raw intrinsics)/d(optimized intrinsics): f_lo for log f (log is shift-
// invariant so full-res and low-res focal share the same derivative), and
// alpha (1 - alpha) for logit alpha.
inline Vec2 intr_chain(const Intrinsics& k_lo) {
  return Vec2(k_lo.f, k_lo.model == CameraModel::kUnified
                          ? k_lo.alpha * (1.0 - k_lo.alpha)
                          : 0.0);
}

struct EdgeGeom {
  Pose t_ci;    // camera pose of the source vertex
  Mat3 r_cj_t;  // transpose of the target camera rotation
  Mat3 r_rel;
  Vec3 t_rel;

  void set(const Pose& cam_i, const Pose& cam_j) {
    t_ci = cam_i;
    r_cj_t = cam_j.rotation().transpose();
    const Pose rel = cam_j.inverse() * cam_i;
    r_rel = rel.rotation();
    t_rel = rel.t;
  }
};

struct PixelTerm {
  Vec2 r = Vec2::Zero();
  double w = 0.0;
  Mat26 j_pose_i = Mat26::Zero();
  Vec2 j_depth = Vec2::Zero();
  Mat2 j_intr = Mat2::Zero();
};

// Single source of truth for the dense constraint. Every assembly path
// (parallel or serial, with or without Jacobians) goes through this, which
// is what makes the parallel/serial bit-equality guarantee possible.
template <bool kJac>
inline bool pixel_term(const EdgeGeom& g, const UnprojCache& cache, int r_idx,
                       int c_idx, double inv_d, const Vec2& flow, double w_in,
                       const Intrinsics& k_lo, const Vec2& chain, PixelTerm* out) {
  if (!(w_in > 0.0) || !depth_valid(inv_d)) return false;
  if (!std::isfinite(flow.x()) || !std::isfinite(flow.y())) return false;
  const size_t idx = static_cast<size_t>(r_idx) * cache.cols + c_idx;
  if (!cache.ok[idx]) return false;
  const Vec3 x_i = cache.dir[idx] / inv_d;
  const Vec3 x_j = g.r_rel * x_i + g.t_rel;
  ProjectionJacobians pj;
  if constexpr (kJac) {
    if (!try_projection_jacobians(x_j, k_lo, &pj)) return false;
  } else {
    if (!try_project(x_j, k_lo, &pj.uv)) return false;
  }
  out->r = pj.uv - Vec2(c_idx, r_idx) - flow;
  out->w = w_in;
  if constexpr (kJac) {
    const Vec3 x_w = g.t_ci * x_i;
    Mat36 dxj;
    dxj.leftCols<3>() = g.r_cj_t;
    dxj.rightCols<3>() = -g.r_cj_t * skew(x_w);
    out->j_pose_i = pj.j_point * dxj;
    out->j_depth = pj.j_point * (g.r_rel * (x_i * (-1.0 / inv_d)));
    Mat2 jk = pj.j_params;
    jk += pj.j_point * (g.r_rel * cache.j_k[idx]) / inv_d;
    jk.col(0) *= chain.x();
    jk.col(1) *= chain.y();
    out->j_intr = jk;
  }
  return true;
}

inline double robust_scale(double delta, double r_norm) {
  return (delta > 0.0 && r_norm > delta) ? delta / r_norm : 1.0;
}

}  // namespace

ResidualBlock dense_flow_residual(const Pose& t_cam_i, const Pose& t_cam_j,
                                  const Grid<double>& inv_depth_i,
                                  const Intrinsics& k_lo, const FlowField& flow) {
  ResidualBlock out;
  out.rows = flow.rows();
  out.cols = flow.cols();
  out.intr_params = k_lo.param_count();
  if (!inv_depth_i.same_size(flow.flow)) {
    fail("InvalidDepth", "depth and flow grids disagree in size");
  }
  const size_t n = flow.flow.size();
  out.r.assign(n, Vec2::Zero());
  out.w.assign(n, 0.0);
  out.j_pose_i.assign(n, Mat26::Zero());
  out.j_depth.assign(n, Vec2::Zero());
  out.j_intr.assign(n, Mat2::Zero());

  UnprojCache cache;
  cache.build(k_lo, flow.rows(), flow.cols());
  EdgeGeom geom;
  geom.set(t_cam_i, t_cam_j);
  const Vec2 chain = intr_chain(k_lo);

  for (int r = 0; r < flow.rows(); ++r) {
    for (int c = 0; c < flow.cols(); ++c) {
      const size_t i = static_cast<size_t>(r) * flow.cols() + c;
      PixelTerm pt;
      if (!pixel_term<true>(geom, cache, r, c, inv_depth_i(r, c), flow.flow(r, c),
                            flow.weight(r, c), k_lo, chain, &pt)) {
        continue;
      }
      out.r[i] = pt.r;
      out.w[i] = pt.w;
      out.j_pose_i[i] = pt.j_pose_i;
      out.j_depth[i] = pt.j_depth;
      out.j_intr[i] = pt.j_intr;
    }
  }
  return out;
}

DepthPriorBlock depth_prior_residual(const Grid<double>& inv_depth,
                                     const Grid<double>& prior_inv_depth,
                                     const Grid<double>& prior_weight) {
  DepthPriorBlock out;
  const size_t n = inv_depth.size();
  out.r.assign(n, 0.0);
  out.w.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double d = inv_depth[i];
    const double p = prior_inv_depth[i];
    const double m = prior_weight.empty() ? 1.0 : prior_weight[i];
    if (!depth_valid(d) || !depth_valid(p) || !(m > 0.0)) continue;
    out.r[i] = d - p;
    out.w[i] = m;
  }
  return out;
}

FlowField splat_tracks(const TrackSet& tracks, const Grid<uint8_t>& static_mask,
                       int rows, int cols) {
  Grid<Vec2> accum(rows, cols, Vec2::Zero());
  Grid<double> conf(rows, cols, 0.0);
  const double inv_s = 1.0 / kDepthStride;
  for (const Track& t : tracks.tracks) {
    if (!(t.confidence > 0.0)) continue;
    const Vec2 q = t.p_i * inv_s;
    const Vec2 disp = (t.p_j - t.p_i) * inv_s;
    const int x0 = static_cast<int>(std::floor(q.x()));
    const int y0 = static_cast<int>(std::floor(q.y()));
    const double fx = q.x() - x0, fy = q.y() - y0;
    const double bw[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    for (int k = 0; k < 4; ++k) {
      if (xs[k] < 0 || xs[k] >= cols || ys[k] < 0 || ys[k] >= rows) continue;
      // The residual at a receiving cell is evaluated against that cell's own
      // depth, so the mask must gate each receiving cell: a track just off a
      // dynamic region must not deposit static motion onto dynamic-depth
      // cells (or vice versa).
      if (!static_mask.empty() && static_mask(ys[k], xs[k]) == 0) continue;
      const double b = bw[k] * t.confidence;
      if (b <= 0.0) continue;
      accum(ys[k], xs[k]) += b * disp;
      conf(ys[k], xs[k]) += b;
    }
  }
  FlowField out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double s = conf(r, c);
      if (s < 1e-3) continue;
      out.flow(r, c) = accum(r, c) / s;
      out.weight(r, c) = std::min(1.0, s);
    }
  }
  return out;
}

FlowField apply_static_mask(const FlowField& flow, const Grid<uint8_t>& static_mask) {
  FlowField out = flow;
  if (static_mask.empty()) return out;
  for (int r = 0; r < out.rows(); ++r) {
    for (int c = 0; c < out.cols(); ++c) {
      if (static_mask(r, c) == 0) out.weight(r, c) = 0.0;
    }
  }
  return out;
}

SolveScope SolveScope::all_but_first_pose(const BAGraph& graph, bool intrinsics) {
  SolveScope scope;
  for (size_t s = 1; s < graph.poses.size(); ++s) {
    scope.free_pose_slots.push_back(static_cast<int>(s));
  }
  for (size_t v = 0; v < graph.vertices.size(); ++v) {
    if (graph.vertices[v].has_depth()) {
      scope.free_depth_vertices.push_back(static_cast<int>(v));
    }
  }
  scope.optimize_intrinsics = intrinsics;
  return scope;
}

SolveScope SolveScope::everything(const BAGraph& graph) {
  SolveScope scope;
  for (size_t s = 0; s < graph.poses.size(); ++s) {
    scope.free_pose_slots.push_back(static_cast<int>(s));
  }
  for (size_t v = 0; v < graph.vertices.size(); ++v) {
    if (graph.vertices[v].has_depth()) {
      scope.free_depth_vertices.push_back(static_cast<int>(v));
    }
  }
  return scope;
}

int NormalEquations::col_of_slot(int slot) const {
  auto it = std::lower_bound(free_slots.begin(), free_slots.end(), slot);
  if (it == free_slots.end() || *it != slot) return -1;
  return 6 * static_cast<int>(it - free_slots.begin());
}

namespace {

struct EdgeWork {
  int edge = -1;
  int src = -1;
  EdgeGeom geom;
  int ci = -1;  // global column of the source slot block, -1 if frozen
  int cj = -1;
  bool pose_active = true;  // false for same-slot (cross-view) edges
};

struct VertexAccum {
  std::vector<int> cols;  // sorted global camera columns
  Eigen::MatrixXd h;
  Eigen::VectorXd g;
  EnergyBreakdown energy;

  int local_of(int global) const {
    auto it = std::lower_bound(cols.begin(), cols.end(), global);
    return (it != cols.end() && *it == global) ? static_cast<int>(it - cols.begin())
                                               : -1;
  }
};

struct AssemblyPlan {
  std::vector<int> sorted_free_slots;
  std::vector<int> free_depth;  // sorted
  int intr_cols = 0;
  int cam_dim = 0;
  std::vector<EdgeWork> work;                // in edge order
  std::vector<std::vector<int>> by_vertex;   // work indices grouped by src
  std::vector<int> depth_block_of;           // vertex -> depth block idx or -1
};

bool contains(const std::vector<int>& sorted, int v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

AssemblyPlan make_plan(const BAGraph& graph, const SolveScope& scope) {
  AssemblyPlan plan;
  plan.sorted_free_slots = scope.free_pose_slots;
  std::sort(plan.sorted_free_slots.begin(), plan.sorted_free_slots.end());
  plan.sorted_free_slots.erase(
      std::unique(plan.sorted_free_slots.begin(), plan.sorted_free_slots.end()),
      plan.sorted_free_slots.end());
  plan.free_depth = scope.free_depth_vertices;
  std::sort(plan.free_depth.begin(), plan.free_depth.end());
  plan.intr_cols = scope.optimize_intrinsics ? graph.intrinsics.param_count() : 0;
  plan.cam_dim = 6 * static_cast<int>(plan.sorted_free_slots.size()) + plan.intr_cols;

  auto col_of_slot = [&](int slot) {
    auto it = std::lower_bound(plan.sorted_free_slots.begin(),
                               plan.sorted_free_slots.end(), slot);
    if (it == plan.sorted_free_slots.end() || *it != slot) return -1;
    return 6 * static_cast<int>(it - plan.sorted_free_slots.begin());
  };

  plan.by_vertex.resize(graph.vertices.size());
  for (size_t e = 0; e < graph.edges.size(); ++e) {
    const Edge& edge = graph.edges[e];
    const Keyframe& a = graph.vertices[edge.src];
    const Keyframe& b = graph.vertices[edge.dst];
    EdgeWork w;
    w.edge = static_cast<int>(e);
    w.src = edge.src;
    w.ci = col_of_slot(a.pose_slot);
    w.cj = col_of_slot(b.pose_slot);
    w.pose_active = a.pose_slot != b.pose_slot;
    const bool depth_free = contains(plan.free_depth, edge.src);
    if (w.ci < 0 && w.cj < 0 && !depth_free && plan.intr_cols == 0) continue;
    if (!a.has_depth()) continue;  // source must carry depth to constrain anything
    w.geom.set(graph.camera_pose(edge.src), graph.camera_pose(edge.dst));
    plan.by_vertex[edge.src].push_back(static_cast<int>(plan.work.size()));
    plan.work.push_back(w);
  }

  plan.depth_block_of.assign(graph.vertices.size(), -1);
  for (size_t i = 0; i < plan.free_depth.size(); ++i) {
    plan.depth_block_of[plan.free_depth[i]] = static_cast<int>(i);
  }
  return plan;
}

// Camera columns a vertex's owned edges couple to (block-contiguous, sorted).
std::vector<int> vertex_columns(const AssemblyPlan& plan, int vertex) {
  std::vector<int> cols;
  auto add_block = [&cols](int c0, int n) {
    for (int i = 0; i < n; ++i) cols.push_back(c0 + i);
  };
  for (int wi : plan.by_vertex[vertex]) {
    const EdgeWork& w = plan.work[wi];
    if (w.pose_active) {
      if (w.ci >= 0) add_block(w.ci, 6);
      if (w.cj >= 0) add_block(w.cj, 6);
    }
    if (plan.intr_cols > 0) add_block(plan.cam_dim - plan.intr_cols, plan.intr_cols);
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  return cols;
}

template <bool kJac>
void process_vertex(const BAGraph& graph, const AssemblyPlan& plan,
                    const TermSwitches& switches, const AssembleParams& params,
                    const UnprojCache& cache, const Intrinsics& k_lo,
                    const Vec2& chain, int vertex, VertexAccum* acc,
                    NormalEquations::DepthBlock* depth_block) {
  const Keyframe& kf = graph.vertices[vertex];
  const bool depth_free = depth_block != nullptr;
  if constexpr (kJac) {
    acc->cols = vertex_columns(plan, vertex);
    const int n = static_cast<int>(acc->cols.size());
    acc->h = Eigen::MatrixXd::Zero(n, n);
    acc->g = Eigen::VectorXd::Zero(n);
    if (depth_free) {
      depth_block->vertex = vertex;
      depth_block->cols = acc->cols;
      const int npx = static_cast<int>(kf.inv_depth.size());
      depth_block->h_dd = Eigen::VectorXd::Zero(npx);
      depth_block->g_d = Eigen::VectorXd::Zero(npx);
      depth_block->h_dc = Eigen::MatrixXd::Zero(npx, n);
    }
  }

  const Grid<uint8_t>* mask =
      (switches.masking && !kf.static_mask.empty()) ? &kf.static_mask : nullptr;

  for (int wi : plan.by_vertex[vertex]) {
    const EdgeWork& w = plan.work[wi];
    const Edge& edge = graph.edges[w.edge];
    int li = -1, lj = -1, lk = -1;
    if constexpr (kJac) {
      if (w.pose_active && w.ci >= 0) li = acc->local_of(w.ci);
      if (w.pose_active && w.cj >= 0) lj = acc->local_of(w.cj);
      if (plan.intr_cols > 0) lk = acc->local_of(plan.cam_dim - plan.intr_cols);
    }
    for (int payload = 0; payload < 2; ++payload) {
      const bool is_sparse = payload == 1;
      if (!is_sparse && !switches.dense) continue;
      const FlowField& field =
          is_sparse ? (switches.masking ? edge.sparse : edge.sparse_unmasked)
                    : edge.flow;
      if (is_sparse && (!switches.sparse || field.empty())) continue;
      for (int r = 0; r < field.rows(); ++r) {
        for (int c = 0; c < field.cols(); ++c) {
          double w_in = field.weight(r, c);
          if (!is_sparse && mask != nullptr && (*mask)(r, c) == 0) w_in = 0.0;
          PixelTerm pt;
          if (!pixel_term<kJac>(w.geom, cache, r, c, kf.inv_depth(r, c),
                                field.flow(r, c), w_in, k_lo, chain, &pt)) {
            continue;
          }
          const double w_eff = pt.w * robust_scale(params.huber_delta, pt.r.norm());
          const double e = w_eff * pt.r.squaredNorm();
          (is_sparse ? acc->energy.sparse : acc->energy.dense) += e;
          if constexpr (!kJac) continue;

          const Vec2 wr = w_eff * pt.r;
          const Vec6 jt_r = pt.j_pose_i.transpose() * wr;
          Mat6 p;
          if (li >= 0 || lj >= 0) {
            p.noalias() = pt.j_pose_i.transpose() * (w_eff * pt.j_pose_i);
          }
          if (li >= 0) {
            acc->h.block<6, 6>(li, li) += p;
            acc->g.segment<6>(li) -= jt_r;
          }
          if (lj >= 0) {
            acc->h.block<6, 6>(lj, lj) += p;
            acc->g.segment<6>(lj) += jt_r;
          }
          if (li >= 0 && lj >= 0) {
            acc->h.block<6, 6>(li, lj) -= p;
            acc->h.block<6, 6>(lj, li) -= p;
          }
          if (lk >= 0) {
            const int nk = plan.intr_cols;
            const auto jk = pt.j_intr.leftCols(nk);
            acc->h.block(lk, lk, nk, nk).noalias() += jk.transpose() * (w_eff * jk);
            acc->g.segment(lk, nk).noalias() -= jk.transpose() * wr;
            using Cross = Eigen::Matrix<double, 6, Eigen::Dynamic, Eigen::ColMajor, 6, 2>;
            if (li >= 0) {
              const Cross cross = pt.j_pose_i.transpose() * (w_eff * jk);
              acc->h.block(li, lk, 6, nk) += cross;
              acc->h.block(lk, li, nk, 6) += cross.transpose();
            }
            if (lj >= 0) {
              const Cross cross = pt.j_pose_i.transpose() * (w_eff * jk);
              acc->h.block(lj, lk, 6, nk) -= cross;
              acc->h.block(lk, lj, nk, 6) -= cross.transpose();
            }
          }
          if (depth_free) {
            const size_t u = static_cast<size_t>(r) * field.cols() + c;
            depth_block->h_dd[u] += w_eff * pt.j_depth.squaredNorm();
            depth_block->g_d[u] -= pt.j_depth.dot(wr);
            if (li >= 0) {
              depth_block->h_dc.block<1, 6>(u, li) +=
                  w_eff * pt.j_depth.transpose() * pt.j_pose_i;
            }
            if (lj >= 0) {
              depth_block->h_dc.block<1, 6>(u, lj) -=
                  w_eff * pt.j_depth.transpose() * pt.j_pose_i;
            }
            if (lk >= 0) {
              depth_block->h_dc.block(u, lk, 1, plan.intr_cols) +=
                  w_eff * pt.j_depth.transpose() * pt.j_intr.leftCols(plan.intr_cols);
            }
          }
        }
      }
    }
  }

  const bool prior_active = switches.depth_reg && !kf.prior_inv_depth.empty() &&
                            contains(plan.free_depth, vertex);
  if (prior_active) {
    for (size_t u = 0; u < kf.inv_depth.size(); ++u) {
      const double d = kf.inv_depth[u];
      const double pr = kf.prior_inv_depth[u];
      const double m = kf.prior_weight.empty() ? 1.0 : kf.prior_weight[u];
      if (!depth_valid(d) || !depth_valid(pr) || !(m > 0.0)) continue;
      const double wm = params.alpha_reg * m;
      const double res = d - pr;
      acc->energy.depth_prior += wm * res * res;
      if constexpr (kJac) {
        depth_block->h_dd[u] += wm;
        depth_block->g_d[u] -= wm * res;
      }
    }
  }
}

template <bool kJac>
NormalEquations assemble_impl(const BAGraph& graph, const SolveScope& scope,
                              const TermSwitches& switches,
                              const AssembleParams& params, bool parallel,
                              EnergyBreakdown* energy_out) {
  const AssemblyPlan plan = make_plan(graph, scope);
  const Intrinsics k_lo = graph.low_intrinsics();
  const int rows = low_res_rows(graph.intrinsics.height);
  const int cols = low_res_cols(graph.intrinsics.width);
  UnprojCache cache;
  cache.build(k_lo, rows, cols);
  const Vec2 chain = intr_chain(k_lo);

  NormalEquations ne;
  ne.cam_dim = plan.cam_dim;
  ne.intr_cols = plan.intr_cols;
  ne.free_slots = plan.sorted_free_slots;
  if constexpr (kJac) {
    ne.h_cc = Eigen::MatrixXd::Zero(plan.cam_dim, plan.cam_dim);
    ne.g_c = Eigen::VectorXd::Zero(plan.cam_dim);
    ne.depth.resize(plan.free_depth.size());
  }

  const int nv = static_cast<int>(graph.vertices.size());
  std::vector<VertexAccum> accums(nv);

  auto run_vertex = [&](int v) {
    NormalEquations::DepthBlock* block = nullptr;
    if constexpr (kJac) {
      const int b = plan.depth_block_of[v];
      if (b >= 0) block = &ne.depth[b];
    }
    process_vertex<kJac>(graph, plan, switches, params, cache, k_lo, chain, v,
                         &accums[v], block);
  };

  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int v = 0; v < nv; ++v) run_vertex(v);
  } else {
    for (int v = 0; v < nv; ++v) run_vertex(v);
  }

  // Fixed-order reduction keeps results independent of the thread count.
  EnergyBreakdown energy;
  for (int v = 0; v < nv; ++v) {
    const VertexAccum& acc = accums[v];
    energy.dense += acc.energy.dense;
    energy.sparse += acc.energy.sparse;
    energy.depth_prior += acc.energy.depth_prior;
    if constexpr (kJac) {
      const int n = static_cast<int>(acc.cols.size());
      for (int p = 0; p < n; ++p) {
        ne.g_c[acc.cols[p]] += acc.g[p];
        for (int q = 0; q < n; ++q) ne.h_cc(acc.cols[p], acc.cols[q]) += acc.h(p, q);
      }
    }
  }
  if (energy_out) *energy_out = energy;
  return ne;
}

}  // namespace

NormalEquations build_normal_equations(const BAGraph& graph, const SolveScope& scope,
                                       const TermSwitches& switches,
                                       const AssembleParams& params,
                                       EnergyBreakdown* energy) {
  return assemble_impl<true>(graph, scope, switches, params, /*parallel=*/true, energy);
}

NormalEquations build_normal_equations_serial(const BAGraph& graph,
                                              const SolveScope& scope,
                                              const TermSwitches& switches,
                                              const AssembleParams& params,
                                              EnergyBreakdown* energy) {
  return assemble_impl<true>(graph, scope, switches, params, /*parallel=*/false,
                             energy);
}

EnergyBreakdown scoped_energy(const BAGraph& graph, const SolveScope& scope,
                              const TermSwitches& switches,
                              const AssembleParams& params) {
  EnergyBreakdown e;
  assemble_impl<false>(graph, scope, switches, params, /*parallel=*/true, &e);
  return e;
}

EnergyBreakdown scoped_energy_serial(const BAGraph& graph, const SolveScope& scope,
                                     const TermSwitches& switches,
                                     const AssembleParams& params) {
  EnergyBreakdown e;
  assemble_impl<false>(graph, scope, switches, params, /*parallel=*/false, &e);
  return e;
}

EnergyBreakdown assemble_energy(const BAGraph& graph, const TermSwitches& switches,
                                double alpha_reg) {
  SolveScope scope = SolveScope::everything(graph);
  AssembleParams params;
  params.alpha_reg = alpha_reg;
  return scoped_energy(graph, scope, switches, params);
}

}  // namespace vpe
