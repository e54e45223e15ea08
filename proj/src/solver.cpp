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

#include "vpe/solver.h"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace vpe {

namespace {
constexpr double kDepthFreezeTol = 1e-12;
}

ReducedSystem schur_eliminate_depth(const NormalEquations& ne, double lambda) {
  ReducedSystem out;
  out.h = ne.h_cc;
  out.g = ne.g_c;
  for (int i = 0; i < ne.cam_dim; ++i) out.h(i, i) *= (1.0 + lambda);

  for (const NormalEquations::DepthBlock& block : ne.depth) {
    const int nc = static_cast<int>(block.cols.size());
    if (nc == 0) continue;
    Eigen::MatrixXd ht = Eigen::MatrixXd::Zero(nc, nc);
    Eigen::VectorXd gt = Eigen::VectorXd::Zero(nc);
    for (Eigen::Index u = 0; u < block.h_dd.size(); ++u) {
      const double damped = block.h_dd[u] * (1.0 + lambda);
      if (damped <= kDepthFreezeTol) {
        if (block.h_dd[u] != 0.0) ++out.frozen_pixels;
        continue;
      }
      const double w = 1.0 / damped;
      ht.noalias() += (w * block.h_dc.row(u).transpose()) * block.h_dc.row(u);
      gt.noalias() += (w * block.g_d[u]) * block.h_dc.row(u).transpose();
    }
    for (int p = 0; p < nc; ++p) {
      out.g[block.cols[p]] -= gt[p];
      for (int q = 0; q < nc; ++q) out.h(block.cols[p], block.cols[q]) -= ht(p, q);
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> back_substitute_depth(const NormalEquations& ne,
                                                   double lambda,
                                                   const Eigen::VectorXd& dc) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(ne.depth.size());
  for (const NormalEquations::DepthBlock& block : ne.depth) {
    Eigen::VectorXd dd = Eigen::VectorXd::Zero(block.h_dd.size());
    const int nc = static_cast<int>(block.cols.size());
    Eigen::VectorXd dc_local(nc);
    for (int p = 0; p < nc; ++p) dc_local[p] = dc[block.cols[p]];
    for (Eigen::Index u = 0; u < block.h_dd.size(); ++u) {
      const double damped = block.h_dd[u] * (1.0 + lambda);
      if (damped <= kDepthFreezeTol) continue;
      dd[u] = (block.g_d[u] - block.h_dc.row(u).dot(dc_local)) / damped;
    }
    out.push_back(std::move(dd));
  }
  return out;
}

SparseSolveResult sparse_factor_solve(const ReducedSystem& sys) {
  const int n = static_cast<int>(sys.h.rows());
  std::vector<Eigen::Triplet<double>> triplets;
  for (int c = 0; c < n; ++c) {
    for (int r = c; r < n; ++r) {  // lower triangle
      if (sys.h(r, c) != 0.0) triplets.emplace_back(r, c, sys.h(r, c));
    }
  }
  Eigen::SparseMatrix<double> h(n, n);
  h.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                        Eigen::AMDOrdering<int>>
      ldlt;
  ldlt.compute(h);
  if (ldlt.info() != Eigen::Success) {
    fail("NotPositiveDefinite", "sparse factorization failed");
  }
  if (n > 0 && ldlt.vectorD().minCoeff() <= 0.0) {
    fail("NotPositiveDefinite", "reduced camera system is not positive definite");
  }
  SparseSolveResult out;
  out.x = ldlt.solve(sys.g);
  const auto& perm = ldlt.permutationP().indices();
  out.permutation.assign(perm.data(), perm.data() + perm.size());
  return out;
}

namespace {

struct StateSnapshot {
  std::vector<Pose> poses;
  Intrinsics intrinsics;
  std::vector<std::pair<int, Grid<double>>> depths;  // vertex, grid
};

StateSnapshot take_snapshot(const BAGraph& graph, const SolveScope& scope) {
  StateSnapshot s;
  s.poses = graph.poses;
  s.intrinsics = graph.intrinsics;
  for (int v : scope.free_depth_vertices) {
    s.depths.emplace_back(v, graph.vertices[v].inv_depth);
  }
  return s;
}

void restore_snapshot(BAGraph* graph, const StateSnapshot& s) {
  graph->poses = s.poses;
  graph->intrinsics = s.intrinsics;
  for (const auto& [v, grid] : s.depths) graph->vertices[v].inv_depth = grid;
}

double logit(double a) { return std::log(a / (1.0 - a)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Applies the camera/depth step; returns its Euclidean norm.
double apply_step(BAGraph* graph, const NormalEquations& ne, const SolverConfig& cfg,
                  const Eigen::VectorXd& dc, const std::vector<Eigen::VectorXd>& dd) {
  double sq = dc.squaredNorm();
  for (size_t b = 0; b < ne.free_slots.size(); ++b) {
    const Twist xi = dc.segment<6>(6 * static_cast<Eigen::Index>(b));
    const int slot = ne.free_slots[b];
    graph->poses[slot] = Pose::exp(xi) * graph->poses[slot];
  }
  if (ne.intr_cols > 0) {
    const int c0 = ne.intr_col();
    graph->intrinsics.f *= std::exp(dc[c0]);
    if (ne.intr_cols > 1) {
      const double a = sigmoid(logit(graph->intrinsics.alpha) + dc[c0 + 1]);
      graph->intrinsics.alpha = std::clamp(a, 1e-5, 1.0 - 1e-6);
    }
  }
  for (size_t b = 0; b < ne.depth.size(); ++b) {
    Grid<double>& depth = graph->vertices[ne.depth[b].vertex].inv_depth;
    const Eigen::VectorXd& delta = dd[b];
    sq += delta.squaredNorm();
    for (Eigen::Index u = 0; u < delta.size(); ++u) {
      if (delta[u] == 0.0) continue;
      double& d = depth[static_cast<size_t>(u)];
      if (!depth_valid(d)) continue;
      d = std::clamp(d + delta[u], cfg.inv_depth_min, cfg.inv_depth_max);
    }
  }
  return std::sqrt(sq);
}

// Model-predicted energy decrease for the damped step (h·g + λ·hᵀDh with D
// the damping diagonal); positive whenever the damped system is positive
// definite.
double predicted_decrease(const NormalEquations& ne, double lambda,
                          const Eigen::VectorXd& dc,
                          const std::vector<Eigen::VectorXd>& dd) {
  double pred = dc.dot(ne.g_c) + lambda * dc.dot(ne.h_cc.diagonal().cwiseProduct(dc));
  for (size_t b = 0; b < ne.depth.size(); ++b) {
    const NormalEquations::DepthBlock& blk = ne.depth[b];
    pred += dd[b].dot(blk.g_d) + lambda * dd[b].dot(blk.h_dd.cwiseProduct(dd[b]));
  }
  return pred;
}

}  // namespace

SolveReport gauss_newton(BAGraph* graph, const SolverConfig& config,
                         const SolveScope& scope, const TermSwitches& switches,
                         std::ostream* log) {
  if (graph->edges.empty()) {
    fail("EmptyGraph", "gauss_newton requires at least one edge");
  }
  // The log-f / logit-alpha parameterization needs an interior starting point.
  if (scope.optimize_intrinsics && graph->intrinsics.model == CameraModel::kUnified &&
      graph->intrinsics.alpha < 1e-5) {
    graph->intrinsics.alpha = 1e-5;
  }

  AssembleParams aparams;
  aparams.alpha_reg = config.alpha_reg;
  aparams.huber_delta = config.huber_delta;
  auto build = [&](EnergyBreakdown* e) {
    return config.serial
               ? build_normal_equations_serial(*graph, scope, switches, aparams, e)
               : build_normal_equations(*graph, scope, switches, aparams, e);
  };
  auto energy_of = [&]() {
    return config.serial ? scoped_energy_serial(*graph, scope, switches, aparams)
                         : scoped_energy(*graph, scope, switches, aparams);
  };

  SolveReport report;
  double lambda = config.lambda_init;
  EnergyBreakdown energy;
  NormalEquations ne = build(&energy);
  report.initial_energy = energy.total();
  report.final_energy = energy.total();

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    double step_norm = 0.0;
    bool accepted = false;
    int npd_retries = 0;
    // Escalating lambda shrinks the trial step, so trial energies normally
    // fall back toward the current energy; three consecutive MATERIAL rises
    // (noise-floor hover is immaterial) mean the model and the objective
    // disagree pathologically. NaN trials count as rises.
    int increases = 0;
    double prev_trial = std::numeric_limits<double>::infinity();
    for (;;) {
      ReducedSystem reduced = schur_eliminate_depth(ne, lambda);
      SparseSolveResult solved;
      try {
        solved = sparse_factor_solve(reduced);
      } catch (const Error& err) {
        if (err.error_class() == "NotPositiveDefinite" && npd_retries < 5) {
          ++npd_retries;
          lambda *= 2.0;
          continue;
        }
        throw;
      }
      const std::vector<Eigen::VectorXd> dd = back_substitute_depth(ne, lambda, solved.x);

      // Converged steps exit before the acceptance test so that ulp-level
      // energy noise cannot masquerade as divergence.
      double sq = solved.x.squaredNorm();
      for (const Eigen::VectorXd& d : dd) sq += d.squaredNorm();
      step_norm = std::sqrt(sq);
      if (step_norm < config.step_tolerance) {
        report.converged = true;
        break;
      }

      const StateSnapshot snapshot = take_snapshot(*graph, scope);
      apply_step(graph, ne, config, solved.x, dd);
      const EnergyBreakdown new_energy = energy_of();
      // Pure Gauss-Newton overshoots along flat valleys, shaving off energy
      // ulps with large oscillating steps. Keep a step only when it realizes
      // a nontrivial fraction of the model's predicted decrease.
      const double actual = energy.total() - new_energy.total();
      const double predicted = predicted_decrease(ne, lambda, solved.x, dd);
      if (new_energy.total() <= energy.total() && actual >= 1e-3 * predicted) {
        energy = new_energy;
        lambda = std::max(0.5 * lambda, 1e-12);
        accepted = true;
        break;
      }
      restore_snapshot(graph, snapshot);
      ++report.rejected_steps;
      lambda *= 10.0;
      const double trial = new_energy.total();
      increases = !(trial <= prev_trial * (1.0 + 1e-3)) ? increases + 1 : 0;
      prev_trial = trial;
      if (increases >= 3) {
        fail("DivergedEnergy",
             "trial energy rose on three consecutive damping escalations");
      }
    }

    report.iterations = iter;
    report.final_step_norm = step_norm;
    report.lambda = lambda;
    report.final_energy = energy.total();
    if (log) {
      (*log) << "iter " << iter << " energy " << energy.total() << " lambda "
             << lambda << " step_norm " << step_norm << "\n";
    }
    if (report.converged) break;
    if (accepted && iter < config.max_iters) {
      ne = build(&energy);
      report.final_energy = energy.total();
    }
  }
  return report;
}

}  // namespace vpe
