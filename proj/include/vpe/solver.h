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

#include <iosfwd>

#include "vpe/residuals.h"

namespace vpe {

// Camera system after eliminating the (diagonal) depth block, with
// multiplicative Levenberg damping (1 + lambda) already applied to the
// camera and depth diagonals. frozen_pixels counts constrained pixels whose
// damped depth diagonal fell at or below 1e-12 and were left untouched.
struct ReducedSystem {
  Eigen::MatrixXd h;
  Eigen::VectorXd g;
  int frozen_pixels = 0;
};

ReducedSystem schur_eliminate_depth(const NormalEquations& ne, double lambda = 0.0);

// Depth update by back-substitution; one vector per depth block, zeros for
// frozen/invalid pixels.
std::vector<Eigen::VectorXd> back_substitute_depth(const NormalEquations& ne,
                                                   double lambda,
                                                   const Eigen::VectorXd& dc);

// Fill-reducing sparse Cholesky (LDLT with approximate-minimum-degree
// ordering). Throws NotPositiveDefinite when the factorization fails or the
// system is indefinite.
struct SparseSolveResult {
  Eigen::VectorXd x;
  std::vector<int> permutation;  // fill-reducing ordering (a bijection)
};
SparseSolveResult sparse_factor_solve(const ReducedSystem& sys);

struct SolverConfig {
  int max_iters = 10;
  double step_tolerance = 1e-6;
  double lambda_init = 1e-4;
  double alpha_reg = 0.05;
  double huber_delta = 0.0;
  double inv_depth_min = 1e-4;
  double inv_depth_max = 1e4;
  bool serial = false;  // use the serial reference assembly
};

struct SolveReport {
  int iterations = 0;
  int rejected_steps = 0;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double final_step_norm = 0.0;
  double lambda = 0.0;
  bool converged = false;  // step norm fell below tolerance
};

// Damped Gauss-Newton over the scoped variables. Accepted iterations never
// increase the (scoped) energy; a step is retried with inflated damping when
// it does, and DivergedEnergy is raised after three consecutive increases.
// Logs one line per iteration to `log` when given:
//   iter <k> energy <E> lambda <L> step_norm <S>
SolveReport gauss_newton(BAGraph* graph, const SolverConfig& config,
                         const SolveScope& scope, const TermSwitches& switches,
                         std::ostream* log = nullptr);

}  // namespace vpe
