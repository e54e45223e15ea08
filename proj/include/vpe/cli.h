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
#include <string>
#include <vector>

#include "vpe/config.h"

namespace vpe {

// Full argument-vector entry point (args exclude the program name). Returns
// the process exit code; failures print one "error: <Class>: <message>" line
// to `err`. Commands: simulate, solve, eval, shuttle, sampson.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Emits an oracle dataset directory (flows, priors, masks, video depth,
// tracks, ground truth) from the simulator settings in `config`.
void cmd_simulate(const RunConfig& config, const std::string& out_dir);

// End-to-end solve over a dataset directory. Writes trajectory.txt,
// kf_depth/, depth/ (when video depth is present), report.txt, and
// optionally cloud.ply. Metric lines are echoed to `out`.
void cmd_solve(const RunConfig& config, const std::string& dataset_dir,
               const std::string& out_dir, std::ostream& out);

// Trajectory comparison metrics, printed as "metric=value" lines.
void cmd_eval(const std::string& est_path, const std::string& gt_path, int delta,
              const std::string& mode, std::ostream& out);

// Forward/reversed self-consistency run over a dataset.
void cmd_shuttle(const RunConfig& config, const std::string& dataset_dir,
                 std::ostream& out);

// Mean Sampson epipolar error of tracked correspondences under a trajectory.
void cmd_sampson(const std::string& traj_path, const std::string& intrinsics_path,
                 const std::string& tracks_path, std::ostream& out);

}  // namespace vpe
