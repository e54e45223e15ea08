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
#include <set>
#include <vector>

#include "vpe/graph.h"
#include "vpe/providers.h"
#include "vpe/solver.h"

namespace vpe {

struct PipelineConfig {
  Intrinsics camera;  // initial guess; the backend refines it
  double keyframe_threshold = 2.4;  // mean low-res motion in pixels
  WindowParams window;
  double rig_covis_threshold = 0.3;
  std::vector<int> backend_schedule{8, 16, 64};  // keyframe counts; end always runs
  SolverConfig frontend_solver;  // intrinsics always frozen in the frontend
  SolverConfig backend_solver;
  bool optimize_intrinsics = true;  // backend only
  TermSwitches terms;
  std::vector<Pose> extrinsics{Pose()};  // camera-to-rig, one per view
  std::ostream* log = nullptr;
};

class RunConfig;

struct FrameRecord {
  int frame_index = -1;
  bool keyframe = false;
  bool infill_fallback = false;  // pose interpolated after a provider failure
  Pose pose;                      // rig-to-world; valid after finish()
};

struct SessionStats {
  int keyframes = 0;
  int backend_runs = 0;
  int infill_fallbacks = 0;
  double final_energy = 0.0;
};

// Sequential keyframe engine over one video: motion-gated keyframe selection,
// windowed frontend refinement, scheduled full-graph backend passes, then
// pose infill for the remaining frames. Multi-view rigs share one pose slot
// per timestamp with fixed extrinsics; motion gating reads view 0.
class VideoSession {
 public:
  VideoSession(const PipelineConfig& cfg, const ProviderSet& providers);

  // Frames must arrive in strictly increasing order. Frame 0 of a session
  // always becomes a keyframe.
  void process_frame(int frame_index);
  // Runs a backend pass when the keyframe count hits the schedule. Returns
  // true if a pass ran.
  bool maybe_backend();
  // Final backend pass + infill of every non-keyframe.
  void finish();

  // Complete per-frame rig trajectory (timestamps = frame indices).
  Trajectory trajectory() const;

  const BAGraph& graph() const { return graph_; }
  BAGraph& mutable_graph() { return graph_; }
  const std::vector<FrameRecord>& frames() const { return frames_; }
  const SessionStats& stats() const { return stats_; }
  int num_keyframes() const;
  int num_views() const { return static_cast<int>(cfg_.extrinsics.size()); }

 private:
  void add_keyframe(int frame_index);
  void run_frontend(int new_vertex_first);
  void run_backend();
  void infill_all();
  FlowFetch flow_fetch();
  TrackFetch track_fetch();

  PipelineConfig cfg_;
  ProviderSet providers_;
  BAGraph graph_;
  std::vector<FrameRecord> frames_;
  std::vector<int> keyframe_frames_;
  std::set<int> backend_done_;
  SessionStats stats_;
  bool finished_ = false;
};

// Convenience driver: processes frames [0, num_frames), backend on schedule,
// then finish().
VideoSession run_video(const PipelineConfig& cfg, const ProviderSet& providers,
                       int num_frames);

// Initial intrinsics: explicit values from config when given, else a pinhole
// with a default 60 degree horizontal field of view.
Intrinsics init_intrinsics(const RunConfig& config);

// Translates RunConfig keys into a PipelineConfig (camera included).
PipelineConfig pipeline_config_from(const RunConfig& config);

}  // namespace vpe
