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

#include <vector>

#include "vpe/graph.h"
#include "vpe/sim.h"

namespace vpe::test {

// Ground-truth bundle-adjustment graph over the given scene frames: exact
// poses, rendered low-res depth, unit-weight prior where depth is valid,
// all-ordered-pairs flow edges, and splatted oracle tracks on request.
inline BAGraph make_gt_graph(const sim::Scene& scene, const std::vector<int>& frames,
                             bool with_sparse = false, double flow_sigma = 0.0,
                             double track_sigma = 0.0, int tracks_per_pair = 48) {
  BAGraph g;
  g.intrinsics = scene.camera;
  g.extrinsics = {Pose()};
  const Intrinsics k_lo = g.low_intrinsics();
  const int rows = low_res_rows(scene.camera.height);
  const int cols = low_res_cols(scene.camera.width);
  for (size_t i = 0; i < frames.size(); ++i) {
    Keyframe kf;
    kf.frame_index = frames[i];
    kf.view = 0;
    kf.pose_slot = static_cast<int>(i);
    const sim::DepthRender r = sim::render_depth(scene, frames[i], k_lo, rows, cols);
    kf.inv_depth = r.inv_depth;
    kf.prior_inv_depth = r.inv_depth;
    kf.prior_weight = Grid<double>(rows, cols, 0.0);
    for (size_t p = 0; p < kf.prior_weight.size(); ++p)
      if (depth_valid(r.inv_depth[p])) kf.prior_weight[p] = 1.0;
    kf.static_mask = r.static_mask;
    g.poses.push_back(scene.pose(frames[i]));
    g.vertices.push_back(std::move(kf));
  }
  for (size_t a = 0; a < frames.size(); ++a) {
    for (size_t b = 0; b < frames.size(); ++b) {
      if (a == b) continue;
      Edge e;
      e.src = static_cast<int>(a);
      e.dst = static_cast<int>(b);
      e.flow = sim::induced_flow(scene, frames[a], frames[b], k_lo, rows, cols,
                                 flow_sigma);
      if (with_sparse) {
        const TrackSet ts = sim::sample_tracks(scene, frames[a], frames[b],
                                               tracks_per_pair, track_sigma);
        attach_sparse_payload(&g, &e, ts);
      }
      g.edges.push_back(std::move(e));
    }
  }
  return g;
}

// Left-multiplies every pose slot by a common transform (a gauge motion).
inline void apply_gauge(BAGraph* g, const Pose& gauge) {
  for (Pose& p : g->poses) p = gauge * p;
}

}  // namespace vpe::test
