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
#include <optional>
#include <string>

#include "vpe/types.h"

namespace vpe {

// One optimized view of one timestamp. Depth lives on the 1/8 grid; NaN marks
// pixels with no valid depth. prior_weight is the per-pixel regularizer mask
// m in [0, 1]; static_mask uses 1 = static, 0 = dynamic.
struct Keyframe {
  int frame_index = -1;
  int view = 0;
  int pose_slot = -1;
  Grid<double> inv_depth;
  Grid<double> prior_inv_depth;
  Grid<double> prior_weight;
  Grid<uint8_t> static_mask;

  bool has_depth() const { return !inv_depth.empty(); }
};

// Directed constraint src -> dst. `flow` is the dense payload; `sparse`
// carries splatted long-range tracks on the same grid (possibly empty).
// sparse_unmasked keeps the pre-mask splat so masking can be toggled.
struct Edge {
  int src = -1;
  int dst = -1;
  FlowField flow;
  FlowField sparse;
  FlowField sparse_unmasked;
  double covis = -1.0;  // diagnostic only
};

// Optimization state shared by frontend, backend and infill. Poses are
// rig-to-world, one slot per timestamp; view extrinsics are camera-to-rig.
// Monocular runs use a single identity extrinsic.
struct BAGraph {
  Intrinsics intrinsics;  // full resolution
  std::vector<Pose> poses;
  std::vector<Pose> extrinsics{Pose()};
  std::vector<Keyframe> vertices;
  std::vector<Edge> edges;

  Intrinsics low_intrinsics() const {
    return intrinsics.scaled(1.0 / kDepthStride);
  }
  Pose camera_pose(int vertex) const {
    const Keyframe& kf = vertices[vertex];
    return poses[kf.pose_slot] * extrinsics[kf.view];
  }
  int find_vertex(int frame_index, int view = 0) const;
  bool has_edge(int src, int dst) const;
  Edge* find_edge(int src, int dst);
};

// Fraction of vertex i's valid depth pixels that reproject inside vertex j's
// low-res image bounds with positive depth. Falls back to the prior where the
// optimized depth is invalid; throws EmptyDepth when nothing is valid.
double covisibility(const BAGraph& graph, int vi, int vj);

// Payload fetchers keyed by (frame, view) pairs; nullopt = unavailable (the
// edge is skipped).
using FlowFetch = std::function<std::optional<FlowField>(int frame_i, int view_i,
                                                         int frame_j, int view_j)>;
using TrackFetch = std::function<TrackSet(int frame_i, int view_i, int frame_j,
                                          int view_j)>;

struct WindowParams {
  int window_size = 8;
  int temporal_distance = 3;  // keyframe-index distance for implicit edges
  double covis_threshold = 0.5;
};

// Connects a newly appended vertex to the trailing window and refreshes
// in-window pair edges (temporally near pairs unconditionally, others by
// covisibility). Existing edges are kept; the new vertex must connect to its
// predecessor or ProviderFailure is raised.
void build_frontend_window(BAGraph* graph, int new_vertex, const WindowParams& params,
                           const FlowFetch& flow_fetch, const TrackFetch& track_fetch);

// Ensures temporal and covisibility edges over the whole graph (same rules as
// the frontend window, window = everything). Used before backend passes.
void build_full_graph(BAGraph* graph, const WindowParams& params,
                      const FlowFetch& flow_fetch, const TrackFetch& track_fetch);

// Attaches `sparse`/`sparse_unmasked` payloads built from tracks to an edge.
void attach_sparse_payload(BAGraph* graph, Edge* edge, const TrackSet& tracks);

// Minimal two-keyframe + one-pose problem used to localize a non-keyframe.
// Vertex 0/1 are copies of the bracketing keyframes (poses frozen by the
// caller), vertex 2 is the query frame (pose slot 2, no depth).
struct InfillProblem {
  BAGraph graph;
  int query_slot = 2;
  int kf_a = -1;  // source keyframe vertex indices in the parent graph
  int kf_b = -1;
};
InfillProblem build_infill_graph(const BAGraph& graph, int frame_index,
                                 const FlowFetch& flow_fetch, int view = 0);

// One line per edge: "EDGE a b <bi|uni> <covis>"; (a,b)+(b,a) coalesce to bi.
std::string graph_dump(const BAGraph& graph);

}  // namespace vpe
