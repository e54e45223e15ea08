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

#include "vpe/graph.h"

#include <algorithm>
#include <map>
#include <sstream>

#include "vpe/residuals.h"

namespace vpe {

int BAGraph::find_vertex(int frame_index, int view) const {
  for (size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i].frame_index == frame_index && vertices[i].view == view) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

bool BAGraph::has_edge(int src, int dst) const {
  for (const Edge& e : edges) {
    if (e.src == src && e.dst == dst) return true;
  }
  return false;
}

Edge* BAGraph::find_edge(int src, int dst) {
  for (Edge& e : edges) {
    if (e.src == src && e.dst == dst) return &e;
  }
  return nullptr;
}

double covisibility(const BAGraph& graph, int vi, int vj) {
  const Keyframe& a = graph.vertices[vi];
  if (!a.has_depth() && a.prior_inv_depth.empty()) {
    fail("EmptyDepth", "vertex " + std::to_string(vi) + " has no depth source");
  }
  const Intrinsics k_lo = graph.low_intrinsics();
  const Pose rel = graph.camera_pose(vj).inverse() * graph.camera_pose(vi);
  const Mat3 r_rel = rel.rotation();
  const int rows = a.has_depth() ? a.inv_depth.rows() : a.prior_inv_depth.rows();
  const int cols = a.has_depth() ? a.inv_depth.cols() : a.prior_inv_depth.cols();
  int valid = 0, inside = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double d = a.has_depth() ? a.inv_depth(r, c) : kInvalidDepth;
      if (!depth_valid(d) && !a.prior_inv_depth.empty()) d = a.prior_inv_depth(r, c);
      if (!depth_valid(d)) continue;
      ++valid;
      Vec3 x_cam;
      if (!try_unproject(Vec2(c, r), d, k_lo, &x_cam)) continue;
      const Vec3 x_j = r_rel * x_cam + rel.t;
      if (x_j.z() <= 0.0) continue;
      Vec2 uv;
      if (!try_project(x_j, k_lo, &uv)) continue;
      if (uv.x() < 0.0 || uv.x() > cols - 1.0 || uv.y() < 0.0 || uv.y() > rows - 1.0) {
        continue;
      }
      ++inside;
    }
  }
  if (valid == 0) {
    fail("EmptyDepth", "vertex " + std::to_string(vi) + " has no valid depth pixels");
  }
  return static_cast<double>(inside) / static_cast<double>(valid);
}

void attach_sparse_payload(BAGraph* graph, Edge* edge, const TrackSet& tracks) {
  const Keyframe& src = graph->vertices[edge->src];
  const int rows = low_res_rows(graph->intrinsics.height);
  const int cols = low_res_cols(graph->intrinsics.width);
  edge->sparse_unmasked = splat_tracks(tracks, Grid<uint8_t>(), rows, cols);
  edge->sparse = splat_tracks(tracks, src.static_mask, rows, cols);
}

namespace {

// Keyframe-order positions of same-view vertices, oldest first.
std::vector<int> view_sequence(const BAGraph& graph, int view) {
  std::vector<int> seq;
  for (size_t i = 0; i < graph.vertices.size(); ++i) {
    if (graph.vertices[i].view == view) seq.push_back(static_cast<int>(i));
  }
  return seq;
}

int order_of(const std::vector<int>& seq, int vertex) {
  auto it = std::find(seq.begin(), seq.end(), vertex);
  return it == seq.end() ? -1 : static_cast<int>(it - seq.begin());
}

// Adds src->dst with a fetched dense payload and splatted tracks. Returns
// false when the flow is unavailable.
bool add_directed_edge(BAGraph* graph, int src, int dst, double covis,
                       const FlowFetch& flow_fetch, const TrackFetch& track_fetch) {
  if (graph->has_edge(src, dst)) return true;
  const Keyframe& a = graph->vertices[src];
  const Keyframe& b = graph->vertices[dst];
  std::optional<FlowField> flow =
      flow_fetch(a.frame_index, a.view, b.frame_index, b.view);
  if (!flow.has_value()) return false;
  Edge e;
  e.src = src;
  e.dst = dst;
  e.flow = std::move(*flow);
  e.covis = covis;
  if (track_fetch) {
    const TrackSet tracks = track_fetch(a.frame_index, a.view, b.frame_index, b.view);
    if (!tracks.empty()) {
      graph->edges.push_back(std::move(e));
      attach_sparse_payload(graph, &graph->edges.back(), tracks);
      return true;
    }
  }
  graph->edges.push_back(std::move(e));
  return true;
}

void connect_pairs(BAGraph* graph, const std::vector<int>& members,
                   const std::vector<int>& seq, int new_vertex,
                   const WindowParams& params, const FlowFetch& flow_fetch,
                   const TrackFetch& track_fetch) {
  for (size_t ai = 0; ai < members.size(); ++ai) {
    for (size_t bi = ai + 1; bi < members.size(); ++bi) {
      const int a = members[ai], b = members[bi];
      const bool have_both = graph->has_edge(a, b) && graph->has_edge(b, a);
      if (have_both) continue;
      double covis = -1.0;
      bool connect = false;
      if (a == new_vertex || b == new_vertex) {
        connect = true;  // unconditional window edges for the new keyframe
      } else if (std::abs(order_of(seq, a) - order_of(seq, b)) <=
                 params.temporal_distance) {
        connect = true;
      } else {
        covis = covisibility(*graph, a, b);
        connect = covis >= params.covis_threshold;
      }
      if (!connect) continue;
      add_directed_edge(graph, a, b, covis, flow_fetch, track_fetch);
      add_directed_edge(graph, b, a, covis, flow_fetch, track_fetch);
    }
  }
}

}  // namespace

void build_frontend_window(BAGraph* graph, int new_vertex, const WindowParams& params,
                           const FlowFetch& flow_fetch, const TrackFetch& track_fetch) {
  const int view = graph->vertices[new_vertex].view;
  const std::vector<int> seq = view_sequence(*graph, view);
  const int pos = order_of(seq, new_vertex);
  if (pos <= 0) return;  // first keyframe of this view: nothing to connect
  const int first = std::max(0, pos - params.window_size);
  std::vector<int> members(seq.begin() + first, seq.begin() + pos + 1);
  connect_pairs(graph, members, seq, new_vertex, params, flow_fetch, track_fetch);
  // The temporal predecessor link is mandatory: without it the new keyframe
  // would float free of the rest of the graph.
  const int prev = seq[pos - 1];
  if (!graph->has_edge(new_vertex, prev) && !graph->has_edge(prev, new_vertex)) {
    fail("ProviderFailure",
         "no flow between frames " + std::to_string(graph->vertices[prev].frame_index) +
             " and " + std::to_string(graph->vertices[new_vertex].frame_index));
  }
}

void build_full_graph(BAGraph* graph, const WindowParams& params,
                      const FlowFetch& flow_fetch, const TrackFetch& track_fetch) {
  const int views = static_cast<int>(graph->extrinsics.size());
  for (int view = 0; view < views; ++view) {
    const std::vector<int> seq = view_sequence(*graph, view);
    connect_pairs(graph, seq, seq, /*new_vertex=*/-1, params, flow_fetch, track_fetch);
  }
}

InfillProblem build_infill_graph(const BAGraph& graph, int frame_index,
                                 const FlowFetch& flow_fetch, int view) {
  if (graph.vertices.empty()) {
    fail("NoKeyframes", "cannot localize frame " + std::to_string(frame_index) +
                            " in an empty graph");
  }
  std::vector<int> seq;
  for (size_t i = 0; i < graph.vertices.size(); ++i) {
    if (graph.vertices[i].view == view) seq.push_back(static_cast<int>(i));
  }
  if (seq.empty()) fail("NoKeyframes", "no keyframes for view " + std::to_string(view));

  // Bracketing pair, or the two nearest when the frame falls outside.
  int before = -1, after = -1;
  for (int v : seq) {
    if (graph.vertices[v].frame_index <= frame_index) before = v;
    if (graph.vertices[v].frame_index > frame_index && after < 0) after = v;
  }
  std::vector<int> anchors;
  if (before >= 0 && after >= 0) {
    anchors = {before, after};
  } else if (before >= 0) {
    const int pos = order_of(seq, before);
    if (pos > 0) anchors.push_back(seq[pos - 1]);
    anchors.push_back(before);
  } else {
    anchors.push_back(after);
    const int pos = order_of(seq, after);
    if (pos + 1 < static_cast<int>(seq.size())) anchors.push_back(seq[pos + 1]);
  }

  InfillProblem prob;
  prob.kf_a = anchors[0];
  prob.kf_b = anchors.size() > 1 ? anchors[1] : -1;
  prob.graph.intrinsics = graph.intrinsics;
  prob.graph.extrinsics = graph.extrinsics;

  for (size_t i = 0; i < anchors.size(); ++i) {
    Keyframe kf = graph.vertices[anchors[i]];
    prob.graph.poses.push_back(graph.poses[kf.pose_slot]);
    kf.pose_slot = static_cast<int>(i);
    prob.graph.vertices.push_back(std::move(kf));
  }
  prob.query_slot = static_cast<int>(anchors.size());

  Keyframe query;
  query.frame_index = frame_index;
  query.view = view;
  query.pose_slot = prob.query_slot;
  const int query_vertex = static_cast<int>(prob.graph.vertices.size());

  // Constant-velocity initialization from the anchor poses.
  Pose init;
  if (anchors.size() == 2) {
    const double fa = graph.vertices[anchors[0]].frame_index;
    const double fb = graph.vertices[anchors[1]].frame_index;
    const double s = fb > fa ? (frame_index - fa) / (fb - fa) : 0.0;
    init = pose_interpolate(prob.graph.poses[0], prob.graph.poses[1], s);
  } else {
    init = prob.graph.poses[0];
  }
  prob.graph.poses.push_back(init);
  prob.graph.vertices.push_back(std::move(query));

  bool any_edge = false;
  for (size_t i = 0; i < anchors.size(); ++i) {
    const Keyframe& kf = prob.graph.vertices[i];
    std::optional<FlowField> flow =
        flow_fetch(kf.frame_index, kf.view, frame_index, view);
    if (!flow.has_value()) continue;
    Edge e;
    e.src = static_cast<int>(i);
    e.dst = query_vertex;
    e.flow = std::move(*flow);
    prob.graph.edges.push_back(std::move(e));
    any_edge = true;
  }
  if (!any_edge) {
    fail("ProviderFailure",
         "no keyframe flow available for frame " + std::to_string(frame_index));
  }
  return prob;
}

std::string graph_dump(const BAGraph& graph) {
  std::map<std::pair<int, int>, std::pair<int, double>> pairs;  // -> count, covis
  std::vector<std::pair<int, int>> order;
  for (const Edge& e : graph.edges) {
    const std::pair<int, int> key(std::min(e.src, e.dst), std::max(e.src, e.dst));
    auto it = pairs.find(key);
    if (it == pairs.end()) {
      pairs[key] = {1, e.covis};
      order.push_back(key);
    } else {
      it->second.first += 1;
      it->second.second = std::max(it->second.second, e.covis);
    }
  }
  std::ostringstream os;
  for (const auto& key : order) {
    const auto& [count, covis] = pairs[key];
    os << "EDGE " << key.first << " " << key.second << " "
       << (count > 1 ? "bi" : "uni") << " ";
    if (covis < 0.0) {
      os << "-";
    } else {
      os.precision(3);
      os << std::fixed << covis;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace vpe
