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

#include "vpe/pipeline.h"

#include <algorithm>
#include <map>

#include "vpe/config.h"
#include "vpe/tracker.h"

namespace vpe {

VideoSession::VideoSession(const PipelineConfig& cfg, const ProviderSet& providers)
    : cfg_(cfg), providers_(providers) {
  if (!providers_.flow) fail("ConfigError", "pipeline requires a flow provider");
  if (cfg_.extrinsics.empty()) fail("ConfigError", "at least one view extrinsic");
  graph_.intrinsics = cfg_.camera;
  graph_.extrinsics = cfg_.extrinsics;
}

FlowFetch VideoSession::flow_fetch() {
  return [this](int fi, int vi, int fj, int vj) {
    return providers_.flow->flow(fi, vi, fj, vj);
  };
}

TrackFetch VideoSession::track_fetch() {
  return [this](int fi, int vi, int fj, int vj) {
    return providers_.track ? providers_.track->tracks(fi, vi, fj, vj) : TrackSet{};
  };
}

int VideoSession::num_keyframes() const {
  return static_cast<int>(keyframe_frames_.size());
}

void VideoSession::process_frame(int frame_index) {
  if (finished_) fail("ConfigError", "process_frame after finish()");
  if (!frames_.empty() && frame_index <= frames_.back().frame_index)
    fail("ConfigError", "frames must arrive in strictly increasing order");

  FrameRecord rec;
  rec.frame_index = frame_index;
  if (keyframe_frames_.empty()) {
    rec.keyframe = true;  // bootstrap: the first frame anchors the gauge
    frames_.push_back(rec);
    add_keyframe(frame_index);
    return;
  }

  const int last_kf = keyframe_frames_.back();
  std::optional<FlowField> flow = providers_.flow->flow(last_kf, 0, frame_index, 0);
  TrackSet tracks;
  if (providers_.track) tracks = providers_.track->tracks(last_kf, 0, frame_index, 0);
  if ((!flow || flow->empty()) && tracks.empty()) {
    fail("ProviderFailure",
         "frame " + std::to_string(frame_index) + ": no motion data against keyframe " +
             std::to_string(last_kf));
  }
  const double motion = motion_magnitude(flow ? *flow : FlowField{}, tracks);
  rec.keyframe = motion > cfg_.keyframe_threshold;
  frames_.push_back(rec);
  if (rec.keyframe) add_keyframe(frame_index);
}

void VideoSession::add_keyframe(int frame_index) {
  const int slot = static_cast<int>(graph_.poses.size());
  const int nk = num_keyframes();
  Pose init;
  if (nk >= 2) {
    // Constant-velocity extrapolation scaled by the frame gap.
    const double fa = keyframe_frames_[nk - 2];
    const double fb = keyframe_frames_[nk - 1];
    const double s = (frame_index - fa) / (fb - fa);
    init = pose_interpolate(graph_.poses[slot - 2], graph_.poses[slot - 1], s);
  } else if (nk == 1) {
    init = graph_.poses[slot - 1];
  }
  graph_.poses.push_back(init);
  keyframe_frames_.push_back(frame_index);

  const int low_rows = low_res_rows(graph_.intrinsics.height);
  const int low_cols = low_res_cols(graph_.intrinsics.width);
  const int first_vertex = static_cast<int>(graph_.vertices.size());
  for (int v = 0; v < num_views(); ++v) {
    Keyframe kf;
    kf.frame_index = frame_index;
    kf.view = v;
    kf.pose_slot = slot;
    if (providers_.prior) {
      if (auto prior = providers_.prior->prior_low(frame_index, v)) {
        kf.prior_inv_depth = prior->inv_depth;
        kf.prior_weight = std::move(prior->weight);
        kf.inv_depth = std::move(prior->inv_depth);
      }
    }
    if (kf.inv_depth.empty()) {
      kf.inv_depth = Grid<double>(low_rows, low_cols, 1.0);
    } else {
      // Prior holes stay optimizable: seed them at unit inverse depth with
      // zero regularizer weight.
      for (int i = 0; i < low_rows * low_cols; ++i) {
        if (!depth_valid(kf.inv_depth[i])) kf.inv_depth[i] = 1.0;
      }
    }
    if (providers_.mask) {
      if (auto mask = providers_.mask->mask_low(frame_index, v))
        kf.static_mask = std::move(*mask);
    }
    graph_.vertices.push_back(std::move(kf));
  }

  const FlowFetch fetch = flow_fetch();
  const TrackFetch tfetch = track_fetch();
  for (int v = 0; v < num_views(); ++v) {
    build_frontend_window(&graph_, first_vertex + v, cfg_.window, fetch, tfetch);
  }

  // Adaptive cross-view edges within this timestamp: same pose slot, so these
  // constrain only depth and intrinsics consistency across the rig.
  for (int a = 0; a < num_views(); ++a) {
    for (int b = a + 1; b < num_views(); ++b) {
      const int va = first_vertex + a, vb = first_vertex + b;
      const double covis = std::max(covisibility(graph_, va, vb),
                                    covisibility(graph_, vb, va));
      if (covis < cfg_.rig_covis_threshold) continue;
      for (const auto& [src, dst] : {std::pair{va, vb}, std::pair{vb, va}}) {
        if (graph_.has_edge(src, dst)) continue;
        auto flow = fetch(graph_.vertices[src].frame_index, graph_.vertices[src].view,
                          graph_.vertices[dst].frame_index, graph_.vertices[dst].view);
        if (!flow) continue;
        Edge edge;
        edge.src = src;
        edge.dst = dst;
        edge.flow = std::move(*flow);
        edge.covis = covis;
        graph_.edges.push_back(std::move(edge));
        attach_sparse_payload(&graph_, &graph_.edges.back(),
                              tfetch(graph_.vertices[src].frame_index,
                                     graph_.vertices[src].view,
                                     graph_.vertices[dst].frame_index,
                                     graph_.vertices[dst].view));
      }
    }
  }

  run_frontend(first_vertex);
}

void VideoSession::run_frontend(int /*new_vertex_first*/) {
  if (graph_.edges.empty()) return;
  const int nk = num_keyframes();
  const int window = std::min(nk, cfg_.window.window_size);
  const int first_slot = nk - window;

  SolveScope scope;
  // The oldest in-window pose stays frozen as the local gauge anchor.
  for (int s = first_slot + 1; s < nk; ++s) scope.free_pose_slots.push_back(s);
  for (size_t i = 0; i < graph_.vertices.size(); ++i) {
    if (graph_.vertices[i].pose_slot >= first_slot)
      scope.free_depth_vertices.push_back(static_cast<int>(i));
  }
  scope.optimize_intrinsics = false;
  if (scope.free_pose_slots.empty() && scope.free_depth_vertices.empty()) return;

  const SolveReport report =
      gauss_newton(&graph_, cfg_.frontend_solver, scope, cfg_.terms, cfg_.log);
  stats_.final_energy = report.final_energy;
}

void VideoSession::run_backend() {
  if (graph_.poses.size() < 2 || graph_.edges.empty()) return;
  build_full_graph(&graph_, cfg_.window, flow_fetch(), track_fetch());

  const double f_before = graph_.intrinsics.f;
  const SolveScope scope =
      SolveScope::all_but_first_pose(graph_, cfg_.optimize_intrinsics);
  const SolveReport report =
      gauss_newton(&graph_, cfg_.backend_solver, scope, cfg_.terms, cfg_.log);
  stats_.final_energy = report.final_energy;
  ++stats_.backend_runs;

  // Scale-conditioned priors track the focal length they were queried with:
  // depth scales with f, so stored inverse-depth priors shrink as f grows.
  const double f_after = graph_.intrinsics.f;
  if (providers_.prior && providers_.prior->scale_conditioned() &&
      f_after != f_before) {
    const double rescale = f_before / f_after;
    for (Keyframe& kf : graph_.vertices) {
      for (int i = 0; i < kf.prior_inv_depth.rows() * kf.prior_inv_depth.cols(); ++i) {
        if (depth_valid(kf.prior_inv_depth[i])) kf.prior_inv_depth[i] *= rescale;
      }
    }
  }
}

bool VideoSession::maybe_backend() {
  const int nk = num_keyframes();
  if (std::find(cfg_.backend_schedule.begin(), cfg_.backend_schedule.end(), nk) ==
      cfg_.backend_schedule.end())
    return false;
  if (backend_done_.count(nk)) return false;
  backend_done_.insert(nk);
  run_backend();
  return true;
}

void VideoSession::finish() {
  if (finished_) return;
  run_backend();  // end-of-video pass regardless of schedule
  infill_all();
  finished_ = true;
}

void VideoSession::infill_all() {
  std::map<int, int> kf_slot;  // frame index -> pose slot (view 0 carries it)
  for (const Keyframe& kf : graph_.vertices) {
    if (kf.view == 0) kf_slot[kf.frame_index] = kf.pose_slot;
  }
  std::vector<int> pending;
  for (size_t i = 0; i < frames_.size(); ++i) {
    if (frames_[i].keyframe) {
      frames_[i].pose = graph_.poses[kf_slot.at(frames_[i].frame_index)];
    } else {
      pending.push_back(static_cast<int>(i));
    }
  }

  const auto fallback_pose = [&](int frame) {
    // Constant-velocity interpolation between the bracketing keyframes.
    int before = -1, after = -1;
    for (const auto& [f, slot] : kf_slot) {
      if (f <= frame) before = f;
      if (f > frame && after < 0) after = f;
    }
    if (before >= 0 && after >= 0) {
      const double s = static_cast<double>(frame - before) / (after - before);
      return pose_interpolate(graph_.poses[kf_slot.at(before)],
                              graph_.poses[kf_slot.at(after)], s);
    }
    return graph_.poses[kf_slot.at(before >= 0 ? before : after)];
  };

  const FlowFetch fetch = flow_fetch();
  const int n_pending = static_cast<int>(pending.size());
  // Non-keyframes localize independently against a read-only graph snapshot;
  // each failure downgrades to interpolation instead of aborting the batch.
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < n_pending; ++p) {
    FrameRecord& rec = frames_[pending[p]];
    try {
      InfillProblem prob = build_infill_graph(graph_, rec.frame_index, fetch, 0);
      SolveScope scope;
      scope.free_pose_slots = {prob.query_slot};
      scope.optimize_intrinsics = false;
      SolverConfig solver = cfg_.frontend_solver;
      gauss_newton(&prob.graph, solver, scope, cfg_.terms, nullptr);
      rec.pose = prob.graph.poses[prob.query_slot];
    } catch (const Error&) {
      rec.pose = fallback_pose(rec.frame_index);
      rec.infill_fallback = true;
    }
  }
  stats_.keyframes = num_keyframes();
  stats_.infill_fallbacks = 0;
  for (const FrameRecord& rec : frames_) {
    if (rec.infill_fallback) ++stats_.infill_fallbacks;
  }
}

Trajectory VideoSession::trajectory() const {
  if (!finished_) fail("ConfigError", "trajectory requested before finish()");
  Trajectory out;
  out.reserve(frames_.size());
  for (const FrameRecord& rec : frames_) {
    out.push_back({static_cast<double>(rec.frame_index), rec.pose});
  }
  return out;
}

VideoSession run_video(const PipelineConfig& cfg, const ProviderSet& providers,
                       int num_frames) {
  VideoSession session(cfg, providers);
  for (int f = 0; f < num_frames; ++f) {
    session.process_frame(f);
    session.maybe_backend();
  }
  session.finish();
  return session;
}

Intrinsics init_intrinsics(const RunConfig& config) {
  const double w = config.get_double("camera.width");
  const double h = config.get_double("camera.height");
  if (w <= 0.0 || h <= 0.0)
    fail("MissingResolution", "camera.width and camera.height are required");
  const bool unified = config.get_string("camera.model") == "unified";
  const double f = config.get_double("camera.f");
  if (f > 0.0) {
    return unified ? Intrinsics::unified(f, config.get_double("camera.alpha"), w, h)
                   : Intrinsics::pinhole(f, w, h);
  }
  Intrinsics k = Intrinsics::from_fov_deg(config.get_double("camera.fov_deg"), w, h);
  if (unified) {
    k.model = CameraModel::kUnified;
    k.alpha = config.get_double("camera.alpha");
  }
  return k;
}

PipelineConfig pipeline_config_from(const RunConfig& config) {
  PipelineConfig p;
  p.camera = init_intrinsics(config);
  p.keyframe_threshold = config.get_double("keyframe.threshold");
  p.window.window_size = config.get_int("keyframe.window");
  p.window.temporal_distance = config.get_int("graph.temporal_distance");
  p.window.covis_threshold = config.get_double("graph.covis_threshold");
  p.rig_covis_threshold = config.get_double("rig.covis_threshold");
  p.backend_schedule = config.get_int_list("backend.schedule");

  SolverConfig base;
  base.step_tolerance = config.get_double("solver.step_tol");
  base.lambda_init = config.get_double("solver.lambda_init");
  base.alpha_reg = config.get_double("ba.alpha_reg");
  base.huber_delta = config.get_double("ba.huber_delta");
  p.frontend_solver = base;
  p.frontend_solver.max_iters = config.get_int("solver.frontend_iters");
  p.backend_solver = base;
  p.backend_solver.max_iters = config.get_int("solver.backend_iters");
  p.optimize_intrinsics = config.get_bool("solver.optimize_intrinsics");

  p.terms.dense = config.get_bool("terms.dense");
  p.terms.sparse = config.get_bool("terms.sparse");
  p.terms.depth_reg = config.get_bool("terms.depth_reg");
  p.terms.masking = config.get_bool("terms.mask");
  return p;
}

}  // namespace vpe
