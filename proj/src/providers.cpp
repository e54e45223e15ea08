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

#include "vpe/providers.h"

#include <cstdio>
#include <fstream>

#include "vpe/config.h"
#include "vpe/io.h"

namespace vpe {

// ---------------------------------------------------------------------------
// SimProviders

SimProviders::SimProviders(const sim::Scene& scene, const SimProviderOptions& opt)
    : scene_(scene), opt_(opt) {
  low_k_ = scene.camera.scaled(1.0 / kDepthStride);
  low_rows_ = low_res_rows(scene.camera.height);
  low_cols_ = low_res_cols(scene.camera.width);
}

bool SimProviders::frame_ok(int frame, int view) const {
  return view == 0 && frame >= 0 &&
         frame < static_cast<int>(scene_.trajectory.size());
}

bool SimProviders::has(int frame_i, int view_i, int frame_j, int view_j) const {
  if (!frame_ok(frame_i, view_i) || !frame_ok(frame_j, view_j)) return false;
  if (frame_i == frame_j) return false;
  return std::abs(frame_i - frame_j) <= opt_.flow_radius;
}

std::optional<FlowField> SimProviders::flow(int frame_i, int view_i, int frame_j,
                                            int view_j) {
  if (!has(frame_i, view_i, frame_j, view_j)) return std::nullopt;
  return sim::induced_flow(scene_, frame_i, frame_j, low_k_, low_rows_, low_cols_,
                           opt_.flow_sigma / static_cast<double>(kDepthStride));
}

std::optional<DepthPrior> SimProviders::prior_low(int frame, int view) {
  if (!frame_ok(frame, view)) return std::nullopt;
  const sim::DepthRender render =
      sim::render_depth(scene_, frame, low_k_, low_rows_, low_cols_);
  DepthPrior prior;
  prior.inv_depth = render.inv_depth;
  prior.weight = Grid<double>(low_rows_, low_cols_, 0.0);
  for (int i = 0; i < low_rows_ * low_cols_; ++i) {
    if (depth_valid(render.inv_depth[i])) prior.weight[i] = 1.0;
  }
  return prior;
}

std::optional<Grid<double>> SimProviders::prior_full(int frame, int view) {
  if (!frame_ok(frame, view)) return std::nullopt;
  return sim::render_depth(scene_, frame, scene_.camera,
                           static_cast<int>(scene_.camera.height),
                           static_cast<int>(scene_.camera.width))
      .inv_depth;
}

std::optional<Grid<uint8_t>> SimProviders::mask_low(int frame, int view) {
  if (!frame_ok(frame, view)) return std::nullopt;
  return sim::render_depth(scene_, frame, low_k_, low_rows_, low_cols_).static_mask;
}

TrackSet SimProviders::tracks(int frame_i, int view_i, int frame_j, int view_j) {
  if (!has(frame_i, view_i, frame_j, view_j)) return {};
  return sim::sample_tracks(scene_, frame_i, frame_j, opt_.tracks_per_pair,
                            opt_.track_sigma, opt_.dynamic_tracks);
}

std::optional<Grid<double>> SimProviders::depth_full(int frame, int view) {
  if (!frame_ok(frame, view)) return std::nullopt;
  return sim::affine_depth(scene_, frame, scene_.camera,
                           static_cast<int>(scene_.camera.height),
                           static_cast<int>(scene_.camera.width), opt_.vda_alpha,
                           opt_.vda_beta);
}

// ---------------------------------------------------------------------------
// ReversedProviders

bool ReversedProviders::has(int frame_i, int view_i, int frame_j, int view_j) const {
  if (frame_i < 0 || frame_i >= num_frames_ || frame_j < 0 || frame_j >= num_frames_)
    return false;
  return inner_.flow && inner_.flow->has(map(frame_i), view_i, map(frame_j), view_j);
}

std::optional<FlowField> ReversedProviders::flow(int frame_i, int view_i, int frame_j,
                                                 int view_j) {
  if (!inner_.flow || frame_i < 0 || frame_i >= num_frames_ || frame_j < 0 ||
      frame_j >= num_frames_)
    return std::nullopt;
  return inner_.flow->flow(map(frame_i), view_i, map(frame_j), view_j);
}

std::optional<DepthPrior> ReversedProviders::prior_low(int frame, int view) {
  if (!inner_.prior || frame < 0 || frame >= num_frames_) return std::nullopt;
  return inner_.prior->prior_low(map(frame), view);
}

std::optional<Grid<double>> ReversedProviders::prior_full(int frame, int view) {
  if (!inner_.prior || frame < 0 || frame >= num_frames_) return std::nullopt;
  return inner_.prior->prior_full(map(frame), view);
}

bool ReversedProviders::scale_conditioned() const {
  return inner_.prior && inner_.prior->scale_conditioned();
}

std::optional<Grid<uint8_t>> ReversedProviders::mask_low(int frame, int view) {
  if (!inner_.mask || frame < 0 || frame >= num_frames_) return std::nullopt;
  return inner_.mask->mask_low(map(frame), view);
}

TrackSet ReversedProviders::tracks(int frame_i, int view_i, int frame_j, int view_j) {
  if (!inner_.track || frame_i < 0 || frame_i >= num_frames_ || frame_j < 0 ||
      frame_j >= num_frames_)
    return {};
  TrackSet set = inner_.track->tracks(map(frame_i), view_i, map(frame_j), view_j);
  for (Track& t : set.tracks) {
    t.frame_i = frame_i;  // re-stamp with reversed-clock indices
    t.frame_j = frame_j;
  }
  return set;
}

std::optional<Grid<double>> ReversedProviders::depth_full(int frame, int view) {
  if (!inner_.video_depth || frame < 0 || frame >= num_frames_) return std::nullopt;
  return inner_.video_depth->depth_full(map(frame), view);
}

ProviderSet ReversedProviders::set() {
  ProviderSet s;
  s.flow = this;
  s.prior = inner_.prior ? this : nullptr;
  s.mask = inner_.mask ? this : nullptr;
  s.track = inner_.track ? this : nullptr;
  s.video_depth = inner_.video_depth ? this : nullptr;
  return s;
}

// ---------------------------------------------------------------------------
// DatasetPaths

namespace {
std::string format_path(const std::string& root, const char* fmt, int a, int b,
                        int c = 0, int d = 0) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return root + "/" + buf;
}
}  // namespace

std::string DatasetPaths::meta() const { return root + "/meta.txt"; }
std::string DatasetPaths::intrinsics() const { return root + "/intrinsics.txt"; }
std::string DatasetPaths::gt_trajectory() const { return root + "/gt_trajectory.txt"; }
std::string DatasetPaths::tracks_file() const { return root + "/tracks.txt"; }

std::string DatasetPaths::flow(int fi, int vi, int fj, int vj) const {
  return format_path(root, "flow/f%06d_%d_%06d_%d.bin", fi, vi, fj, vj);
}
std::string DatasetPaths::prior_lo(int frame, int view) const {
  return format_path(root, "prior_lo/d%06d_%d.bin", frame, view);
}
std::string DatasetPaths::prior_hi(int frame, int view) const {
  return format_path(root, "prior_hi/d%06d_%d.bin", frame, view);
}
std::string DatasetPaths::mask(int frame, int view) const {
  return format_path(root, "mask/m%06d_%d.pgm", frame, view);
}
std::string DatasetPaths::vda(int frame, int view) const {
  return format_path(root, "vda/v%06d_%d.bin", frame, view);
}
std::string DatasetPaths::frame_image(int frame, int view) const {
  return format_path(root, "frames/i%06d_%d.pgm", frame, view);
}

// ---------------------------------------------------------------------------
// FileProviders

FileProviders::FileProviders(const std::string& root, bool prior_scale_conditioned)
    : scale_conditioned_(prior_scale_conditioned) {
  paths_.root = root;
  if (!file_exists(paths_.meta()))
    fail("IOError", "dataset meta file missing: " + paths_.meta());
  const RunConfig meta = RunConfig::load(paths_.meta());
  num_frames_ = meta.get_int("sim.frames");

  if (!file_exists(paths_.intrinsics()))
    fail("IOError", "dataset intrinsics file missing: " + paths_.intrinsics());
  const RunConfig intr = RunConfig::load(paths_.intrinsics());
  const double w = intr.get_double("camera.width");
  const double h = intr.get_double("camera.height");
  if (intr.get_string("camera.model") == "unified") {
    camera_ = Intrinsics::unified(intr.get_double("camera.f"),
                                  intr.get_double("camera.alpha"), w, h);
  } else {
    camera_ = Intrinsics::pinhole(intr.get_double("camera.f"), w, h);
  }
}

bool FileProviders::has(int frame_i, int view_i, int frame_j, int view_j) const {
  return file_exists(paths_.flow(frame_i, view_i, frame_j, view_j));
}

std::optional<FlowField> FileProviders::flow(int frame_i, int view_i, int frame_j,
                                             int view_j) {
  const std::string path = paths_.flow(frame_i, view_i, frame_j, view_j);
  if (!file_exists(path)) return std::nullopt;
  return flow_from_tensor(read_tensor(path));
}

std::optional<DepthPrior> FileProviders::prior_low(int frame, int view) {
  const std::string path = paths_.prior_lo(frame, view);
  if (!file_exists(path)) return std::nullopt;
  DepthPrior prior;
  grids_from_tensor(read_tensor(path), &prior.inv_depth, &prior.weight);
  return prior;
}

std::optional<Grid<double>> FileProviders::prior_full(int frame, int view) {
  const std::string path = paths_.prior_hi(frame, view);
  if (!file_exists(path)) return std::nullopt;
  return grid_from_tensor(read_tensor(path));
}

std::optional<Grid<uint8_t>> FileProviders::mask_low(int frame, int view) {
  const std::string path = paths_.mask(frame, view);
  if (!file_exists(path)) return std::nullopt;
  return bytes_to_mask(read_pgm(path));
}

TrackSet FileProviders::tracks(int frame_i, int view_i, int frame_j, int view_j) {
  if (view_i != 0 || view_j != 0) return {};
  if (!loaded_tracks_) {
    loaded_tracks_ = true;
    if (file_exists(paths_.tracks_file())) {
      for (const Track& t : read_tracks(paths_.tracks_file()).tracks) {
        track_index_[{t.frame_i, t.frame_j}].tracks.push_back(t);
      }
    }
  }
  const auto it = track_index_.find({frame_i, frame_j});
  return it == track_index_.end() ? TrackSet{} : it->second;
}

std::optional<Grid<double>> FileProviders::depth_full(int frame, int view) {
  const std::string path = paths_.vda(frame, view);
  if (!file_exists(path)) return std::nullopt;
  return grid_from_tensor(read_tensor(path));
}

std::vector<std::string> FileProviders::missing_required() const {
  // A directory that exists at all is promised complete: every frame of a
  // present modality must be on disk, and adjacent-pair flow always must be.
  std::vector<std::string> missing;
  const bool have_prior = file_exists(paths_.prior_lo(0, 0));
  const bool have_mask = file_exists(paths_.mask(0, 0));
  for (int f = 0; f < num_frames_; ++f) {
    if (f + 1 < num_frames_ && !file_exists(paths_.flow(f, 0, f + 1, 0)))
      missing.push_back(paths_.flow(f, 0, f + 1, 0));
    if (have_prior && !file_exists(paths_.prior_lo(f, 0)))
      missing.push_back(paths_.prior_lo(f, 0));
    if (have_mask && !file_exists(paths_.mask(f, 0)))
      missing.push_back(paths_.mask(f, 0));
  }
  return missing;
}

}  // namespace vpe
