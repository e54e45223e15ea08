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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vpe/sim.h"
#include "vpe/types.h"

namespace vpe {

// Resolution contract: flow, masks, and BA depth priors are delivered at the
// optimization grid (h, w); video depth and full prior at image size (H, W).

struct FlowProvider {
  virtual ~FlowProvider() = default;
  // Cheap availability probe; edges whose flow is unavailable are skipped
  // unless mandatory, in which case the caller raises ProviderFailure.
  virtual bool has(int frame_i, int view_i, int frame_j, int view_j) const = 0;
  virtual std::optional<FlowField> flow(int frame_i, int view_i, int frame_j,
                                        int view_j) = 0;
};

struct DepthPrior {
  Grid<double> inv_depth;
  Grid<double> weight;  // per-pixel confidence m >= 0
};

struct DepthPriorProvider {
  virtual ~DepthPriorProvider() = default;
  virtual std::optional<DepthPrior> prior_low(int frame, int view) = 0;
  virtual std::optional<Grid<double>> prior_full(int frame, int view) = 0;
  // Scale-conditioned priors depend on the focal length they were queried
  // with and must be rescaled when the backend re-estimates intrinsics.
  virtual bool scale_conditioned() const { return false; }
};

struct MaskProvider {
  virtual ~MaskProvider() = default;
  virtual std::optional<Grid<uint8_t>> mask_low(int frame, int view) = 0;
};

struct TrackProvider {
  virtual ~TrackProvider() = default;
  virtual TrackSet tracks(int frame_i, int view_i, int frame_j, int view_j) = 0;
};

struct VideoDepthProvider {
  virtual ~VideoDepthProvider() = default;
  // Full-resolution affine-invariant DEPTH (not inverse depth).
  virtual std::optional<Grid<double>> depth_full(int frame, int view) = 0;
};

struct ProviderSet {
  FlowProvider* flow = nullptr;  // required by the pipeline
  DepthPriorProvider* prior = nullptr;
  MaskProvider* mask = nullptr;
  TrackProvider* track = nullptr;
  VideoDepthProvider* video_depth = nullptr;
};

// ---------------------------------------------------------------------------
// Simulator-backed oracle providers (monocular, view 0).

struct SimProviderOptions {
  // Noise levels are expressed in full-resolution pixels; flow noise is
  // rescaled internally to the low-res flow grid (1 cell = kDepthStride px)
  // so flow and track sigmas share one unit.
  double flow_sigma = 0.0;
  double track_sigma = 0.0;
  int tracks_per_pair = 48;
  int flow_radius = 32;  // pairs farther apart than this report has() == false
  bool dynamic_tracks = false;
  double vda_alpha = 1.0;  // affine corruption of the video-depth oracle
  double vda_beta = 0.0;
};

class SimProviders final : public FlowProvider,
                           public DepthPriorProvider,
                           public MaskProvider,
                           public TrackProvider,
                           public VideoDepthProvider {
 public:
  SimProviders(const sim::Scene& scene, const SimProviderOptions& opt);

  bool has(int frame_i, int view_i, int frame_j, int view_j) const override;
  std::optional<FlowField> flow(int frame_i, int view_i, int frame_j,
                                int view_j) override;
  std::optional<DepthPrior> prior_low(int frame, int view) override;
  std::optional<Grid<double>> prior_full(int frame, int view) override;
  bool scale_conditioned() const override { return false; }
  std::optional<Grid<uint8_t>> mask_low(int frame, int view) override;
  TrackSet tracks(int frame_i, int view_i, int frame_j, int view_j) override;
  std::optional<Grid<double>> depth_full(int frame, int view) override;

  ProviderSet set() { return {this, this, this, this, this}; }
  const sim::Scene& scene() const { return scene_; }
  const SimProviderOptions& options() const { return opt_; }

 private:
  bool frame_ok(int frame, int view) const;
  const sim::Scene& scene_;
  SimProviderOptions opt_;
  Intrinsics low_k_;
  int low_rows_ = 0, low_cols_ = 0;
};

// ---------------------------------------------------------------------------
// File-backed providers over a dataset directory:
//   meta.txt             config text: sim.frames, camera.width, camera.height
//   intrinsics.txt       config text: camera.model/f/alpha/width/height
//   gt_trajectory.txt    TUM format (optional)
//   flow/f{i:06}_{vi}_{j:06}_{vj}.bin     3-channel tensor dx, dy, weight (h, w)
//   prior_lo/d{i:06}_{v}.bin              2-channel tensor inv_depth, weight (h, w)
//   prior_hi/d{i:06}_{v}.bin              1-channel inverse depth (H, W)
//   mask/m{i:06}_{v}.pgm                  P5, 0 = dynamic, 255 = static (h, w)
//   vda/v{i:06}_{v}.bin                   1-channel depth (H, W)
//   tracks.txt                            "frame_i u v frame_j u v conf" lines
//   frames/i{i:06}_{v}.pgm                grayscale renders (optional)

struct DatasetPaths {
  std::string root;
  std::string meta() const;
  std::string intrinsics() const;
  std::string gt_trajectory() const;
  std::string tracks_file() const;
  std::string flow(int fi, int vi, int fj, int vj) const;
  std::string prior_lo(int frame, int view) const;
  std::string prior_hi(int frame, int view) const;
  std::string mask(int frame, int view) const;
  std::string vda(int frame, int view) const;
  std::string frame_image(int frame, int view) const;
};

// Presents the video in reverse: frame t of the reversed clock reads frame
// num_frames-1-t of the wrapped providers (shuttle protocol input).
class ReversedProviders final : public FlowProvider,
                                public DepthPriorProvider,
                                public MaskProvider,
                                public TrackProvider,
                                public VideoDepthProvider {
 public:
  ReversedProviders(const ProviderSet& inner, int num_frames)
      : inner_(inner), num_frames_(num_frames) {}

  bool has(int frame_i, int view_i, int frame_j, int view_j) const override;
  std::optional<FlowField> flow(int frame_i, int view_i, int frame_j,
                                int view_j) override;
  std::optional<DepthPrior> prior_low(int frame, int view) override;
  std::optional<Grid<double>> prior_full(int frame, int view) override;
  bool scale_conditioned() const override;
  std::optional<Grid<uint8_t>> mask_low(int frame, int view) override;
  TrackSet tracks(int frame_i, int view_i, int frame_j, int view_j) override;
  std::optional<Grid<double>> depth_full(int frame, int view) override;

  ProviderSet set();

 private:
  int map(int frame) const { return num_frames_ - 1 - frame; }
  ProviderSet inner_;
  int num_frames_;
};

class FileProviders final : public FlowProvider,
                            public DepthPriorProvider,
                            public MaskProvider,
                            public TrackProvider,
                            public VideoDepthProvider {
 public:
  // Reads meta.txt and intrinsics.txt eagerly; tensor payloads on demand.
  explicit FileProviders(const std::string& root, bool prior_scale_conditioned = false);

  bool has(int frame_i, int view_i, int frame_j, int view_j) const override;
  std::optional<FlowField> flow(int frame_i, int view_i, int frame_j,
                                int view_j) override;
  std::optional<DepthPrior> prior_low(int frame, int view) override;
  std::optional<Grid<double>> prior_full(int frame, int view) override;
  bool scale_conditioned() const override { return scale_conditioned_; }
  std::optional<Grid<uint8_t>> mask_low(int frame, int view) override;
  TrackSet tracks(int frame_i, int view_i, int frame_j, int view_j) override;
  std::optional<Grid<double>> depth_full(int frame, int view) override;

  ProviderSet set() { return {this, this, this, this, this}; }
  int num_frames() const { return num_frames_; }
  const Intrinsics& camera() const { return camera_; }
  const DatasetPaths& paths() const { return paths_; }

  // Presence audit run before any compute: returns the missing files a solve
  // would require (per-frame priors/masks where those directories exist, and
  // adjacent-pair flow).
  std::vector<std::string> missing_required() const;

 private:
  DatasetPaths paths_;
  int num_frames_ = 0;
  Intrinsics camera_;
  bool scale_conditioned_ = false;
  bool loaded_tracks_ = false;
  std::map<std::pair<int, int>, TrackSet> track_index_;
};

}  // namespace vpe
