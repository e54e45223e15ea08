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

#include <string>

#include "vpe/types.h"

namespace vpe {

// Binary tensor container: magic "VPE1", then height, width, channels as
// little-endian uint32, then float32 data in row-major, channel-interleaved
// order. NaN marks invalid samples.
struct Tensor {
  uint32_t height = 0;
  uint32_t width = 0;
  uint32_t channels = 0;
  std::vector<float> data;

  float& at(uint32_t r, uint32_t c, uint32_t ch) {
    return data[(static_cast<size_t>(r) * width + c) * channels + ch];
  }
  float at(uint32_t r, uint32_t c, uint32_t ch) const {
    return data[(static_cast<size_t>(r) * width + c) * channels + ch];
  }
};

void write_tensor(const std::string& path, const Tensor& t);
Tensor read_tensor(const std::string& path);  // throws IOError / ParseError

Tensor tensor_from_grid(const Grid<double>& g);
Grid<double> grid_from_tensor(const Tensor& t);            // 1 channel
Tensor tensor_from_flow(const FlowField& f);               // 3 channels: dx, dy, w
FlowField flow_from_tensor(const Tensor& t);
Tensor tensor_from_grids(const Grid<double>& a, const Grid<double>& b);  // 2 channels
void grids_from_tensor(const Tensor& t, Grid<double>* a, Grid<double>* b);

// 8-bit binary PGM (P5, maxval 255). Masks use 0 = dynamic, 255 = static.
void write_pgm(const std::string& path, const Grid<uint8_t>& img);
Grid<uint8_t> read_pgm(const std::string& path);

Grid<uint8_t> mask_to_bytes(const Grid<uint8_t>& mask01);   // 1 -> 255
Grid<uint8_t> bytes_to_mask(const Grid<uint8_t>& img);      // >=128 -> 1

// Grayscale float image in [0, 1] stored as PGM.
void write_pgm_float(const std::string& path, const Grid<float>& img);
Grid<float> read_pgm_float(const std::string& path);

// Trajectory text: "timestamp tx ty tz qx qy qz qw" per line, '#' comments.
void write_trajectory(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory(const std::string& path);

// Track text: "frame_i u_i v_i frame_j u_j v_j confidence" per line.
void write_tracks(const std::string& path, const TrackSet& tracks);
TrackSet read_tracks(const std::string& path);

// ASCII point cloud with per-point grayscale intensity in [0, 1].
struct CloudPoint {
  Vec3 position;
  double intensity = 1.0;
};
void write_ply(const std::string& path, const std::vector<CloudPoint>& points);

bool file_exists(const std::string& path);

}  // namespace vpe
