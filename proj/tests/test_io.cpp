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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>

#include "test_util.h"
#include "vpe/io.h"

using namespace vpe;

TEST_CASE("tensor file round trip preserves NaN and exact floats") {
  const auto dir = test::tmp_dir("io");
  Tensor t;
  t.height = 5;
  t.width = 7;
  t.channels = 2;
  t.data.resize(5 * 7 * 2);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 10.0);
  for (float& v : t.data) v = static_cast<float>(n(rng));
  t.at(2, 3, 0) = std::numeric_limits<float>::quiet_NaN();
  t.at(4, 6, 1) = -0.0f;

  const std::string path = (dir / "t.bin").string();
  write_tensor(path, t);
  const Tensor back = read_tensor(path);
  REQUIRE(back.height == t.height);
  REQUIRE(back.width == t.width);
  REQUIRE(back.channels == t.channels);
  REQUIRE(back.data.size() == t.data.size());
  for (size_t i = 0; i < t.data.size(); ++i) {
    // Bit-exact, including the NaN payload slot.
    uint32_t a, b;
    std::memcpy(&a, &t.data[i], 4);
    std::memcpy(&b, &back.data[i], 4);
    CHECK(a == b);
  }
}

TEST_CASE("tensor header layout is the documented one") {
  const auto dir = test::tmp_dir("io_hdr");
  Tensor t;
  t.height = 2;
  t.width = 3;
  t.channels = 1;
  t.data.assign(6, 1.5f);
  const std::string path = (dir / "t.bin").string();
  write_tensor(path, t);

  std::ifstream in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "VPE1");
  uint32_t dims[3];
  in.read(reinterpret_cast<char*>(dims), 12);
  CHECK(dims[0] == 2);
  CHECK(dims[1] == 3);
  CHECK(dims[2] == 1);
  float first;
  in.read(reinterpret_cast<char*>(&first), 4);
  CHECK(first == 1.5f);
}

TEST_CASE("tensor read failures carry the right error class") {
  const auto dir = test::tmp_dir("io_err");
  CHECK_THROWS_AS(read_tensor((dir / "missing.bin").string()), Error);
  try {
    read_tensor((dir / "missing.bin").string());
  } catch (const Error& e) {
    CHECK(e.error_class() == "IOError");
  }

  const std::string bad = (dir / "bad.bin").string();
  {
    std::ofstream out(bad, std::ios::binary);
    out << "VPEX";  // wrong magic
    const uint32_t dims[3] = {1, 1, 1};
    out.write(reinterpret_cast<const char*>(dims), 12);
    const float v = 0.0f;
    out.write(reinterpret_cast<const char*>(&v), 4);
  }
  try {
    read_tensor(bad);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "ParseError");
  }

  // Truncated payload.
  const std::string trunc = (dir / "trunc.bin").string();
  {
    std::ofstream out(trunc, std::ios::binary);
    out << "VPE1";
    const uint32_t dims[3] = {4, 4, 1};
    out.write(reinterpret_cast<const char*>(dims), 12);
    const float v = 0.0f;
    out.write(reinterpret_cast<const char*>(&v), 4);  // 1 of 16 floats
  }
  try {
    read_tensor(trunc);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "ParseError");
  }
}

TEST_CASE("grid and flow tensor conversions") {
  Grid<double> g(3, 4);
  for (int i = 0; i < 12; ++i) g[i] = 0.25 * i - 1.0;
  g(1, 2) = kInvalidDepth;
  const Grid<double> gb = grid_from_tensor(tensor_from_grid(g));
  REQUIRE(gb.same_size(g));
  for (int i = 0; i < 12; ++i) {
    if (depth_valid(g[i])) {
      CHECK(gb[i] == doctest::Approx(g[i]).epsilon(1e-7));
    } else {
      CHECK_FALSE(depth_valid(gb[i]));
    }
  }

  FlowField f(3, 4);
  for (int i = 0; i < 12; ++i) {
    f.flow[i] = Vec2(0.5 * i, -0.25 * i);
    f.weight[i] = (i % 3 == 0) ? 0.0 : 1.0;
  }
  const Tensor t = tensor_from_flow(f);
  CHECK(t.channels == 3);
  const FlowField fb = flow_from_tensor(t);
  REQUIRE(fb.rows() == 3);
  REQUIRE(fb.cols() == 4);
  for (int i = 0; i < 12; ++i) {
    CHECK((fb.flow[i] - f.flow[i]).norm() < 1e-6);
    CHECK(fb.weight[i] == doctest::Approx(f.weight[i]));
  }

  Grid<double> a(2, 2, 1.0), b(2, 2, 0.5);
  a(0, 1) = kInvalidDepth;
  Grid<double> a2, b2;
  grids_from_tensor(tensor_from_grids(a, b), &a2, &b2);
  CHECK_FALSE(depth_valid(a2(0, 1)));
  CHECK(a2(1, 1) == doctest::Approx(1.0));
  CHECK(b2(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("pgm round trip and mask conventions") {
  const auto dir = test::tmp_dir("io_pgm");
  Grid<uint8_t> img(4, 5);
  for (int i = 0; i < 20; ++i) img[i] = static_cast<uint8_t>(13 * i);
  const std::string path = (dir / "i.pgm").string();
  write_pgm(path, img);
  const Grid<uint8_t> back = read_pgm(path);
  REQUIRE(back.same_size(img));
  for (int i = 0; i < 20; ++i) CHECK(back[i] == img[i]);

  // Masks: 0 = dynamic, 1 (stored as 255) = static; threshold at 128.
  Grid<uint8_t> mask(2, 2, 1);
  mask(0, 0) = 0;
  const Grid<uint8_t> bytes = mask_to_bytes(mask);
  CHECK(bytes(0, 0) == 0);
  CHECK(bytes(0, 1) == 255);
  const Grid<uint8_t> back_mask = bytes_to_mask(bytes);
  CHECK(back_mask(0, 0) == 0);
  CHECK(back_mask(1, 1) == 1);
  Grid<uint8_t> gray(1, 2);
  gray(0, 0) = 127;
  gray(0, 1) = 128;
  CHECK(bytes_to_mask(gray)(0, 0) == 0);
  CHECK(bytes_to_mask(gray)(0, 1) == 1);

  Grid<float> imgf(3, 3);
  for (int i = 0; i < 9; ++i) imgf[i] = i / 8.0f;
  const std::string pathf = (dir / "f.pgm").string();
  write_pgm_float(pathf, imgf);
  const Grid<float> backf = read_pgm_float(pathf);
  for (int i = 0; i < 9; ++i) CHECK(std::abs(backf[i] - imgf[i]) <= 0.5f / 255.0f + 1e-6f);
}

TEST_CASE("trajectory text round trip keeps full precision") {
  const auto dir = test::tmp_dir("io_traj");
  std::mt19937_64 rng(2);
  Trajectory traj;
  for (int i = 0; i < 10; ++i) {
    TimedPose tp;
    tp.t = i;
    tp.pose = test::random_pose(rng, 3.0, 1.0);
    traj.push_back(tp);
  }
  const std::string path = (dir / "traj.txt").string();
  write_trajectory(path, traj);
  const Trajectory back = read_trajectory(path);
  REQUIRE(back.size() == traj.size());
  for (size_t i = 0; i < traj.size(); ++i) {
    CHECK(back[i].t == traj[i].t);
    CHECK((back[i].pose.t - traj[i].pose.t).norm() < 1e-15);
    CHECK(back[i].pose.approx_equal(traj[i].pose, 1e-12));
  }

  // Comments and blank lines are skipped.
  const std::string annotated = (dir / "annotated.txt").string();
  {
    std::ofstream out(annotated);
    out << "# header comment\n\n0 1 2 3 0 0 0 1\n# trailing\n";
  }
  const Trajectory t2 = read_trajectory(annotated);
  REQUIRE(t2.size() == 1);
  CHECK(t2[0].pose.t == Vec3(1, 2, 3));

  try {
    read_trajectory((dir / "nope.txt").string());
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "IOError");
  }
  const std::string mangled = (dir / "mangled.txt").string();
  {
    std::ofstream out(mangled);
    out << "0 1 2 three 0 0 0 1\n";
  }
  try {
    read_trajectory(mangled);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == "ParseError");
  }
}

TEST_CASE("track text round trip") {
  const auto dir = test::tmp_dir("io_tracks");
  TrackSet ts;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 640.0);
  for (int i = 0; i < 25; ++i) {
    Track t;
    t.frame_i = i / 5;
    t.frame_j = i / 5 + 1;
    t.p_i = Vec2(u(rng), u(rng) * 0.75);
    t.p_j = Vec2(u(rng), u(rng) * 0.75);
    t.confidence = 0.5 + 0.02 * i;
    ts.tracks.push_back(t);
  }
  const std::string path = (dir / "tracks.txt").string();
  write_tracks(path, ts);
  const TrackSet back = read_tracks(path);
  REQUIRE(back.size() == ts.size());
  for (size_t i = 0; i < ts.size(); ++i) {
    CHECK(back.tracks[i].frame_i == ts.tracks[i].frame_i);
    CHECK(back.tracks[i].frame_j == ts.tracks[i].frame_j);
    CHECK((back.tracks[i].p_i - ts.tracks[i].p_i).norm() < 1e-12);
    CHECK((back.tracks[i].p_j - ts.tracks[i].p_j).norm() < 1e-12);
    CHECK(back.tracks[i].confidence == doctest::Approx(ts.tracks[i].confidence).epsilon(1e-15));
  }
}

TEST_CASE("ply export writes a well-formed header") {
  const auto dir = test::tmp_dir("io_ply");
  std::vector<CloudPoint> pts;
  for (int i = 0; i < 7; ++i) pts.push_back({Vec3(i, 2 * i, -i), 0.1 * i});
  const std::string path = (dir / "c.ply").string();
  write_ply(path, pts);
  REQUIRE(file_exists(path));

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "ply");
  bool saw_count = false, saw_end = false;
  int data_lines = 0;
  while (std::getline(in, line)) {
    if (line == "element vertex 7") saw_count = true;
    if (line == "end_header") {
      saw_end = true;
      while (std::getline(in, line)) {
        if (!line.empty()) ++data_lines;
      }
      break;
    }
  }
  CHECK(saw_count);
  CHECK(saw_end);
  CHECK(data_lines == 7);
}

TEST_CASE("file_exists") {
  const auto dir = test::tmp_dir("io_exists");
  CHECK_FALSE(file_exists((dir / "a").string()));
  std::ofstream((dir / "a").string()) << "x";
  CHECK(file_exists((dir / "a").string()));
}
