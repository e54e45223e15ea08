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

#include "vpe/io.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace vpe {

namespace {

constexpr char kMagic[4] = {'V', 'P', 'E', '1'};

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
  fail("IOError", path + ": " + what);
}

}  // namespace

bool file_exists(const std::string& path) {
  std::error_code ec;
  return std::filesystem::exists(path, ec);
}

void write_tensor(const std::string& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) io_fail(path, "cannot open for writing");
  os.write(kMagic, 4);
  put_u32(os, t.height);
  put_u32(os, t.width);
  put_u32(os, t.channels);
  static_assert(sizeof(float) == 4);
  os.write(reinterpret_cast<const char*>(t.data.data()),
           static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  if (!os) io_fail(path, "short write");
}

Tensor read_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) io_fail(path, "cannot open");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    fail("ParseError", path + ": bad tensor magic");
  }
  Tensor t;
  t.height = get_u32(is);
  t.width = get_u32(is);
  t.channels = get_u32(is);
  if (!is) fail("ParseError", path + ": truncated header");
  const uint64_t count =
      static_cast<uint64_t>(t.height) * t.width * t.channels;
  if (count > (1ULL << 31)) fail("ParseError", path + ": implausible tensor size");
  t.data.resize(count);
  is.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<uint64_t>(is.gcount()) != count * sizeof(float)) {
    fail("ParseError", path + ": truncated payload");
  }
  return t;
}

Tensor tensor_from_grid(const Grid<double>& g) {
  Tensor t;
  t.height = g.rows();
  t.width = g.cols();
  t.channels = 1;
  t.data.resize(g.size());
  for (size_t i = 0; i < g.size(); ++i) t.data[i] = static_cast<float>(g[i]);
  return t;
}

Grid<double> grid_from_tensor(const Tensor& t) {
  if (t.channels != 1) fail("ParseError", "expected 1-channel tensor");
  Grid<double> g(t.height, t.width);
  for (size_t i = 0; i < g.size(); ++i) g[i] = t.data[i];
  return g;
}

Tensor tensor_from_flow(const FlowField& f) {
  Tensor t;
  t.height = f.rows();
  t.width = f.cols();
  t.channels = 3;
  t.data.resize(static_cast<size_t>(t.height) * t.width * 3);
  for (int r = 0; r < f.rows(); ++r) {
    for (int c = 0; c < f.cols(); ++c) {
      t.at(r, c, 0) = static_cast<float>(f.flow(r, c).x());
      t.at(r, c, 1) = static_cast<float>(f.flow(r, c).y());
      t.at(r, c, 2) = static_cast<float>(f.weight(r, c));
    }
  }
  return t;
}

FlowField flow_from_tensor(const Tensor& t) {
  if (t.channels != 3) fail("ParseError", "expected 3-channel flow tensor");
  FlowField f(t.height, t.width);
  for (uint32_t r = 0; r < t.height; ++r) {
    for (uint32_t c = 0; c < t.width; ++c) {
      f.flow(r, c) = Vec2(t.at(r, c, 0), t.at(r, c, 1));
      f.weight(r, c) = t.at(r, c, 2);
    }
  }
  return f;
}

Tensor tensor_from_grids(const Grid<double>& a, const Grid<double>& b) {
  Tensor t;
  t.height = a.rows();
  t.width = a.cols();
  t.channels = 2;
  t.data.resize(static_cast<size_t>(t.height) * t.width * 2);
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) {
      t.at(r, c, 0) = static_cast<float>(a(r, c));
      t.at(r, c, 1) = static_cast<float>(b(r, c));
    }
  }
  return t;
}

void grids_from_tensor(const Tensor& t, Grid<double>* a, Grid<double>* b) {
  if (t.channels != 2) fail("ParseError", "expected 2-channel tensor");
  *a = Grid<double>(t.height, t.width);
  *b = Grid<double>(t.height, t.width);
  for (uint32_t r = 0; r < t.height; ++r) {
    for (uint32_t c = 0; c < t.width; ++c) {
      (*a)(r, c) = t.at(r, c, 0);
      (*b)(r, c) = t.at(r, c, 1);
    }
  }
}

void write_pgm(const std::string& path, const Grid<uint8_t>& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) io_fail(path, "cannot open for writing");
  os << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.data()),
           static_cast<std::streamsize>(img.size()));
  if (!os) io_fail(path, "short write");
}

Grid<uint8_t> read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) io_fail(path, "cannot open");
  std::string magic;
  is >> magic;
  if (magic != "P5") fail("ParseError", path + ": expected binary PGM (P5)");
  // PGM allows '#' comments between header tokens.
  auto next_int = [&]() -> int {
    for (;;) {
      int ch = is.peek();
      if (ch == '#') {
        std::string line;
        std::getline(is, line);
      } else if (std::isspace(ch)) {
        is.get();
      } else {
        break;
      }
    }
    int v = -1;
    is >> v;
    return v;
  };
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (!is || w <= 0 || h <= 0 || maxval != 255) {
    fail("ParseError", path + ": bad PGM header");
  }
  is.get();  // single whitespace after maxval
  Grid<uint8_t> img(h, w);
  is.read(reinterpret_cast<char*>(img.data()), static_cast<std::streamsize>(img.size()));
  if (static_cast<size_t>(is.gcount()) != img.size()) {
    fail("ParseError", path + ": truncated PGM payload");
  }
  return img;
}

Grid<uint8_t> mask_to_bytes(const Grid<uint8_t>& mask01) {
  Grid<uint8_t> out(mask01.rows(), mask01.cols());
  for (size_t i = 0; i < out.size(); ++i) out[i] = mask01[i] ? 255 : 0;
  return out;
}

Grid<uint8_t> bytes_to_mask(const Grid<uint8_t>& img) {
  Grid<uint8_t> out(img.rows(), img.cols());
  for (size_t i = 0; i < out.size(); ++i) out[i] = img[i] >= 128 ? 1 : 0;
  return out;
}

void write_pgm_float(const std::string& path, const Grid<float>& img) {
  Grid<uint8_t> bytes(img.rows(), img.cols());
  for (size_t i = 0; i < img.size(); ++i) {
    const double v = std::clamp(static_cast<double>(img[i]), 0.0, 1.0);
    bytes[i] = static_cast<uint8_t>(std::lround(v * 255.0));
  }
  write_pgm(path, bytes);
}

Grid<float> read_pgm_float(const std::string& path) {
  const Grid<uint8_t> bytes = read_pgm(path);
  Grid<float> img(bytes.rows(), bytes.cols());
  for (size_t i = 0; i < img.size(); ++i) img[i] = bytes[i] / 255.0f;
  return img;
}

void write_trajectory(const std::string& path, const Trajectory& traj) {
  std::ofstream os(path);
  if (!os) io_fail(path, "cannot open for writing");
  os << "# timestamp tx ty tz qx qy qz qw\n";
  os.precision(17);
  for (const TimedPose& tp : traj) {
    const Pose& p = tp.pose;
    os << tp.t << " " << p.t.x() << " " << p.t.y() << " " << p.t.z() << " "
       << p.q.x() << " " << p.q.y() << " " << p.q.z() << " " << p.q.w() << "\n";
  }
  if (!os) io_fail(path, "short write");
}

Trajectory read_trajectory(const std::string& path) {
  std::ifstream is(path);
  if (!is) io_fail(path, "cannot open");
  Trajectory traj;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    TimedPose tp;
    double qx, qy, qz, qw;
    if (!(ls >> tp.t >> tp.pose.t.x() >> tp.pose.t.y() >> tp.pose.t.z() >> qx >>
          qy >> qz >> qw)) {
      fail("ParseError", path + ":" + std::to_string(lineno) +
                             ": expected 8 numeric fields");
    }
    tp.pose.q = Eigen::Quaterniond(qw, qx, qy, qz).normalized();
    traj.push_back(tp);
  }
  return traj;
}

void write_tracks(const std::string& path, const TrackSet& tracks) {
  std::ofstream os(path);
  if (!os) io_fail(path, "cannot open for writing");
  os << "# frame_i u_i v_i frame_j u_j v_j confidence\n";
  os.precision(17);
  for (const Track& t : tracks.tracks) {
    os << t.frame_i << " " << t.p_i.x() << " " << t.p_i.y() << " " << t.frame_j
       << " " << t.p_j.x() << " " << t.p_j.y() << " " << t.confidence << "\n";
  }
  if (!os) io_fail(path, "short write");
}

TrackSet read_tracks(const std::string& path) {
  std::ifstream is(path);
  if (!is) io_fail(path, "cannot open");
  TrackSet out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Track t;
    if (!(ls >> t.frame_i >> t.p_i.x() >> t.p_i.y() >> t.frame_j >> t.p_j.x() >>
          t.p_j.y() >> t.confidence)) {
      fail("ParseError", path + ":" + std::to_string(lineno) +
                             ": expected 7 numeric fields");
    }
    out.tracks.push_back(t);
  }
  return out;
}

void write_ply(const std::string& path, const std::vector<CloudPoint>& points) {
  std::ofstream os(path);
  if (!os) io_fail(path, "cannot open for writing");
  os << "ply\nformat ascii 1.0\nelement vertex " << points.size()
     << "\nproperty float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        "end_header\n";
  for (const CloudPoint& p : points) {
    const int g = static_cast<int>(std::lround(std::clamp(p.intensity, 0.0, 1.0) * 255.0));
    os << static_cast<float>(p.position.x()) << " " << static_cast<float>(p.position.y())
       << " " << static_cast<float>(p.position.z()) << " " << g << " " << g << " " << g
       << "\n";
  }
  if (!os) io_fail(path, "short write");
}

}  // namespace vpe
