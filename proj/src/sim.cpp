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

#include "vpe/sim.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vpe::sim {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kOcclusionRelTol = 1e-6;

// Stateless uniform/gaussian draws from hashed keys: deterministic under any
// parallel schedule and independent of libstdc++ distribution internals.
double u01(uint64_t h) { return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53; }

Vec2 gauss2(uint64_t key) {
  const double u1 = u01(mix_seed(key, 0x9E3779B97F4A7C15ull));
  const double u2 = u01(mix_seed(key, 0xD1B54A32D192ED03ull));
  const double r = std::sqrt(-2.0 * std::log(u1));
  return Vec2(r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2));
}

// Serial draw chain for one-off construction-time sampling.
struct HashChain {
  uint64_t state;
  explicit HashChain(uint64_t seed) : state(seed) {}
  double next() {
    state = mix_seed(state, 0x2545F4914F6CDD1Dull);
    return u01(state);
  }
};

double lattice(int ix, int iy, int id) {
  const uint64_t packed =
      (static_cast<uint64_t>(static_cast<uint32_t>(ix)) << 32) | static_cast<uint32_t>(iy);
  return u01(mix_seed(0xA11CE5ull + static_cast<uint64_t>(id), packed));
}

double value_noise(const Vec2& p, int id) {
  const double fx = std::floor(p.x()), fy = std::floor(p.y());
  const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
  double ax = p.x() - fx, ay = p.y() - fy;
  ax = ax * ax * (3.0 - 2.0 * ax);  // smoothstep keeps gradients continuous
  ay = ay * ay * (3.0 - 2.0 * ay);
  const double v00 = lattice(ix, iy, id), v10 = lattice(ix + 1, iy, id);
  const double v01 = lattice(ix, iy + 1, id), v11 = lattice(ix + 1, iy + 1, id);
  return (v00 * (1 - ax) + v10 * ax) * (1 - ay) + (v01 * (1 - ax) + v11 * ax) * ay;
}

double texture_value(int id, const Vec2& uv) {
  double v = 0.5;
  v += 0.40 * (value_noise(uv * 0.9, id) - 0.5);
  v += 0.30 * (value_noise(uv * 3.7, id + 7) - 0.5);
  const int cell = static_cast<int>(std::floor(uv.x() * 1.3)) +
                   static_cast<int>(std::floor(uv.y() * 1.3));
  v += (cell & 1) ? 0.08 : -0.08;
  return std::clamp(v, 0.05, 0.95);
}

// Smooth loop in SE(3); tau is normalized time in [0, 1]. Poses are later
// re-based so the first frame is exactly the identity.
Pose raw_pose(double tau, double motion_scale) {
  Pose p;
  p.t = motion_scale * Vec3(1.1 * std::sin(2.0 * kPi * tau),
                            0.4 * std::sin(4.0 * kPi * tau + 0.7),
                            0.9 * std::sin(2.0 * kPi * tau + 1.9));
  const double yaw = 0.22 * std::sin(2.0 * kPi * tau + 0.5);
  const double pitch = 0.10 * std::sin(4.0 * kPi * tau + 1.3);
  p.q = Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vec3::UnitY()) *
                           Eigen::AngleAxisd(pitch, Vec3::UnitX()));
  return p;
}

double time_warp(const SceneConfig& cfg, double frame) {
  const double s = cfg.num_frames > 1 ? frame / (cfg.num_frames - 1) : 0.0;
  // sin(pi s) retraces itself around the midpoint, making every world state
  // (camera and objects alike) palindromic in frame index.
  return cfg.palindrome ? std::sin(kPi * s) : s;
}

bool intersect_plane(const PlaneGeom& g, const Vec3& o, const Vec3& d, double* s,
                     Vec2* uv) {
  const Vec3 n = g.u_dir.cross(g.v_dir);
  const double denom = n.dot(d);
  if (std::abs(denom) < 1e-12) return false;
  const double si = n.dot(g.origin - o) / denom;
  if (si <= 1e-9) return false;
  const Vec3 x = o + si * d - g.origin;
  const double a = x.dot(g.u_dir), b = x.dot(g.v_dir);
  if (a < 0.0 || a > g.u_extent || b < 0.0 || b > g.v_extent) return false;
  *s = si;
  *uv = Vec2(a, b);
  return true;
}

bool intersect_box(const DynamicBox& box, const Pose& obj_pose, const Vec3& o,
                   const Vec3& d, double* s, Vec2* uv) {
  // The slab test runs in the object frame; the ray parameter is invariant
  // under the rigid change of frame.
  const Pose inv = obj_pose.inverse();
  const Vec3 ol = inv * o;
  const Vec3 dl = inv.q * d;
  double t0 = 1e-6, t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double he = box.half_extents[a];
    if (std::abs(dl[a]) < 1e-12) {
      if (std::abs(ol[a]) > he) return false;
      continue;
    }
    double ta = (-he - ol[a]) / dl[a];
    double tb = (he - ol[a]) / dl[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  if (!std::isfinite(t0) || t0 <= 1e-6) return false;
  const Vec3 xl = ol + t0 * dl;
  // Texture coordinates from the two axes orthogonal to the face being hit.
  int face = 0;
  double best = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double frac = std::abs(xl[a]) / box.half_extents[a];
    if (frac > best) {
      best = frac;
      face = a;
    }
  }
  *s = t0;
  *uv = Vec2(xl[(face + 1) % 3], xl[(face + 2) % 3]);
  return true;
}

// Projects a world point into a frame and verifies it is the surface actually
// seen along that pixel ray (depth agreement within a relative tolerance).
bool point_visible(const Scene& scene, int frame, const Vec3& x_world, Vec2* uv) {
  const Pose& cam = scene.pose(frame);
  const Vec3 x_cam = cam.inverse() * x_world;
  if (x_cam.z() <= 1e-6) return false;
  Vec2 px;
  if (!try_project(x_cam, scene.camera, &px)) return false;
  if (px.x() < 0.0 || px.x() > scene.camera.width - 1.0 || px.y() < 0.0 ||
      px.y() > scene.camera.height - 1.0)
    return false;
  RaycastHit hit;
  const Vec3 dir_world = cam.q * (x_cam / x_cam.z());
  if (!raycast(scene, frame, cam.t, dir_world, &hit)) return false;
  if (std::abs(hit.s - x_cam.z()) > kOcclusionRelTol * std::max(1.0, x_cam.z()))
    return false;
  *uv = px;
  return true;
}

template <bool kParallel>
DepthRender render_depth_impl(const Scene& scene, int frame, const Intrinsics& k,
                              int rows, int cols) {
  DepthRender out;
  out.inv_depth = Grid<double>(rows, cols, kInvalidDepth);
  out.static_mask = Grid<uint8_t>(rows, cols, 1);
  const Pose& cam = scene.pose(frame);
#pragma omp parallel for schedule(static) if (kParallel)
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Vec3 dir;
      if (!try_unproject_dir(Vec2(c, r), k, &dir)) continue;
      RaycastHit hit;
      if (!raycast(scene, frame, cam.t, cam.q * dir, &hit)) continue;
      out.inv_depth(r, c) = 1.0 / hit.s;
      if (hit.dynamic) out.static_mask(r, c) = 0;
    }
  }
  return out;
}

template <bool kParallel>
FlowField induced_flow_impl(const Scene& scene, int frame_i, int frame_j,
                            const Intrinsics& k, int rows, int cols, double sigma) {
  FlowField out;
  out.flow = Grid<Vec2>(rows, cols, Vec2::Zero());
  out.weight = Grid<double>(rows, cols, 0.0);
  const Pose& cam_i = scene.pose(frame_i);
  const Pose& cam_j = scene.pose(frame_j);
  const Pose cam_j_inv = cam_j.inverse();
  const uint64_t pair_key =
      mix_seed(mix_seed(scene.cfg.seed, 0xF10Full),
               static_cast<uint64_t>(frame_i) * 1000003ull + static_cast<uint64_t>(frame_j));
#pragma omp parallel for schedule(static) if (kParallel)
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Vec3 dir;
      if (!try_unproject_dir(Vec2(c, r), k, &dir)) continue;
      RaycastHit hit;
      if (!raycast(scene, frame_i, cam_i.t, cam_i.q * dir, &hit)) continue;
      const Vec3 x_cam_i = hit.s * dir;
      Vec3 x_world = cam_i * x_cam_i;
      if (hit.dynamic) {
        // Rigid object motion between the two frames carries the point.
        const Pose pi = scene.object_pose(0, frame_i);
        const Pose pj = scene.object_pose(0, frame_j);
        x_world = pj * (pi.inverse() * x_world);
      }
      const Vec3 x_cam_j = cam_j_inv * x_world;
      if (x_cam_j.z() <= 1e-6) continue;
      Vec2 uv_j;
      if (!try_project(x_cam_j, k, &uv_j)) continue;
      if (uv_j.x() < 0.0 || uv_j.x() > cols - 1.0 || uv_j.y() < 0.0 ||
          uv_j.y() > rows - 1.0)
        continue;
      RaycastHit hit_j;
      if (!raycast(scene, frame_j, cam_j.t, cam_j.q * (x_cam_j / x_cam_j.z()), &hit_j))
        continue;
      if (std::abs(hit_j.s - x_cam_j.z()) >
          kOcclusionRelTol * std::max(1.0, x_cam_j.z()))
        continue;  // occluded in the target frame
      Vec2 flow = uv_j - Vec2(c, r);
      if (sigma > 0.0) {
        flow += sigma * gauss2(mix_seed(pair_key,
                                        static_cast<uint64_t>(r) * cols + c));
      }
      out.flow(r, c) = flow;
      out.weight(r, c) = 1.0;
    }
  }
  return out;
}

}  // namespace

Scene Scene::build(const SceneConfig& cfg) {
  Scene s;
  s.cfg = cfg;
  s.camera = Intrinsics::from_fov_deg(cfg.fov_deg, cfg.width, cfg.height);

  // Open box: back wall plus two side walls, sized to keep the whole field of
  // view on geometry across the trajectory's reach.
  PlaneGeom back;
  back.origin = Vec3(-8.0, -5.0, 8.0);
  back.u_dir = Vec3::UnitX();
  back.v_dir = Vec3::UnitY();
  back.u_extent = 16.0;
  back.v_extent = 10.0;
  back.texture = 0;
  PlaneGeom left;
  left.origin = Vec3(-8.0, -5.0, -2.0);
  left.u_dir = Vec3::UnitZ();
  left.v_dir = Vec3::UnitY();
  left.u_extent = 10.0;
  left.v_extent = 10.0;
  left.texture = 1;
  PlaneGeom right = left;
  right.origin = Vec3(8.0, -5.0, -2.0);
  right.texture = 2;
  s.planes = {back, left, right};

  if (cfg.dynamic_object) {
    DynamicBox box;
    // Sized so the default (dynamic_size = 1) keeps static geometry >= 80%
    // of every frame's pixels; ~1.5 covers roughly 30% on average.
    box.half_extents = Vec3(0.72, 0.72, 0.72) * cfg.dynamic_size;
    box.center = Vec3(0.0, 0.4, 4.2);
    box.translation_amp = Vec3(1.0, 0.25, 0.5);
    box.rot_amp_rad = 0.5;
    box.rot_axis = Vec3::UnitY();
    s.boxes.push_back(box);
  }

  const int n = std::max(1, cfg.num_frames);
  s.trajectory.reserve(n);
  const Pose base_inv = raw_pose(time_warp(cfg, 0.0), cfg.motion_scale).inverse();
  for (int f = 0; f < n; ++f) {
    s.trajectory.push_back(base_inv * raw_pose(time_warp(cfg, f), cfg.motion_scale));
  }

  // Landmarks: area-weighted uniform samples on the static planes, plus a
  // fixed-size pool on the box surface (object frame) when one exists.
  HashChain chain(mix_seed(cfg.seed, 0x5EED5ull));
  std::vector<double> cum_area;
  double total = 0.0;
  for (const PlaneGeom& g : s.planes) {
    total += g.u_extent * g.v_extent;
    cum_area.push_back(total);
  }
  s.surface_points.reserve(cfg.sprinkle_points);
  for (int i = 0; i < cfg.sprinkle_points; ++i) {
    const double pick = chain.next() * total;
    size_t pl = 0;
    while (pl + 1 < cum_area.size() && pick > cum_area[pl]) ++pl;
    const PlaneGeom& g = s.planes[pl];
    const double a = chain.next() * g.u_extent;
    const double b = chain.next() * g.v_extent;
    // Exactly on the surface: the visibility raycast re-hits the same plane
    // at the same parameter, so on-surface points are never self-occluded.
    s.surface_points.push_back(g.origin + a * g.u_dir + b * g.v_dir);
  }
  if (!s.boxes.empty()) {
    const Vec3 he = s.boxes[0].half_extents;
    const int n_obj = 160;
    s.object_points.reserve(n_obj);
    for (int i = 0; i < n_obj; ++i) {
      const int axis = static_cast<int>(chain.next() * 3.0) % 3;
      const double sign = chain.next() < 0.5 ? -1.0 : 1.0;
      Vec3 p;
      p[axis] = sign * he[axis];
      p[(axis + 1) % 3] = (2.0 * chain.next() - 1.0) * he[(axis + 1) % 3];
      p[(axis + 2) % 3] = (2.0 * chain.next() - 1.0) * he[(axis + 2) % 3];
      s.object_points.push_back(p);
    }
  }
  return s;
}

Pose Scene::object_pose(int box, double frame) const {
  const DynamicBox& b = boxes.at(box);
  const double tau = time_warp(cfg, frame);
  Pose p;
  p.t = b.center + Vec3(b.translation_amp.x() * std::sin(2.0 * kPi * tau + 0.3),
                        b.translation_amp.y() * std::sin(4.0 * kPi * tau + 1.1),
                        b.translation_amp.z() * std::sin(2.0 * kPi * tau + 2.2));
  p.q = Eigen::Quaterniond(
      Eigen::AngleAxisd(b.rot_amp_rad * std::sin(2.0 * kPi * tau + 0.9), b.rot_axis));
  return p;
}

bool raycast(const Scene& scene, double frame, const Vec3& origin, const Vec3& dir,
             RaycastHit* hit) {
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const PlaneGeom& g : scene.planes) {
    double s;
    Vec2 uv;
    if (intersect_plane(g, origin, dir, &s, &uv) && s < best) {
      best = s;
      found = true;
      hit->s = s;
      hit->dynamic = false;
      hit->texture = g.texture;
      hit->tex_uv = uv;
    }
  }
  for (size_t b = 0; b < scene.boxes.size(); ++b) {
    const Pose obj = scene.object_pose(static_cast<int>(b), frame);
    double s;
    Vec2 uv;
    if (intersect_box(scene.boxes[b], obj, origin, dir, &s, &uv) && s < best) {
      best = s;
      found = true;
      hit->s = s;
      hit->dynamic = true;
      hit->texture = scene.boxes[b].texture;
      hit->tex_uv = uv;
    }
  }
  return found;
}

DepthRender render_depth(const Scene& scene, int frame, const Intrinsics& k, int rows,
                         int cols) {
  return render_depth_impl<true>(scene, frame, k, rows, cols);
}

DepthRender render_depth_serial(const Scene& scene, int frame, const Intrinsics& k,
                                int rows, int cols) {
  return render_depth_impl<false>(scene, frame, k, rows, cols);
}

FlowField induced_flow(const Scene& scene, int frame_i, int frame_j,
                       const Intrinsics& k, int rows, int cols, double sigma) {
  return induced_flow_impl<true>(scene, frame_i, frame_j, k, rows, cols, sigma);
}

FlowField induced_flow_serial(const Scene& scene, int frame_i, int frame_j,
                              const Intrinsics& k, int rows, int cols, double sigma) {
  return induced_flow_impl<false>(scene, frame_i, frame_j, k, rows, cols, sigma);
}

TrackSet sample_tracks(const Scene& scene, int frame_i, int frame_j, int count,
                       double sigma, bool include_dynamic) {
  // Candidate order is a seeded shuffle keyed by the frame pair, so different
  // pairs see different (but reproducible) subsets of the landmark pool.
  struct Cand {
    bool dynamic;
    int idx;
  };
  std::vector<Cand> pool;
  pool.reserve(scene.surface_points.size() + scene.object_points.size());
  for (size_t i = 0; i < scene.surface_points.size(); ++i)
    pool.push_back({false, static_cast<int>(i)});
  if (include_dynamic) {
    for (size_t i = 0; i < scene.object_points.size(); ++i)
      pool.push_back({true, static_cast<int>(i)});
  }
  HashChain chain(mix_seed(mix_seed(scene.cfg.seed, 0x7AC5ull),
                           static_cast<uint64_t>(frame_i) * 1000003ull +
                               static_cast<uint64_t>(frame_j)));
  for (size_t i = pool.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(chain.next() * static_cast<double>(i)) % i;
    std::swap(pool[i - 1], pool[j]);
  }

  TrackSet tracks;
  const uint64_t noise_key = mix_seed(mix_seed(scene.cfg.seed, 0x70A15Eull),
                                      static_cast<uint64_t>(frame_i) * 1000003ull +
                                          static_cast<uint64_t>(frame_j));
  for (const Cand& cand : pool) {
    if (static_cast<int>(tracks.size()) >= count) break;
    Vec3 xw_i, xw_j;
    if (cand.dynamic) {
      const Vec3& p_obj = scene.object_points[cand.idx];
      xw_i = scene.object_pose(0, frame_i) * p_obj;
      xw_j = scene.object_pose(0, frame_j) * p_obj;
    } else {
      xw_i = scene.surface_points[cand.idx];
      xw_j = xw_i;
    }
    Vec2 p_i, p_j;
    if (!point_visible(scene, frame_i, xw_i, &p_i)) continue;
    if (!point_visible(scene, frame_j, xw_j, &p_j)) continue;
    if (sigma > 0.0) {
      p_j += sigma * gauss2(mix_seed(noise_key, tracks.size()));
    }
    Track t;
    t.frame_i = frame_i;
    t.p_i = p_i;
    t.frame_j = frame_j;
    t.p_j = p_j;
    t.confidence = 1.0;
    tracks.tracks.push_back(t);
  }
  return tracks;
}

ImageF render_image(const Scene& scene, int frame, const Intrinsics& k, int rows,
                    int cols) {
  ImageF img(rows, cols, 0.02f);
  const Pose& cam = scene.pose(frame);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Vec3 dir;
      if (!try_unproject_dir(Vec2(c, r), k, &dir)) continue;
      RaycastHit hit;
      if (!raycast(scene, frame, cam.t, cam.q * dir, &hit)) continue;
      img(r, c) = static_cast<float>(texture_value(hit.texture, hit.tex_uv * 2.0));
    }
  }
  return img;
}

Grid<double> affine_depth(const Scene& scene, int frame, const Intrinsics& k,
                          int rows, int cols, double alpha, double beta) {
  const DepthRender render = render_depth(scene, frame, k, rows, cols);
  Grid<double> out(rows, cols, kInvalidDepth);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double inv = render.inv_depth(r, c);
      if (!depth_valid(inv)) continue;
      const double corrupted = alpha * inv + beta;
      if (corrupted <= 0.0) continue;
      out(r, c) = 1.0 / corrupted;
    }
  }
  return out;
}

}  // namespace vpe::sim
