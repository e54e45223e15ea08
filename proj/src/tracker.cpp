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

#include "vpe/tracker.h"

#include <algorithm>
#include <cmath>

namespace vpe {

namespace {

ImageF gaussian_blur(const ImageF& img) {
  // sigma = 1, radius 3.
  constexpr int kR = 3;
  double kern[2 * kR + 1];
  double sum = 0.0;
  for (int i = -kR; i <= kR; ++i) {
    kern[i + kR] = std::exp(-0.5 * i * i);
    sum += kern[i + kR];
  }
  for (double& k : kern) k /= sum;

  const int rows = img.rows(), cols = img.cols();
  ImageF tmp(rows, cols, 0.0f), out(rows, cols, 0.0f);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int i = -kR; i <= kR; ++i) {
        acc += kern[i + kR] * img(r, std::clamp(c + i, 0, cols - 1));
      }
      tmp(r, c) = static_cast<float>(acc);
    }
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int i = -kR; i <= kR; ++i) {
        acc += kern[i + kR] * tmp(std::clamp(r + i, 0, rows - 1), c);
      }
      out(r, c) = static_cast<float>(acc);
    }
  }
  return out;
}

void central_gradients(const ImageF& img, ImageF* gx, ImageF* gy) {
  const int rows = img.rows(), cols = img.cols();
  *gx = ImageF(rows, cols, 0.0f);
  *gy = ImageF(rows, cols, 0.0f);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int cl = std::max(c - 1, 0), cr = std::min(c + 1, cols - 1);
      const int ru = std::max(r - 1, 0), rd = std::min(r + 1, rows - 1);
      (*gx)(r, c) = 0.5f * (img(r, cr) - img(r, cl));
      (*gy)(r, c) = 0.5f * (img(rd, c) - img(ru, c));
    }
  }
}

ImageF downsample2(const ImageF& img) {
  const int rows = std::max(1, img.rows() / 2);
  const int cols = std::max(1, img.cols() / 2);
  ImageF out(rows, cols, 0.0f);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int r0 = 2 * r, c0 = 2 * c;
      const int r1 = std::min(r0 + 1, img.rows() - 1);
      const int c1 = std::min(c0 + 1, img.cols() - 1);
      out(r, c) =
          0.25f * (img(r0, c0) + img(r0, c1) + img(r1, c0) + img(r1, c1));
    }
  }
  return out;
}

}  // namespace

int default_pyramid_levels(int rows, int cols) {
  // floor(log2(min/32)) levels above the base; every level keeps >= 32 px.
  const int m = std::min(rows, cols);
  int extra = 0;
  while ((m >> (extra + 1)) >= 32) ++extra;
  return 1 + extra;
}

ImagePyramid ImagePyramid::build(const ImageF& image, int num_levels) {
  ImagePyramid pyr;
  pyr.levels.push_back(image);
  for (int l = 1; l < num_levels; ++l) {
    pyr.levels.push_back(downsample2(pyr.levels.back()));
  }
  pyr.grad_x.resize(pyr.levels.size());
  pyr.grad_y.resize(pyr.levels.size());
  for (size_t l = 0; l < pyr.levels.size(); ++l) {
    central_gradients(pyr.levels[l], &pyr.grad_x[l], &pyr.grad_y[l]);
  }
  return pyr;
}

std::vector<Corner> detect_corners(const ImageF& image, int max_corners,
                                   double quality, double min_distance) {
  constexpr int kWin = 3;     // 7x7 structure tensor window
  constexpr int kMargin = 5;  // keeps the window and parabola inside the image
  const ImageF smooth = gaussian_blur(image);
  ImageF gx, gy;
  central_gradients(smooth, &gx, &gy);

  const int rows = image.rows(), cols = image.cols();
  Grid<double> response(rows, cols, 0.0);
  double best = 0.0;
  for (int r = kMargin; r < rows - kMargin; ++r) {
    for (int c = kMargin; c < cols - kMargin; ++c) {
      double mxx = 0.0, mxy = 0.0, myy = 0.0;
      for (int dr = -kWin; dr <= kWin; ++dr) {
        for (int dc = -kWin; dc <= kWin; ++dc) {
          const double x = gx(r + dr, c + dc);
          const double y = gy(r + dr, c + dc);
          mxx += x * x;
          mxy += x * y;
          myy += y * y;
        }
      }
      const double tr = mxx + myy;
      const double det = std::sqrt((mxx - myy) * (mxx - myy) + 4.0 * mxy * mxy);
      const double lambda_min = 0.5 * (tr - det);
      response(r, c) = lambda_min;
      best = std::max(best, lambda_min);
    }
  }
  if (best <= 0.0) return {};

  const double threshold = quality * best;
  std::vector<Corner> candidates;
  for (int r = kMargin; r < rows - kMargin; ++r) {
    for (int c = kMargin; c < cols - kMargin; ++c) {
      const double v = response(r, c);
      if (v < threshold) continue;
      bool is_max = true;
      for (int dr = -1; dr <= 1 && is_max; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (response(r + dr, c + dc) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (!is_max) continue;
      // Per-axis parabolic refinement on the response surface.
      auto refine = [](double vm, double v0, double vp) {
        const double denom = vm - 2.0 * v0 + vp;
        if (std::abs(denom) < 1e-12) return 0.0;
        return std::clamp(0.5 * (vm - vp) / denom, -0.5, 0.5);
      };
      Corner corner;
      corner.position =
          Vec2(c + refine(response(r, c - 1), v, response(r, c + 1)),
               r + refine(response(r - 1, c), v, response(r + 1, c)));
      corner.score = v;
      candidates.push_back(corner);
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Corner& a, const Corner& b) { return a.score > b.score; });

  std::vector<Corner> kept;
  const double min_d2 = min_distance * min_distance;
  for (const Corner& cand : candidates) {
    bool clear = true;
    for (const Corner& k : kept) {
      if ((k.position - cand.position).squaredNorm() < min_d2) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    kept.push_back(cand);
    if (static_cast<int>(kept.size()) >= max_corners) break;
  }
  return kept;
}

namespace {

// Single-direction pyramidal LK; returns false on a lost track.
bool lk_one_way(const ImagePyramid& prev, const ImagePyramid& next, const Vec2& p0,
                int hw, int max_iters, Vec2* p_out) {
  const int nl = std::min(prev.num_levels(), next.num_levels());
  Vec2 g = Vec2::Zero();  // displacement estimate at the current level
  for (int level = nl - 1; level >= 0; --level) {
    const double scale = static_cast<double>(1 << level);
    const Vec2 p = p0 / scale;
    const ImageF& ip = prev.levels[level];
    const ImageF& in = next.levels[level];
    if (level < nl - 1) g *= 2.0;

    const double lo = hw + 1.0;
    auto inside = [&](const ImageF& img, const Vec2& q) {
      return q.x() >= lo && q.x() <= img.cols() - 1 - lo && q.y() >= lo &&
             q.y() <= img.rows() - 1 - lo;
    };
    if (!inside(ip, p)) {
      if (level == 0) return false;
      continue;  // too close to the border at this level; try finer
    }

    // Template patch and its 2x2 normal matrix.
    const int n = 2 * hw + 1;
    std::vector<double> tpl(n * n), tgx(n * n), tgy(n * n);
    double mxx = 0.0, mxy = 0.0, myy = 0.0;
    for (int dr = -hw; dr <= hw; ++dr) {
      for (int dc = -hw; dc <= hw; ++dc) {
        const double x = p.x() + dc, y = p.y() + dr;
        const size_t i = static_cast<size_t>(dr + hw) * n + (dc + hw);
        tpl[i] = bilinear(ip, x, y);
        tgx[i] = bilinear(prev.grad_x[level], x, y);
        tgy[i] = bilinear(prev.grad_y[level], x, y);
        mxx += tgx[i] * tgx[i];
        mxy += tgx[i] * tgy[i];
        myy += tgy[i] * tgy[i];
      }
    }
    const double tr = mxx + myy;
    const double lambda_min =
        0.5 * (tr - std::sqrt((mxx - myy) * (mxx - myy) + 4.0 * mxy * mxy));
    if (lambda_min < 1e-8 * n * n) return false;  // textureless or aperture-bound
    const double det = mxx * myy - mxy * mxy;
    if (det <= 0.0) return false;

    for (int it = 0; it < max_iters; ++it) {
      const Vec2 q = p + g;
      if (!inside(in, q)) return false;
      double bx = 0.0, by = 0.0;
      for (int dr = -hw; dr <= hw; ++dr) {
        for (int dc = -hw; dc <= hw; ++dc) {
          const size_t i = static_cast<size_t>(dr + hw) * n + (dc + hw);
          const double diff = tpl[i] - bilinear(in, q.x() + dc, q.y() + dr);
          bx += diff * tgx[i];
          by += diff * tgy[i];
        }
      }
      const Vec2 delta((myy * bx - mxy * by) / det, (mxx * by - mxy * bx) / det);
      if (!std::isfinite(delta.x()) || !std::isfinite(delta.y())) return false;
      g += delta;
      if (g.norm() > 4.0 * n) return false;  // diverged
      if (delta.norm() < 0.01) break;
    }
  }
  *p_out = p0 + g;
  return std::isfinite(p_out->x()) && std::isfinite(p_out->y());
}

std::vector<LKTrack> track_lk_impl(const ImagePyramid& prev, const ImagePyramid& next,
                                   const std::vector<Vec2>& points, int hw,
                                   int max_iters, bool parallel) {
  const int np = static_cast<int>(points.size());
  std::vector<LKTrack> out(np);
  auto run_point = [&](int i) {
    Vec2 fwd;
    if (!lk_one_way(prev, next, points[i], hw, max_iters, &fwd)) return;
    Vec2 back;
    if (!lk_one_way(next, prev, fwd, hw, max_iters, &back)) return;
    if ((back - points[i]).norm() > 1.0) return;
    out[i].point = fwd;
    out[i].ok = true;
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < np; ++i) run_point(i);
  } else {
    for (int i = 0; i < np; ++i) run_point(i);
  }
  return out;
}

}  // namespace

std::vector<LKTrack> track_lk(const ImagePyramid& prev, const ImagePyramid& next,
                              const std::vector<Vec2>& points, int half_window,
                              int max_iters) {
  return track_lk_impl(prev, next, points, half_window, max_iters, true);
}

std::vector<LKTrack> track_lk_serial(const ImagePyramid& prev, const ImagePyramid& next,
                                     const std::vector<Vec2>& points, int half_window,
                                     int max_iters) {
  return track_lk_impl(prev, next, points, half_window, max_iters, false);
}

double motion_magnitude(const FlowField& flow, const TrackSet& tracks) {
  double flow_mag = 0.0, flow_w = 0.0;
  if (!flow.empty()) {
    for (int r = 0; r < flow.rows(); ++r) {
      for (int c = 0; c < flow.cols(); ++c) {
        const double w = flow.weight(r, c);
        const Vec2& f = flow.flow(r, c);
        if (!(w > 0.0) || !std::isfinite(f.x()) || !std::isfinite(f.y())) continue;
        flow_mag += w * f.norm();
        flow_w += w;
      }
    }
  }
  const bool have_flow = flow_w > 0.0;
  const bool have_tracks = !tracks.empty();
  if (!have_flow && !have_tracks) {
    fail("NoMotionData", "no weighted flow and no tracks to measure motion from");
  }
  double parts = 0.0, total = 0.0;
  if (have_flow) {
    total += flow_mag / flow_w;
    parts += 1.0;
  }
  if (have_tracks) {
    double sum = 0.0;
    for (const Track& t : tracks.tracks) sum += (t.p_j - t.p_i).norm();
    total += sum / tracks.size() / kDepthStride;
    parts += 1.0;
  }
  return total / parts;
}

}  // namespace vpe
