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

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vpe {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat26 = Eigen::Matrix<double, 2, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// All runtime failures carry a short machine-parsable class string, e.g.
// "DegeneratePoint" or "EmptyGraph". The CLI prints them as
// "error: <class>: <message>".
class Error : public std::runtime_error {
 public:
  Error(std::string cls, const std::string& msg)
      : std::runtime_error(cls + ": " + msg), cls_(std::move(cls)) {}
  const std::string& error_class() const { return cls_; }

 private:
  std::string cls_;
};

[[noreturn]] inline void fail(const std::string& cls, const std::string& msg) {
  throw Error(cls, msg);
}

// Dense row-major 2D container. Rows index the vertical (y) direction,
// columns the horizontal (x) direction; pixel coordinates are (x, y).
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols)
      : rows_(rows), cols_(cols),
        data_(static_cast<size_t>(rows) * static_cast<size_t>(cols)) {}
  Grid(int rows, int cols, const T& fill)
      : rows_(rows), cols_(cols),
        data_(static_cast<size_t>(rows) * static_cast<size_t>(cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const {
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool in_bounds(int r, int c) const {
    return r >= 0 && r < rows_ && c >= 0 && c < cols_;
  }
  template <typename U>
  bool same_size(const Grid<U>& other) const {
    return rows_ == other.rows() && cols_ == other.cols();
  }
  void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

inline constexpr double kInvalidDepth = std::numeric_limits<double>::quiet_NaN();

inline bool depth_valid(double d) { return std::isfinite(d) && d > 0.0; }

// Bilinear sample with the (x, y) convention; caller guarantees
// 0 <= x <= cols-1 and 0 <= y <= rows-1.
template <typename T>
inline double bilinear(const Grid<T>& g, double x, double y) {
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  x0 = std::min(std::max(x0, 0), g.cols() - 2 >= 0 ? g.cols() - 2 : 0);
  y0 = std::min(std::max(y0, 0), g.rows() - 2 >= 0 ? g.rows() - 2 : 0);
  const double fx = x - x0, fy = y - y0;
  const double v00 = static_cast<double>(g(y0, x0));
  const double v01 = static_cast<double>(g(y0, std::min(x0 + 1, g.cols() - 1)));
  const double v10 = static_cast<double>(g(std::min(y0 + 1, g.rows() - 1), x0));
  const double v11 = static_cast<double>(
      g(std::min(y0 + 1, g.rows() - 1), std::min(x0 + 1, g.cols() - 1)));
  return (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11);
}

// splitmix64; used to derive independent deterministic RNG streams.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL + b * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int hardware_threads();
void set_num_threads(int n);  // n <= 0 restores the OpenMP default

}  // namespace vpe
