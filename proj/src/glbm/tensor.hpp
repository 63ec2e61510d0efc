/*
 * Copyright 2026 The glbm authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "glbm/error.hpp"

namespace glbm {

// Packet-aligned storage.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

// Dense batch of planar images, layout [n][c][h][w].
template <typename T>
struct Tensor4 {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  AlignedVector<T> data;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_, T fill = T(0))
      : n(n_), c(c_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::size_t sample_size() const { return static_cast<std::size_t>(c) * h * w; }

  T* sample(int i) { return data.data() + static_cast<std::size_t>(i) * sample_size(); }
  const T* sample(int i) const { return data.data() + static_cast<std::size_t>(i) * sample_size(); }

  T& at(int i, int ch, int y, int x) {
    return data[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x];
  }
  T at(int i, int ch, int y, int x) const {
    return data[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x];
  }

  bool same_shape(const Tensor4& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }

  template <typename U>
  Tensor4<U> cast() const {
    Tensor4<U> out;
    out.n = n;
    out.c = c;
    out.h = h;
    out.w = w;
    out.data.assign(data.begin(), data.end());
    return out;
  }
};

// Single-channel float image, row-major.
struct Plane {
  int height = 0;
  int width = 0;
  AlignedVector<float> v;

  Plane() = default;
  Plane(int h, int w, float fill = 0.0f)
      : height(h), width(w), v(static_cast<std::size_t>(h) * w, fill) {}

  float& at(int y, int x) { return v[static_cast<std::size_t>(y) * width + x]; }
  float at(int y, int x) const { return v[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return v.size(); }
};

// Binary mask stack [frames][h][w], entries in {0,1}.
struct MaskStack {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> v;

  MaskStack() = default;
  MaskStack(int f, int h, int w, std::uint8_t fill = 0)
      : frames(f), height(h), width(w), v(static_cast<std::size_t>(f) * h * w, fill) {}

  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  std::uint8_t* frame(int i) { return v.data() + static_cast<std::size_t>(i) * plane(); }
  const std::uint8_t* frame(int i) const { return v.data() + static_cast<std::size_t>(i) * plane(); }
  std::uint8_t& at(int f, int y, int x) { return v[(static_cast<std::size_t>(f) * height + y) * width + x]; }
  std::uint8_t at(int f, int y, int x) const { return v[(static_cast<std::size_t>(f) * height + y) * width + x]; }
};

}  // namespace glbm
