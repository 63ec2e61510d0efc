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

#include <doctest.h>

#include <algorithm>

#include "glbm/error.hpp"
#include "glbm/flow_mask.hpp"
#include "support.hpp"

namespace {

float texture(double x, double y) {
  return static_cast<float>(0.5 + 0.2 * std::sin(0.35 * x + 0.1 * y) + 0.15 * std::cos(0.23 * y - 0.05 * x) +
                            0.1 * std::sin(0.11 * (x + y)));
}

glbm::Plane shifted(int h, int w, double dx, double dy) {
  glbm::Plane p(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) p.at(y, x) = texture(x - dx, y - dy);
  return p;
}

template <typename V>
double median(V v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

glbm::FlowField constant_flow(int h, int w, float u, float v) { return {glbm::Plane(h, w, u), glbm::Plane(h, w, v)}; }

}  // namespace

TEST_CASE("flow: identical frames give exactly zero flow") {
  const auto a = shifted(48, 48, 0, 0);
  const auto f = glbm::estimate_flow(a, a);
  CHECK(std::all_of(f.u.v.begin(), f.u.v.end(), [](float x) { return x == 0.0f; }));
  CHECK(std::all_of(f.v.v.begin(), f.v.v.end(), [](float x) { return x == 0.0f; }));
}

TEST_CASE("flow: global translations") {
  const auto a = shifted(64, 64, 0, 0);
  const auto f = glbm::estimate_flow(a, shifted(64, 64, 3, 0));
  CHECK(median(f.u.v) >= 2.5);
  CHECK(median(f.u.v) <= 3.5);
  CHECK(std::abs(median(f.v.v)) <= 0.5);
  const auto g = glbm::estimate_flow(a, shifted(64, 64, 0, -2));
  CHECK(median(g.v.v) >= -2.5);
  CHECK(median(g.v.v) <= -1.5);
  for (double s : {1.0, 2.5, 4.0, 5.0}) {
    const auto h = glbm::estimate_flow(a, shifted(64, 64, s * 0.6, -s * 0.8));
    std::vector<float> epe(h.u.size());
    for (std::size_t i = 0; i < epe.size(); ++i) epe[i] = std::hypot(h.u.v[i] - s * 0.6, h.v.v[i] + s * 0.8);
    CHECK(median(epe) <= 0.5);
  }
  CHECK_THROWS_AS(glbm::estimate_flow(a, glbm::Plane(32, 64)), glbm::ArgumentError);
}

TEST_CASE("motion mask: threshold fixtures") {
  const auto zero = glbm::motion_mask({constant_flow(10, 10, 0, 0)}, 2.0);
  CHECK(zero.tau == 0.0);
  CHECK(std::count(zero.moving.v.begin(), zero.moving.v.end(), 1) == 0);
  CHECK(zero.moving.frames == 2);

  const auto uniform = glbm::motion_mask({constant_flow(10, 10, 0.6f, 0.8f)}, 2.0);
  CHECK(uniform.tau == doctest::Approx(2.0));
  CHECK(std::count(uniform.moving.v.begin(), uniform.moving.v.end(), 1) == 0);

  auto block = constant_flow(100, 100, 0, 0);
  for (int y = 20; y < 30; ++y)
    for (int x = 40; x < 50; ++x) block.u.at(y, x) = 5.0f;
  const auto m = glbm::motion_mask({block}, 2.0);
  CHECK(m.tau == doctest::Approx(0.1));  // mean magnitude 100 * 5 / 10000 = 0.05
  for (int f = 0; f < 2; ++f)
    for (int y = 0; y < 100; ++y)
      for (int x = 0; x < 100; ++x) CHECK(m.moving.at(f, y, x) == (y >= 20 && y < 30 && x >= 40 && x < 50));

  auto scaled = block;
  for (auto& v : scaled.u.v) v *= 7.0f;
  CHECK(glbm::motion_mask({scaled}, 2.0).moving.v == m.moving.v);

  CHECK_THROWS_AS(glbm::motion_mask({}, 2.0), glbm::ArgumentError);
}

TEST_CASE("motion mask: moving square over a sequence") {
  const int n = 6, h = 48, w = 48;
  glbm::Tensor4<float> frames(n, 1, h, w);
  for (int i = 0; i < n; ++i)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const bool in_square = y >= 18 && y < 28 && x >= 8 + 3 * i && x < 18 + 3 * i;
        frames.at(i, 0, y, x) = in_square ? 0.95f : texture(x, y) * 0.5f;
      }
  const auto m = glbm::sequence_motion_mask(frames, {}, 2.0, 4);
  CHECK(m.frames == n);
  for (int i = 1; i < n; ++i) CHECK(m.at(i, 23, 13 + 3 * i) == 1);
  CHECK(m.at(3, 5, 40) == 0);
  CHECK(glbm::sequence_motion_mask(glbm::Tensor4<float>(1, 1, 8, 8), {}, 2.0, 4).v == std::vector<std::uint8_t>(64, 0));
}
