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

#include "glbm/flow_mask.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "glbm/error.hpp"

namespace glbm {
namespace {

// Tikhonov ridge on the 2x2 structure tensor; keeps textureless regions at
// zero displacement.
constexpr double kRidge = 1e-5;
// Largest update accepted from a single linearization (px).
constexpr float kMaxStep = 2.0f;

int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

std::vector<float> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * i * i / (sigma * sigma));
    k[i + radius] = static_cast<float>(w);
    sum += w;
  }
  for (auto& w : k) w = static_cast<float>(w / sum);
  return k;
}

Plane convolve_separable(const Plane& in, const std::vector<float>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  Plane tmp(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      float acc = 0.0f;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * in.at(y, clampi(x + i, 0, in.width - 1));
      tmp.at(y, x) = acc;
    }
  Plane out(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      float acc = 0.0f;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.at(clampi(y + i, 0, in.height - 1), x);
      out.at(y, x) = acc;
    }
  return out;
}

Plane downsample(const Plane& in) {
  static const std::vector<float> binomial = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  const Plane smooth = convolve_separable(in, binomial);
  Plane out((in.height + 1) / 2, (in.width + 1) / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(y, x) = smooth.at(2 * y, 2 * x);
  return out;
}

float sample_bilinear(const Plane& p, float x, float y) {
  x = std::clamp(x, 0.0f, static_cast<float>(p.width - 1));
  y = std::clamp(y, 0.0f, static_cast<float>(p.height - 1));
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, p.width - 1);
  const int y1 = std::min(y0 + 1, p.height - 1);
  const float fx = x - x0;
  const float fy = y - y0;
  const float top = p.at(y0, x0) + fx * (p.at(y0, x1) - p.at(y0, x0));
  const float bot = p.at(y1, x0) + fx * (p.at(y1, x1) - p.at(y1, x0));
  return top + fy * (bot - top);
}

// Resamples a flow component onto a finer grid, rescaling displacements.
Plane upsample_flow(const Plane& coarse, int height, int width, float scale) {
  Plane out(height, width);
  const float sy = static_cast<float>(coarse.height) / height;
  const float sx = static_cast<float>(coarse.width) / width;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out.at(y, x) = scale * sample_bilinear(coarse, (x + 0.5f) * sx - 0.5f, (y + 0.5f) * sy - 0.5f);
  return out;
}

Plane median3x3(const Plane& in) {
  Plane out(in.height, in.width);
  std::array<float, 9> win{};
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          win[n++] = in.at(clampi(y + dy, 0, in.height - 1), clampi(x + dx, 0, in.width - 1));
      std::nth_element(win.begin(), win.begin() + 4, win.end());
      out.at(y, x) = win[4];
    }
  return out;
}

void refine_level(const Plane& a, const Plane& b, Plane& u, Plane& v, int iterations,
                  const std::vector<float>& window) {
  const int h = a.height;
  const int w = a.width;
  Plane warped(h, w);
  for (int iter = 0; iter < iterations; ++iter) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) warped.at(y, x) = sample_bilinear(b, x + u.at(y, x), y + v.at(y, x));

    Plane sxx(h, w), sxy(h, w), syy(h, w), sxt(h, w), syt(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int xl = clampi(x - 1, 0, w - 1), xr = clampi(x + 1, 0, w - 1);
        const int yu = clampi(y - 1, 0, h - 1), yd = clampi(y + 1, 0, h - 1);
        const float gx = 0.25f * (a.at(y, xr) - a.at(y, xl) + warped.at(y, xr) - warped.at(y, xl));
        const float gy = 0.25f * (a.at(yd, x) - a.at(yu, x) + warped.at(yd, x) - warped.at(yu, x));
        const float gt = warped.at(y, x) - a.at(y, x);
        sxx.at(y, x) = gx * gx;
        sxy.at(y, x) = gx * gy;
        syy.at(y, x) = gy * gy;
        sxt.at(y, x) = gx * gt;
        syt.at(y, x) = gy * gt;
      }
    sxx = convolve_separable(sxx, window);
    sxy = convolve_separable(sxy, window);
    syy = convolve_separable(syy, window);
    sxt = convolve_separable(sxt, window);
    syt = convolve_separable(syt, window);

    for (std::size_t p = 0; p < u.size(); ++p) {
      const double a11 = sxx.v[p] + kRidge;
      const double a22 = syy.v[p] + kRidge;
      const double a12 = sxy.v[p];
      const double det = a11 * a22 - a12 * a12;
      const double du = -(a22 * sxt.v[p] - a12 * syt.v[p]) / det;
      const double dv = -(a11 * syt.v[p] - a12 * sxt.v[p]) / det;
      u.v[p] += std::clamp(static_cast<float>(du), -kMaxStep, kMaxStep);
      v.v[p] += std::clamp(static_cast<float>(dv), -kMaxStep, kMaxStep);
    }
    u = median3x3(u);
    v = median3x3(v);
  }
}

float box_residual(const Plane& a, const Plane& b, int y, int x, float du, float dv) {
  float r = 0.0f;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int yy = clampi(y + dy, 0, a.height - 1), xx = clampi(x + dx, 0, a.width - 1);
      r += std::abs(sample_bilinear(b, xx + du, yy + dv) - a.at(yy, xx));
    }
  return r;
}

// Per pixel, keeps the candidate with the smallest 3x3 residual among the
// pixel's own estimate, zero displacement and estimates on a sparse grid of
// neighbours. The own estimate wins ties; zero must halve the residual.
void select_candidates(const Plane& a, const Plane& b, Plane& u, Plane& v) {
  constexpr int kRadius = 6, kStride = 3;
  constexpr float kZeroMargin = 0.5f;
  const Plane u0 = u, v0 = v;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      float best_u = u0.at(y, x), best_v = v0.at(y, x);
      float best = box_residual(a, b, y, x, best_u, best_v);
      auto offer = [&](float cu, float cv) {
        if (best == 0.0f) return;
        const float r = box_residual(a, b, y, x, cu, cv);
        if (r < best) best = r, best_u = cu, best_v = cv;
      };
      if (best > 0.0f) {
        const float r = box_residual(a, b, y, x, 0.0f, 0.0f);
        if (r < kZeroMargin * best) best = r, best_u = 0.0f, best_v = 0.0f;
      }
      for (int dy = -kRadius; dy <= kRadius; dy += kStride)
        for (int dx = -kRadius; dx <= kRadius; dx += kStride) {
          const int yy = y + dy, xx = x + dx;
          if ((dy || dx) && yy >= 0 && yy < a.height && xx >= 0 && xx < a.width) offer(u0.at(yy, xx), v0.at(yy, xx));
        }
      u.at(y, x) = best_u;
      v.at(y, x) = best_v;
    }
}

}  // namespace

FlowField estimate_flow(const Plane& frame_a, const Plane& frame_b, const FlowOptions& opts) {
  require(frame_a.height == frame_b.height && frame_a.width == frame_b.width, "estimate_flow: frame shapes differ");
  require(frame_a.height > 0 && frame_a.width > 0, "estimate_flow: empty frame");
  require(opts.levels >= 1 && opts.iterations >= 1 && opts.window_sigma > 0, "estimate_flow: invalid options");

  std::vector<Plane> pyr_a{frame_a}, pyr_b{frame_b};
  for (int l = 1; l < opts.levels; ++l) {
    if (pyr_a.back().height < 8 || pyr_a.back().width < 8) break;
    pyr_a.push_back(downsample(pyr_a.back()));
    pyr_b.push_back(downsample(pyr_b.back()));
  }

  const auto window = gaussian_kernel(opts.window_sigma);
  FlowField flow;
  for (int l = static_cast<int>(pyr_a.size()) - 1; l >= 0; --l) {
    const Plane& a = pyr_a[l];
    if (flow.u.size() == 0) {
      flow.u = Plane(a.height, a.width);
      flow.v = Plane(a.height, a.width);
    } else {
      const float sx = static_cast<float>(a.width) / flow.u.width;
      const float sy = static_cast<float>(a.height) / flow.u.height;
      flow.u = upsample_flow(flow.u, a.height, a.width, sx);
      flow.v = upsample_flow(flow.v, a.height, a.width, sy);
    }
    refine_level(a, pyr_b[l], flow.u, flow.v, opts.iterations, window);
  }
  select_candidates(frame_a, frame_b, flow.u, flow.v);

  for (std::size_t p = 0; p < flow.u.size(); ++p) {
    if (std::abs(flow.u.v[p]) < opts.zero_tolerance) flow.u.v[p] = 0.0f;
    if (std::abs(flow.v.v[p]) < opts.zero_tolerance) flow.v.v[p] = 0.0f;
  }
  return flow;
}

MotionMask motion_mask(const std::vector<FlowField>& flows, double kappa) {
  require(!flows.empty(), "motion_mask: empty flow list");
  require(kappa > 0.0, "motion_mask: kappa must be positive");
  const int h = flows.front().u.height;
  const int w = flows.front().u.width;
  for (const auto& f : flows)
    require(f.u.height == h && f.u.width == w && f.v.height == h && f.v.width == w,
            "motion_mask: flow fields differ in shape");

  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<double> magnitude(plane * flows.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < flows.size(); ++i)
    for (std::size_t p = 0; p < plane; ++p) {
      const double m = std::hypot(static_cast<double>(flows[i].u.v[p]), static_cast<double>(flows[i].v.v[p]));
      magnitude[i * plane + p] = m;
      sum += m;
    }

  MotionMask out;
  out.tau = kappa * sum / static_cast<double>(magnitude.size());
  out.moving = MaskStack(static_cast<int>(flows.size()) + 1, h, w);
  for (std::size_t i = 0; i < flows.size(); ++i) {
    std::uint8_t* dst = out.moving.frame(static_cast<int>(i) + 1);
    for (std::size_t p = 0; p < plane; ++p) dst[p] = magnitude[i * plane + p] > out.tau ? 1 : 0;
  }
  std::copy(out.moving.frame(1), out.moving.frame(1) + plane, out.moving.frame(0));
  return out;
}

Plane frame_luma(const Tensor4<float>& frames, int i) {
  Plane p(frames.h, frames.w);
  const float* s = frames.sample(i);
  const std::size_t plane = frames.plane();
  if (frames.c == 1) {
    std::copy(s, s + plane, p.v.begin());
  } else {
    require(frames.c == 3, "frame_luma: 1 or 3 channels expected");
    for (std::size_t k = 0; k < plane; ++k)
      p.v[k] = 0.299f * s[k] + 0.587f * s[plane + k] + 0.114f * s[2 * plane + k];
  }
  return p;
}

MaskStack sequence_motion_mask(const Tensor4<float>& frames, const FlowOptions& opts, double kappa, int window) {
  require(frames.n >= 1, "sequence_motion_mask: no frames");
  require(window >= 2, "sequence_motion_mask: window must cover at least two frames");
  MaskStack out(frames.n, frames.h, frames.w);
  if (frames.n == 1) return out;

  std::vector<Plane> luma;
  luma.reserve(frames.n);
  for (int i = 0; i < frames.n; ++i) luma.push_back(frame_luma(frames, i));

  int start = 0;
  while (start < frames.n) {
    int end = std::min(start + window, frames.n);
    if (frames.n - end == 1) end = frames.n;  // never leave a single-frame tail
    std::vector<FlowField> flows;
    for (int i = start + 1; i < end; ++i) flows.push_back(estimate_flow(luma[i], luma[i - 1], opts));
    const MotionMask mm = motion_mask(flows, kappa);
    std::copy(mm.moving.v.begin(), mm.moving.v.end(), out.frame(start));
    start = end;
  }
  return out;
}

}  // namespace glbm
