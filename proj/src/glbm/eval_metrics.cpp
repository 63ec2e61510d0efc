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

#include "glbm/eval_metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <vector>

#include "glbm/error.hpp"

namespace glbm {
namespace {

// Row-major double image.
struct Grid {
  int h = 0;
  int w = 0;
  std::vector<double> v;
  double at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

Grid to_grid(const Image& gray) {
  Grid g{gray.height, gray.width, std::vector<double>(gray.pixels.begin(), gray.pixels.end())};
  return g;
}

Grid gaussian_filter(const Grid& in, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  Grid tmp{in.h, in.w, std::vector<double>(in.v.size())};
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < in.w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * in.at(y, std::clamp(x + i, 0, in.w - 1));
      tmp.v[static_cast<std::size_t>(y) * in.w + x] = acc;
    }
  Grid out{in.h, in.w, std::vector<double>(in.v.size())};
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < in.w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.at(std::clamp(y + i, 0, in.h - 1), x);
      out.v[static_cast<std::size_t>(y) * in.w + x] = acc;
    }
  return out;
}

Grid halve(const Grid& in) {
  if (in.h < 2 || in.w < 2) return in;
  Grid out{in.h / 2, in.w / 2, {}};
  out.v.resize(static_cast<std::size_t>(out.h) * out.w);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x)
      out.v[static_cast<std::size_t>(y) * out.w + x] =
          0.25 * (in.at(2 * y, 2 * x) + in.at(2 * y, 2 * x + 1) + in.at(2 * y + 1, 2 * x) + in.at(2 * y + 1, 2 * x + 1));
  return out;
}

Grid product(const Grid& a, const Grid& b) {
  Grid out{a.h, a.w, std::vector<double>(a.v.size())};
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

// Mean luminance and contrast-structure terms of SSIM at one scale.
std::pair<double, double> ssim_terms(const Grid& x, const Grid& y, const std::vector<double>& window) {
  constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const Grid mx = gaussian_filter(x, window);
  const Grid my = gaussian_filter(y, window);
  const Grid sxx = gaussian_filter(product(x, x), window);
  const Grid syy = gaussian_filter(product(y, y), window);
  const Grid sxy = gaussian_filter(product(x, y), window);
  double l_sum = 0.0, cs_sum = 0.0;
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    const double vx = sxx.v[i] - mx.v[i] * mx.v[i];
    const double vy = syy.v[i] - my.v[i] * my.v[i];
    const double cxy = sxy.v[i] - mx.v[i] * my.v[i];
    l_sum += (2.0 * mx.v[i] * my.v[i] + c1) / (mx.v[i] * mx.v[i] + my.v[i] * my.v[i] + c1);
    cs_sum += (2.0 * cxy + c2) / (vx + vy + c2);
  }
  const double n = static_cast<double>(x.v.size());
  return {l_sum / n, cs_sum / n};
}

std::vector<double> msssim_window() {
  constexpr int radius = 5;
  constexpr double sigma = 1.5;
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) sum += k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= sum;
  return k;
}

std::array<std::vector<double>, 3> yuv_planes(const Image& img) {
  const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
  std::array<std::vector<double>, 3> out{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t p = 0; p < n; ++p) {
    double r, g, b;
    if (img.channels == 1) {
      r = g = b = img.pixels[p];
    } else {
      r = img.pixels[p * 3];
      g = img.pixels[p * 3 + 1];
      b = img.pixels[p * 3 + 2];
    }
    out[0][p] = 0.299 * r + 0.587 * g + 0.114 * b;
    out[1][p] = -0.14713 * r - 0.28886 * g + 0.436 * b;
    out[2][p] = 0.615 * r - 0.51499 * g - 0.10001 * b;
  }
  return out;
}

double mse(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

}  // namespace

double psnr_from_mse(double mse_value, double peak) {
  if (mse_value <= 0.0) return kPsnrCap;
  return 10.0 * std::log10(peak * peak / mse_value);
}

double msssim(const Image& a, const Image& b) {
  require(a.height == b.height && a.width == b.width, "msssim: images differ in size");
  static const std::array<double, 5> weights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  const auto window = msssim_window();
  Grid x = to_grid(to_gray(a));
  Grid y = to_grid(to_gray(b));
  double result = 1.0;
  for (std::size_t s = 0; s < weights.size(); ++s) {
    const auto [l, cs] = ssim_terms(x, y, window);
    const double term = s + 1 == weights.size() ? l * cs : cs;
    result *= std::pow(std::max(term, 0.0), weights[s]);
    x = halve(x);
    y = halve(y);
  }
  return result;
}

MetricReport sbm_metrics(const Image& gt, const Image& est, const SbmOptions& opts) {
  if (gt.height != est.height || gt.width != est.width)
    throw ArgumentError("sbm_metrics: resolution mismatch (" + std::to_string(gt.width) + "x" +
                        std::to_string(gt.height) + " vs " + std::to_string(est.width) + "x" +
                        std::to_string(est.height) + ")");
  require(gt.height > 0 && gt.width > 0, "sbm_metrics: empty image");
  const Image g = to_gray(gt);
  const Image e = to_gray(est);
  const int h = g.height;
  const int w = g.width;
  const std::size_t n = static_cast<std::size_t>(h) * w;

  MetricReport r;
  std::vector<std::uint8_t> err(n);
  double abs_sum = 0.0, sq_sum = 0.0;
  std::size_t err_count = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const double d = std::abs(static_cast<double>(g.pixels[p]) - static_cast<double>(e.pixels[p]));
    abs_sum += d;
    sq_sum += d * d;
    err[p] = d > opts.ep_threshold ? 1 : 0;
    err_count += err[p];
  }
  std::size_t clustered = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!err[static_cast<std::size_t>(y) * w + x]) continue;
      bool all = true;
      const int dy[4] = {-1, 1, 0, 0};
      const int dx[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4 && all; ++k) {
        const int yy = y + dy[k], xx = x + dx[k];
        if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
        all = err[static_cast<std::size_t>(yy) * w + xx] != 0;
      }
      clustered += all ? 1 : 0;
    }
  r.age = abs_sum / static_cast<double>(n);
  r.peps = static_cast<double>(err_count) / static_cast<double>(n);
  r.pceps = static_cast<double>(clustered) / static_cast<double>(n);
  r.psnr = psnr_from_mse(sq_sum / static_cast<double>(n), opts.peak);
  r.msssim = msssim(g, e);

  const auto yg = yuv_planes(gt);
  const auto ye = yuv_planes(est);
  const double py = psnr_from_mse(mse(yg[0], ye[0]), opts.peak);
  const double pu = psnr_from_mse(mse(yg[1], ye[1]), opts.peak);
  const double pv = psnr_from_mse(mse(yg[2], ye[2]), opts.peak);
  r.cqm = py * kCqmLumaWeight + 0.5 * kCqmChromaWeight * (pu + pv);
  return r;
}

BsScore bs_scores(const MaskStack& pred, const MaskStack& gt) {
  if (pred.frames != gt.frames || pred.height != gt.height || pred.width != gt.width)
    throw ArgumentError("bs_scores: prediction and ground truth differ in shape");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.v.size(); ++i) {
    const bool p = pred.v[i] != 0;
    const bool g = gt.v[i] != 0;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  BsScore s;
  s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  const double pr = s.precision + s.recall;
  s.f_measure = pr > 0.0 ? 2.0 * s.precision * s.recall / pr : 0.0;
  return s;
}

std::string metrics_csv_header() { return "scene,age,peps,pceps,msssim,psnr,cqm"; }

std::string metrics_csv_row(const std::string& scene, const MetricReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", r.age, r.peps, r.pceps, r.msssim, r.psnr, r.cqm);
  return scene + buf;
}

}  // namespace glbm
