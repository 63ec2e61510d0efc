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

#include "glbm/objective.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "glbm/error.hpp"

namespace glbm {
namespace {

constexpr double kProbClamp = 1e-7;

template <typename T>
void check_shapes(const Tensor4<T>& frames, const Tensor4<T>& recon, const MaskStack& moving) {
  require(frames.same_shape(recon), "loss: frames and reconstruction differ in shape");
  require(moving.frames == frames.n && moving.height == frames.h && moving.width == frames.w,
          "loss: motion mask does not match the frames");
}

// Calls fn(element index, moving flag) for every element.
template <typename T, typename Fn>
void for_each_element(const Tensor4<T>& frames, const MaskStack& moving, Fn&& fn) {
  const std::size_t plane = frames.plane();
  for (int i = 0; i < frames.n; ++i) {
    const std::uint8_t* m = moving.frame(i);
    for (int c = 0; c < frames.c; ++c) {
      const std::size_t base = (static_cast<std::size_t>(i) * frames.c + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) fn(base + p, m[p] != 0);
    }
  }
}

double bce(double v, double b) {
  b = std::clamp(b, kProbClamp, 1.0 - kProbClamp);
  return -(v * std::log(b) + (1.0 - v) * std::log1p(-b));
}

}  // namespace

template <typename T>
double masked_bce(const Tensor4<T>& frames, const Tensor4<T>& recon, const MaskStack& moving) {
  check_shapes(frames, recon, moving);
  double sum = 0.0;
  std::size_t count = 0;
  for_each_element(frames, moving, [&](std::size_t k, bool is_moving) {
    if (is_moving) return;
    sum += bce(frames.data[k], recon.data[k]);
    ++count;
  });
  if (count == 0) {
    std::cerr << "warning: masked_bce: every pixel is moving, reconstruction term is 0\n";
    return 0.0;
  }
  return sum / static_cast<double>(count);
}

template <typename T>
double sparsity_l1(const Tensor4<T>& frames, const Tensor4<T>& recon, const MaskStack& moving) {
  check_shapes(frames, recon, moving);
  double sum = 0.0;
  for_each_element(frames, moving, [&](std::size_t k, bool is_moving) {
    if (is_moving) sum += std::abs(static_cast<double>(frames.data[k]) - static_cast<double>(recon.data[k]));
  });
  return frames.size() ? sum / static_cast<double>(frames.size()) : 0.0;
}

double nuclear_norm(const Eigen::MatrixXd& latents) {
  if (!latents.allFinite()) throw NumericError("nuclear_norm: non-finite input");
  if (latents.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(latents);
  return svd.singularValues().sum();
}

Eigen::MatrixXd nuclear_norm_gradient(const Eigen::MatrixXd& latents) {
  if (!latents.allFinite()) throw NumericError("nuclear_norm: non-finite input");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(latents.rows(), latents.cols());
  if (latents.size() == 0) return g;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(latents, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tol = std::max(latents.rows(), latents.cols()) * 1e-14 * (sv.size() ? sv(0) : 0.0);
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) g += svd.matrixU().col(i) * svd.matrixV().col(i).transpose();
  return g;
}

Eigen::MatrixXd clique_latents(const StructuredPosterior& post, int clique) {
  const int off = post.offsets[clique];
  const int s = post.clique_sizes[clique];
  Eigen::MatrixXd f(s, 2 * post.d());
  f << post.mu.middleRows(off, s), post.scale.middleRows(off, s);
  return f;
}

template <typename T>
LossBreakdown total_loss(const Tensor4<T>& frames, const Tensor4<T>& recon, const StructuredPosterior& post,
                         const PriorPrecision& q, const MaskStack& moving, const LossWeights& w,
                         LossGradients<T>* grads) {
  check_shapes(frames, recon, moving);
  require(post.n() == frames.n, "total_loss: posterior and frames cover different frame counts");
  require(w.alpha >= 0.0 && w.beta >= 0.0 && w.kl_weight >= 0.0, "total_loss: loss weights must be nonnegative");

  LossBreakdown out;
  out.recon = masked_bce(frames, recon, moving);
  out.sparsity = sparsity_l1(frames, recon, moving);
  out.kl = kl_divergence(post, q);
  for (std::size_t c = 0; c < post.clique_sizes.size(); ++c)
    out.nuclear += nuclear_norm(clique_latents(post, static_cast<int>(c)));
  out.total = out.recon + w.kl_weight * out.kl + w.beta * out.sparsity + w.alpha * out.nuclear;
  if (!std::isfinite(out.total)) throw NumericError("total_loss: non-finite loss");

  if (grads) {
    std::size_t static_count = 0;
    for_each_element(frames, moving, [&](std::size_t, bool is_moving) { static_count += is_moving ? 0 : 1; });
    const double inv_static = static_count ? 1.0 / static_cast<double>(static_count) : 0.0;
    const double inv_total = 1.0 / static_cast<double>(frames.size());
    grads->recon = Tensor4<T>(frames.n, frames.c, frames.h, frames.w);
    for_each_element(frames, moving, [&](std::size_t k, bool is_moving) {
      const double v = frames.data[k];
      const double b = recon.data[k];
      double g;
      if (is_moving) {
        g = w.beta * inv_total * (b > v ? 1.0 : (b < v ? -1.0 : 0.0));
      } else {
        const double bc = std::clamp(b, kProbClamp, 1.0 - kProbClamp);
        g = inv_static * (bc - v) / (bc * (1.0 - bc));
      }
      grads->recon.data[k] = static_cast<T>(g);
    });

    const PosteriorGradient kl = kl_gradient(post, q);
    grads->mu = w.kl_weight * kl.mu;
    grads->scale = w.kl_weight * kl.scale;
    if (w.alpha > 0.0) {
      const int d = post.d();
      for (std::size_t c = 0; c < post.clique_sizes.size(); ++c) {
        const Eigen::MatrixXd g = nuclear_norm_gradient(clique_latents(post, static_cast<int>(c)));
        const int off = post.offsets[c];
        const int s = post.clique_sizes[c];
        grads->mu.middleRows(off, s) += w.alpha * g.leftCols(d);
        grads->scale.middleRows(off, s) += w.alpha * g.rightCols(d);
      }
    }
  }
  return out;
}

template double masked_bce<float>(const Tensor4<float>&, const Tensor4<float>&, const MaskStack&);
template double masked_bce<double>(const Tensor4<double>&, const Tensor4<double>&, const MaskStack&);
template double sparsity_l1<float>(const Tensor4<float>&, const Tensor4<float>&, const MaskStack&);
template double sparsity_l1<double>(const Tensor4<double>&, const Tensor4<double>&, const MaskStack&);
template LossBreakdown total_loss<float>(const Tensor4<float>&, const Tensor4<float>&, const StructuredPosterior&,
                                         const PriorPrecision&, const MaskStack&, const LossWeights&,
                                         LossGradients<float>*);
template LossBreakdown total_loss<double>(const Tensor4<double>&, const Tensor4<double>&, const StructuredPosterior&,
                                          const PriorPrecision&, const MaskStack&, const LossWeights&,
                                          LossGradients<double>*);

}  // namespace glbm
