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

#include <Eigen/Dense>

#include "glbm/graph_prior.hpp"
#include "glbm/posterior.hpp"
#include "glbm/tensor.hpp"

namespace glbm {

struct LossWeights {
  double alpha = 0.01;     // nuclear norm
  double beta = 0.5;       // l1 sparsity on moving pixels
  double kl_weight = 1.0;  // KL multiplier; 1 gives the plain negative ELBO
};

struct LossBreakdown {
  double recon = 0.0;
  double kl = 0.0;
  double sparsity = 0.0;
  double nuclear = 0.0;
  double total = 0.0;
};

// Binary cross-entropy averaged over static (moving == 0) elements only.
// `moving` is [n][H][W] and applies to every channel. Returns 0 when no
// element is static.
template <typename T>
double masked_bce(const Tensor4<T>& frames, const Tensor4<T>& recon, const MaskStack& moving);

// Sum of |v - b| over moving elements divided by the total element count.
template <typename T>
double sparsity_l1(const Tensor4<T>& frames, const Tensor4<T>& recon, const MaskStack& moving);

// Sum of singular values.
double nuclear_norm(const Eigen::MatrixXd& latents);
// U V^T over the nonzero singular values (a subgradient at rank deficiency).
Eigen::MatrixXd nuclear_norm_gradient(const Eigen::MatrixXd& latents);

// Rows of `post` for each clique concatenated as [mu | scale].
Eigen::MatrixXd clique_latents(const StructuredPosterior& post, int clique);

template <typename T>
struct LossGradients {
  Tensor4<T> recon;
  Eigen::MatrixXd mu;
  Eigen::MatrixXd scale;
};

// total = recon + kl_weight * kl + beta * sparsity + alpha * sum over cliques
// of the nuclear norm. When `grads` is given it receives d total / d(recon,
// mu, scale) with recon held independent of the latents.
template <typename T>
LossBreakdown total_loss(const Tensor4<T>& frames, const Tensor4<T>& recon, const StructuredPosterior& post,
                         const PriorPrecision& q, const MaskStack& moving, const LossWeights& w,
                         LossGradients<T>* grads = nullptr);

}  // namespace glbm
