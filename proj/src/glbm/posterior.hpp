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

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glbm/graph_prior.hpp"

namespace glbm {

enum class ScaleSemantics { precision, variance };
enum class SamplingMode { structured, mean_field };

ScaleSemantics parse_scale_semantics(const std::string& s);
SamplingMode parse_sampling_mode(const std::string& s);

// Structured Gaussian posterior over frame-major latents [n x d]. For latent
// dimension k and clique c the precision block is
//   P_ck = diag(s_ck) q_c diag(s_ck),
// with s the positive precision scale of each frame.
struct StructuredPosterior {
  Eigen::MatrixXd mu;
  Eigen::MatrixXd scale;
  std::vector<int> clique_sizes;
  std::vector<int> offsets;
  // chol[c][k] is upper triangular with chol^T chol = P_ck.
  std::vector<std::vector<Eigen::MatrixXd>> chol;

  int n() const { return static_cast<int>(mu.rows()); }
  int d() const { return static_cast<int>(mu.cols()); }
};

StructuredPosterior assemble_posterior(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& scale,
                                       const PriorPrecision& q);

// Dense P_ck for inspection and tests.
Eigen::MatrixXd precision_block(const StructuredPosterior& post, const PriorPrecision& q, int clique, int dim);

// z_k = mu_k + R_k^{-1} noise_k per clique, so that Cov(z_k) = P_k^{-1}.
Eigen::MatrixXd sample(const StructuredPosterior& post, const Eigen::MatrixXd& noise);

// Ignores cross-frame coupling: z_ik = mu_ik + noise_ik / sqrt(P_k(i,i)).
Eigen::MatrixXd sample_mean_field(const StructuredPosterior& post, const PriorPrecision& q,
                                  const Eigen::MatrixXd& noise);

// KL(posterior || N(0, (q (x) I_d)^{-1})), summed over cliques and dimensions.
double kl_divergence(const StructuredPosterior& post, const PriorPrecision& q);

struct PosteriorGradient {
  Eigen::MatrixXd mu;
  Eigen::MatrixXd scale;
};

PosteriorGradient kl_gradient(const StructuredPosterior& post, const PriorPrecision& q);

// Back-propagates dL/dz through either sampler. Both satisfy
// z - mu = (per-frame term) / s, so dz/ds = -(z - mu) / s.
PosteriorGradient sample_backward(const StructuredPosterior& post, const Eigen::MatrixXd& z,
                                  const Eigen::MatrixXd& grad_z);

// Maps the encoder's second head to the precision scale s:
// identity for precision semantics, h^{-1/2} when h is read as a variance.
Eigen::MatrixXd effective_scale(const Eigen::MatrixXd& head, ScaleSemantics semantics);
Eigen::MatrixXd effective_scale_backward(const Eigen::MatrixXd& head, const Eigen::MatrixXd& grad_scale,
                                         ScaleSemantics semantics);

}  // namespace glbm
