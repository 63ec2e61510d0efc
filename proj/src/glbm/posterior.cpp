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

#include "glbm/posterior.hpp"

#include <cmath>

#include "glbm/error.hpp"

namespace glbm {

ScaleSemantics parse_scale_semantics(const std::string& s) {
  if (s == "precision") return ScaleSemantics::precision;
  if (s == "variance") return ScaleSemantics::variance;
  throw ArgumentError("unknown scale semantics '" + s + "'");
}

SamplingMode parse_sampling_mode(const std::string& s) {
  if (s == "structured") return SamplingMode::structured;
  if (s == "mean_field") return SamplingMode::mean_field;
  throw ArgumentError("unknown sampling mode '" + s + "'");
}

StructuredPosterior assemble_posterior(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& scale,
                                       const PriorPrecision& q) {
  require(mu.rows() == q.n() && scale.rows() == q.n(), "assemble_posterior: row count does not match the prior");
  require(mu.cols() == scale.cols() && mu.cols() >= 1, "assemble_posterior: mu and scale shapes differ");
  if (!mu.allFinite() || !scale.allFinite()) throw NumericError("assemble_posterior: non-finite encoder output");
  if (!(scale.array() > 0.0).all()) throw ArgumentError("assemble_posterior: scale must be strictly positive");

  StructuredPosterior post;
  post.mu = mu;
  post.scale = scale;
  post.clique_sizes = q.clique_sizes;
  post.offsets = q.offsets;
  post.chol.resize(q.clique_sizes.size());
  for (std::size_t c = 0; c < q.clique_sizes.size(); ++c) {
    const int off = q.offsets[c];
    const int s = q.clique_sizes[c];
    post.chol[c].reserve(mu.cols());
    for (int k = 0; k < mu.cols(); ++k) {
      const Eigen::VectorXd sk = scale.col(k).segment(off, s);
      const Eigen::MatrixXd p = sk.asDiagonal() * q.blocks[c] * sk.asDiagonal();
      Eigen::LLT<Eigen::MatrixXd> llt(p);
      if (llt.info() != Eigen::Success) throw NumericError("assemble_posterior: Cholesky factorization failed");
      post.chol[c].push_back(llt.matrixU());
    }
  }
  return post;
}

Eigen::MatrixXd precision_block(const StructuredPosterior& post, const PriorPrecision& q, int clique, int dim) {
  const int off = q.offsets[clique];
  const int s = q.clique_sizes[clique];
  const Eigen::VectorXd sk = post.scale.col(dim).segment(off, s);
  return sk.asDiagonal() * q.blocks[clique] * sk.asDiagonal();
}

Eigen::MatrixXd sample(const StructuredPosterior& post, const Eigen::MatrixXd& noise) {
  require(noise.rows() == post.n() && noise.cols() == post.d(), "sample: noise shape does not match the posterior");
  Eigen::MatrixXd z = post.mu;
  for (std::size_t c = 0; c < post.chol.size(); ++c) {
    const int off = post.offsets[c];
    const int s = post.clique_sizes[c];
    for (int k = 0; k < post.d(); ++k) {
      const Eigen::VectorXd eps = noise.col(k).segment(off, s);
      z.col(k).segment(off, s) += post.chol[c][k].triangularView<Eigen::Upper>().solve(eps);
    }
  }
  return z;
}

Eigen::MatrixXd sample_mean_field(const StructuredPosterior& post, const PriorPrecision& q,
                                  const Eigen::MatrixXd& noise) {
  require(noise.rows() == post.n() && noise.cols() == post.d(), "sample: noise shape does not match the posterior");
  Eigen::MatrixXd z = post.mu;
  for (int i = 0; i < post.n(); ++i) {
    const double qii = q.q(i, i);
    for (int k = 0; k < post.d(); ++k) z(i, k) += noise(i, k) / (post.scale(i, k) * std::sqrt(qii));
  }
  return z;
}

double kl_divergence(const StructuredPosterior& post, const PriorPrecision& q) {
  double total = 0.0;
  for (std::size_t c = 0; c < post.chol.size(); ++c) {
    const int off = post.offsets[c];
    const int s = post.clique_sizes[c];
    const double logdet_q = 2.0 * q.chol[c].diagonal().array().log().sum();
    const Eigen::MatrixXd ct = q.chol[c].transpose();
    for (int k = 0; k < post.d(); ++k) {
      const Eigen::MatrixXd& r = post.chol[c][k];
      // tr(q P^-1) = ||R^-T C^T||_F^2 with q = C^T C and P = R^T R.
      const Eigen::MatrixXd m = r.transpose().triangularView<Eigen::Lower>().solve(ct);
      const double trace = m.squaredNorm();
      const Eigen::VectorXd mu = post.mu.col(k).segment(off, s);
      const double quad = mu.dot(q.blocks[c] * mu);
      const double logdet_p = 2.0 * r.diagonal().array().log().sum();
      total += 0.5 * (trace - s + quad + logdet_p - logdet_q);
    }
  }
  return total;
}

PosteriorGradient kl_gradient(const StructuredPosterior& post, const PriorPrecision& q) {
  PosteriorGradient g{Eigen::MatrixXd::Zero(post.n(), post.d()), Eigen::MatrixXd::Zero(post.n(), post.d())};
  for (std::size_t c = 0; c < post.chol.size(); ++c) {
    const int off = post.offsets[c];
    const int s = post.clique_sizes[c];
    for (int k = 0; k < post.d(); ++k) {
      const Eigen::VectorXd mu = post.mu.col(k).segment(off, s);
      g.mu.col(k).segment(off, s) = q.blocks[c] * mu;
      // With t = 1/s: tr(q P^-1) = t^T (q o q^-1) t, logdet P = 2 sum log s + const.
      const Eigen::VectorXd t = post.scale.col(k).segment(off, s).cwiseInverse();
      const Eigen::VectorXd ht = q.hadamard[c] * t;
      g.scale.col(k).segment(off, s) = t - t.cwiseProduct(t).cwiseProduct(ht);
    }
  }
  return g;
}

PosteriorGradient sample_backward(const StructuredPosterior& post, const Eigen::MatrixXd& z,
                                  const Eigen::MatrixXd& grad_z) {
  require(z.rows() == post.n() && z.cols() == post.d() && grad_z.rows() == post.n() && grad_z.cols() == post.d(),
          "sample_backward: shape mismatch");
  PosteriorGradient g;
  g.mu = grad_z;
  g.scale = -(grad_z.array() * (z - post.mu).array() / post.scale.array()).matrix();
  return g;
}

Eigen::MatrixXd effective_scale(const Eigen::MatrixXd& head, ScaleSemantics semantics) {
  if (semantics == ScaleSemantics::precision) return head;
  return head.array().rsqrt().matrix();
}

Eigen::MatrixXd effective_scale_backward(const Eigen::MatrixXd& head, const Eigen::MatrixXd& grad_scale,
                                         ScaleSemantics semantics) {
  if (semantics == ScaleSemantics::precision) return grad_scale;
  return (grad_scale.array() * (-0.5) * head.array().pow(-1.5)).matrix();
}

}  // namespace glbm
