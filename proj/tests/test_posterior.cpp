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

#include "glbm/error.hpp"
#include "glbm/posterior.hpp"
#include "support.hpp"

using testsupport::rel_err;

namespace {

struct Instance {
  std::vector<int> cliques;
  Eigen::MatrixXd mu, scale;
  glbm::PriorPrecision q;
};

Instance make(std::mt19937_64& rng, std::vector<int> cliques, int d, double lambda = 1.0) {
  Instance in;
  in.cliques = cliques;
  int n = 0;
  for (int c : cliques) n += c;
  in.mu = testsupport::random_matrix(rng, n, d);
  in.scale = testsupport::random_matrix(rng, n, d, 0.3, 2.0);
  in.q = glbm::clique_prior(cliques, lambda);
  return in;
}

}  // namespace

TEST_CASE("posterior: precision blocks are diag(s) q diag(s)") {
  std::mt19937_64 rng(1);
  const Instance in = make(rng, {3, 2}, 2);
  const auto post = glbm::assemble_posterior(in.mu, in.scale, in.q);
  for (int c = 0; c < 2; ++c)
    for (int k = 0; k < 2; ++k) {
      const Eigen::MatrixXd p = glbm::precision_block(post, in.q, c, k);
      const int off = in.q.offsets[c];
      for (int i = 0; i < in.cliques[c]; ++i)
        for (int j = 0; j < in.cliques[c]; ++j)
          CHECK(p(i, j) == doctest::Approx(in.scale(off + i, k) * in.q.q(off + i, off + j) * in.scale(off + j, k)));
      CHECK((post.chol[c][k].transpose() * post.chol[c][k] - p).norm() < 1e-12);
    }
}

TEST_CASE("posterior: KL matches the dense oracle and is zero at the prior") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const Instance in = make(rng, {2, 3, 1}, 3, 0.5 + t * 0.2);
    const auto post = glbm::assemble_posterior(in.mu, in.scale, in.q);
    CHECK(rel_err(glbm::kl_divergence(post, in.q), testsupport::dense_kl(in.mu, in.scale, in.q.q)) < 1e-9);
  }
  const auto q = glbm::clique_prior({4}, 1.0);
  const auto prior = glbm::assemble_posterior(Eigen::MatrixXd::Zero(4, 2), Eigen::MatrixXd::Ones(4, 2), q);
  CHECK(std::abs(glbm::kl_divergence(prior, q)) < 1e-12);
}

TEST_CASE("posterior: KL gradient matches central differences") {
  std::mt19937_64 rng(3);
  Instance in = make(rng, {3, 2}, 2);
  const auto post = glbm::assemble_posterior(in.mu, in.scale, in.q);
  const auto g = glbm::kl_gradient(post, in.q);
  auto f = [&] { return glbm::kl_divergence(glbm::assemble_posterior(in.mu, in.scale, in.q), in.q); };
  for (int i = 0; i < in.mu.rows(); ++i)
    for (int k = 0; k < in.mu.cols(); ++k) {
      CHECK(rel_err(testsupport::central_diff(f, in.mu(i, k), 1e-5), g.mu(i, k)) < 1e-6);
      CHECK(rel_err(testsupport::central_diff(f, in.scale(i, k), 1e-5), g.scale(i, k)) < 1e-6);
    }
}

TEST_CASE("posterior: reparameterization gradients") {
  std::mt19937_64 rng(4);
  Instance in = make(rng, {3, 3}, 2);
  const Eigen::MatrixXd noise = testsupport::gaussian_matrix(rng, 6, 2);
  const Eigen::MatrixXd w = testsupport::random_matrix(rng, 6, 2);
  for (auto mode : {glbm::SamplingMode::structured, glbm::SamplingMode::mean_field}) {
    auto draw = [&] {
      const auto p = glbm::assemble_posterior(in.mu, in.scale, in.q);
      return mode == glbm::SamplingMode::structured ? glbm::sample(p, noise) : glbm::sample_mean_field(p, in.q, noise);
    };
    auto f = [&] { return draw().cwiseProduct(w).sum(); };
    const auto post = glbm::assemble_posterior(in.mu, in.scale, in.q);
    const auto g = glbm::sample_backward(post, draw(), w);
    for (int i = 0; i < 6; ++i)
      for (int k = 0; k < 2; ++k) {
        CHECK(rel_err(testsupport::central_diff(f, in.mu(i, k), 1e-6), g.mu(i, k)) < 1e-6);
        CHECK(rel_err(testsupport::central_diff(f, in.scale(i, k), 1e-6), g.scale(i, k)) < 1e-5);
      }
  }
}

TEST_CASE("posterior: variance semantics map and its derivative") {
  Eigen::MatrixXd h(2, 2);
  h << 4.0, 0.25, 1.0, 9.0;
  const Eigen::MatrixXd s = glbm::effective_scale(h, glbm::ScaleSemantics::variance);
  CHECK(s(0, 0) == doctest::Approx(0.5));
  CHECK(s(0, 1) == doctest::Approx(2.0));
  CHECK(glbm::effective_scale(h, glbm::ScaleSemantics::precision) == h);
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
  const Eigen::MatrixXd g = glbm::effective_scale_backward(h, ones, glbm::ScaleSemantics::variance);
  auto f = [&] { return glbm::effective_scale(h, glbm::ScaleSemantics::variance).sum(); };
  CHECK(rel_err(testsupport::central_diff(f, h(1, 1), 1e-6), g(1, 1)) < 1e-7);
}

TEST_CASE("posterior: invalid inputs") {
  const auto q = glbm::clique_prior({2}, 1.0);
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(2, 1);
  Eigen::MatrixXd s = Eigen::MatrixXd::Ones(2, 1);
  s(1, 0) = 0.0;
  CHECK_THROWS_AS(glbm::assemble_posterior(mu, s, q), glbm::ArgumentError);
  s(1, 0) = 1.0;
  mu(0, 0) = std::nan("");
  CHECK_THROWS_AS(glbm::assemble_posterior(mu, s, q), glbm::NumericError);
  CHECK_THROWS_AS(glbm::assemble_posterior(Eigen::MatrixXd::Zero(3, 1), Eigen::MatrixXd::Ones(3, 1), q),
                  glbm::ArgumentError);
  CHECK_THROWS_AS(glbm::parse_sampling_mode("gibbs"), glbm::ArgumentError);
}
