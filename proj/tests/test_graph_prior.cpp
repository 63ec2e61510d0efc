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
#include "glbm/graph_prior.hpp"
#include "support.hpp"

TEST_CASE("graph prior: complete-graph laplacian is nI - 11^T per clique") {
  const auto adj = glbm::clique_adjacency({3, 2});
  CHECK(adj.n() == 5);
  CHECK(adj.a(0, 1) == 1.0);
  CHECK(adj.a(0, 3) == 0.0);
  CHECK(adj.a(2, 2) == 0.0);
  const auto lap = glbm::laplacian(adj);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(5, 5);
  expect.topLeftCorner(3, 3) = 3.0 * Eigen::MatrixXd::Identity(3, 3) - Eigen::MatrixXd::Ones(3, 3);
  expect.bottomRightCorner(2, 2) = 2.0 * Eigen::MatrixXd::Identity(2, 2) - Eigen::MatrixXd::Ones(2, 2);
  CHECK((lap.l - expect).norm() < 1e-14);
  CHECK((lap.l * Eigen::VectorXd::Ones(5)).norm() < 1e-14);
}

TEST_CASE("graph prior: q = 2L + lambda I with consistent factors") {
  const std::vector<int> sizes{4, 1, 3};
  const auto q = glbm::clique_prior(sizes, 0.7);
  CHECK((q.q - testsupport::dense_prior(sizes, 0.7)).norm() < 1e-12);
  CHECK(q.logdet_q == doctest::Approx(std::log(q.q.determinant())).epsilon(1e-10));
  CHECK(q.offsets == std::vector<int>{0, 4, 5});
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    CHECK((q.chol[c].transpose() * q.chol[c] - q.blocks[c]).norm() < 1e-12);
    const Eigen::MatrixXd had = q.blocks[c].cwiseProduct(q.blocks[c].inverse());
    CHECK((q.hadamard[c] - had).norm() < 1e-12);
  }
  // eigenvalues of a size-s clique block: lambda and 2s + lambda
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.blocks[0]);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.7));
  CHECK(es.eigenvalues()(3) == doctest::Approx(8.7));
}

TEST_CASE("graph prior: invalid input") {
  CHECK_THROWS_AS(glbm::clique_prior({3}, 0.0), glbm::ArgumentError);
  CHECK_THROWS_AS(glbm::clique_prior({3}, -1.0), glbm::ArgumentError);
  CHECK_THROWS_AS(glbm::clique_adjacency({2, 0}), glbm::ArgumentError);
  glbm::AdjacencyMatrix bare{Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3), {}};
  CHECK(glbm::laplacian(bare).clique_sizes == std::vector<int>{3});
}
