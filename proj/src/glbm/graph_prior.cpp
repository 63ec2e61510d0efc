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

#include "glbm/graph_prior.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "glbm/error.hpp"

namespace glbm {

AdjacencyMatrix clique_adjacency(const std::vector<int>& clique_sizes) {
  require(!clique_sizes.empty(), "clique_adjacency: no cliques");
  for (int s : clique_sizes) require(s >= 1, "clique_adjacency: clique size must be >= 1, got " + std::to_string(s));
  const int n = std::accumulate(clique_sizes.begin(), clique_sizes.end(), 0);
  AdjacencyMatrix adj{Eigen::MatrixXd::Zero(n, n), clique_sizes};
  int offset = 0;
  for (int s : clique_sizes) {
    adj.a.block(offset, offset, s, s).setOnes();
    adj.a.block(offset, offset, s, s).diagonal().setZero();
    offset += s;
  }
  return adj;
}

Laplacian laplacian(const AdjacencyMatrix& adj) {
  require(adj.a.rows() == adj.a.cols(), "laplacian: adjacency must be square");
  Laplacian out;
  out.l = -adj.a;
  out.l.diagonal() = adj.a.rowwise().sum();
  out.clique_sizes = adj.clique_sizes.empty() ? std::vector<int>{adj.n()} : adj.clique_sizes;
  return out;
}

PriorPrecision prior_precision(const Laplacian& l, double lambda) {
  if (!(lambda > 0.0))
    throw ArgumentError("prior_precision: lambda must be positive (the unregularized Laplacian is singular)");
  const int n = static_cast<int>(l.l.rows());
  PriorPrecision p;
  p.q = 2.0 * l.l + lambda * Eigen::MatrixXd::Identity(n, n);
  p.lambda = lambda;
  p.clique_sizes = l.clique_sizes.empty() ? std::vector<int>{n} : l.clique_sizes;
  require(std::accumulate(p.clique_sizes.begin(), p.clique_sizes.end(), 0) == n,
          "prior_precision: clique sizes do not cover the Laplacian");

  int offset = 0;
  for (int s : p.clique_sizes) {
    p.offsets.push_back(offset);
    Eigen::MatrixXd block = p.q.block(offset, offset, s, s);
    Eigen::LLT<Eigen::MatrixXd> llt(block);
    if (llt.info() != Eigen::Success) throw NumericError("prior_precision: Cholesky factorization failed");
    Eigen::MatrixXd upper = llt.matrixU();
    p.logdet_q += 2.0 * upper.diagonal().array().log().sum();
    const Eigen::MatrixXd inverse = llt.solve(Eigen::MatrixXd::Identity(s, s));
    p.hadamard.push_back(block.cwiseProduct(inverse));
    p.blocks.push_back(std::move(block));
    p.chol.push_back(std::move(upper));
    offset += s;
  }
  return p;
}

PriorPrecision clique_prior(const std::vector<int>& clique_sizes, double lambda) {
  return prior_precision(laplacian(clique_adjacency(clique_sizes)), lambda);
}

}  // namespace glbm
