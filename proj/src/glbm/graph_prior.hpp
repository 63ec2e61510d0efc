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

#include <vector>

#include <Eigen/Dense>

namespace glbm {

// Frames of one scene form a clique; the graph is a union of cliques laid out
// as consecutive index blocks.
struct AdjacencyMatrix {
  Eigen::MatrixXd a;
  std::vector<int> clique_sizes;

  int n() const { return static_cast<int>(a.rows()); }
};

struct Laplacian {
  Eigen::MatrixXd l;
  std::vector<int> clique_sizes;
};

// q = 2 L + lambda I, the per-latent-dimension prior precision. The full
// prior precision over frame-major latents is q (x) I_d.
struct PriorPrecision {
  Eigen::MatrixXd q;
  double lambda = 0.0;
  double logdet_q = 0.0;
  std::vector<int> clique_sizes;
  std::vector<int> offsets;              // first row of each clique block
  std::vector<Eigen::MatrixXd> blocks;   // q restricted to each clique
  std::vector<Eigen::MatrixXd> chol;     // upper Cholesky factor C with C^T C = block
  std::vector<Eigen::MatrixXd> hadamard; // block o block^-1, used by the KL gradient

  int n() const { return static_cast<int>(q.rows()); }
};

AdjacencyMatrix clique_adjacency(const std::vector<int>& clique_sizes);

// Block structure is taken from `adj.clique_sizes`; an adjacency without it is
// treated as a single block.
Laplacian laplacian(const AdjacencyMatrix& adj);

PriorPrecision prior_precision(const Laplacian& l, double lambda);

// clique_adjacency -> laplacian -> prior_precision.
PriorPrecision clique_prior(const std::vector<int>& clique_sizes, double lambda);

}  // namespace glbm
