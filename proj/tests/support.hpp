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

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glbm/graph_prior.hpp"
#include "glbm/image_io.hpp"
#include "glbm/posterior.hpp"
#include "glbm/tensor.hpp"

namespace testsupport {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

inline Eigen::MatrixXd gaussian_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// Dense q from scratch: complete graph per clique, L = D - A, q = 2L + lambda I.
inline Eigen::MatrixXd dense_prior(const std::vector<int>& cliques, double lambda) {
  int n = 0;
  for (int c : cliques) n += c;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  int off = 0;
  for (int c : cliques) {
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < c; ++j)
        if (i != j) a(off + i, off + j) = 1.0;
    off += c;
  }
  Eigen::MatrixXd l = -a;
  for (int i = 0; i < n; ++i) l(i, i) = a.row(i).sum();
  return 2.0 * l + lambda * Eigen::MatrixXd::Identity(n, n);
}

// KL between N(mu, P^-1) and N(0, Q^-1) over the flattened nd vector, index
// i * d + k, using explicit covariance matrices.
inline double dense_kl(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& scale, const Eigen::MatrixXd& q) {
  const int n = static_cast<int>(mu.rows());
  const int d = static_cast<int>(mu.cols());
  const int nd = n * d;
  Eigen::MatrixXd big_p = Eigen::MatrixXd::Zero(nd, nd);
  Eigen::MatrixXd big_q = Eigen::MatrixXd::Zero(nd, nd);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < d; ++k) {
        big_q(i * d + k, j * d + k) = q(i, j);
        big_p(i * d + k, j * d + k) = scale(i, k) * q(i, j) * scale(j, k);
      }
  const Eigen::MatrixXd sigma1 = big_p.inverse();
  const Eigen::MatrixXd sigma0 = big_q.inverse();
  Eigen::VectorXd m(nd);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) m(i * d + k) = mu(i, k);
  const double trace = (sigma0.inverse() * sigma1).trace();
  const double quad = m.dot(sigma0.inverse() * m);
  const double logdet0 = std::log(sigma0.determinant());
  const double logdet1 = std::log(sigma1.determinant());
  return 0.5 * (trace + quad - nd + logdet0 - logdet1);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12}); }

// Central difference of f along element `x(i)`.
inline double central_diff(const std::function<double()>& f, double& x, double h) {
  const double keep = x;
  x = keep + h;
  const double up = f();
  x = keep - h;
  const double down = f();
  x = keep;
  return (up - down) / (2.0 * h);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("glbm-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline glbm::Image solid(int h, int w, int c, std::uint8_t v) { return glbm::Image(h, w, c, v); }

}  // namespace testsupport
