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

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glbm/tensor.hpp"

namespace glbm {

enum class Activation { relu, leaky_relu, elu, tanh };

Activation parse_activation(const std::string& s);
std::string to_string(Activation a);

struct ModelConfig {
  int height = 128;
  int width = 128;
  int image_channels = 3;
  std::vector<int> channels{32, 64, 128, 256, 256};
  int latent_dim = 32;
  Activation activation = Activation::leaky_relu;
  // Initial value of the scale head before any input dependence.
  double scale_init = 5.0;
  std::uint64_t seed = 0;

  int stages() const { return static_cast<int>(channels.size()); }
  int bottom_height() const { return height >> stages(); }
  int bottom_width() const { return width >> stages(); }
  // Throws ConfigError on inconsistent shape arithmetic.
  void validate() const;
};

// Lower bound on the precision-scale head.
inline constexpr double kScaleFloor = 1e-4;

template <typename T>
struct Param {
  std::string name;
  std::vector<int> shape;
  AlignedVector<T> value;
  AlignedVector<T> grad;
};

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
class Layer;

// Convolutional encoder (two heads: mean and precision scale) and decoder.
// Frames are processed independently; activations of the last training
// forward pass are kept for the matching backward pass.
template <typename T>
class Network {
 public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

  explicit Network(const ModelConfig& config);
  ~Network();
  Network(Network&&) noexcept;
  Network& operator=(Network&&) noexcept;
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  const ModelConfig& config() const { return config_; }

  std::vector<Param<T>>& params() { return params_; }
  const std::vector<Param<T>>& params() const { return params_; }
  Param<T>& param(const std::string& name);
  std::size_t parameter_count() const;

  struct Encoding {
    Matrix mu;     // [n x d]
    Matrix scale;  // [n x d], softplus + floor, strictly positive
  };

  Encoding encode(const Tensor4<T>& frames);
  // Accumulates parameter gradients from dL/dmu and dL/dscale.
  void encode_backward(const Matrix& grad_mu, const Matrix& grad_scale);

  Tensor4<T> decode(const Matrix& z);
  // Accumulates parameter gradients and returns dL/dz.
  Matrix decode_backward(const Tensor4<T>& grad_out);

  void zero_grad();

  template <typename U>
  Network<U> cast() const {
    Network<U> out(config_);
    for (std::size_t i = 0; i < params_.size(); ++i)
      out.params()[i].value.assign(params_[i].value.begin(), params_[i].value.end());
    return out;
  }

 private:
  int add_param(std::string name, std::vector<int> shape);

  ModelConfig config_;
  std::vector<Param<T>> params_;
  std::vector<std::unique_ptr<Layer<T>>> encoder_;
  std::vector<std::unique_ptr<Layer<T>>> decoder_;
  Matrix head_pre_;  // pre-softplus scale head of the last encode
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace glbm
