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

#include "glbm/network.hpp"

#include <cmath>
#include <random>

#include "glbm/error.hpp"

namespace glbm {

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "leaky_relu") return Activation::leaky_relu;
  if (s == "elu") return Activation::elu;
  if (s == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + s + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::elu: return "elu";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

void ModelConfig::validate() const {
  if (channels.empty()) throw ConfigError("model.channels must name at least one stage");
  for (int c : channels)
    if (c < 1) throw ConfigError("model.channels entries must be positive");
  if (latent_dim < 1) throw ConfigError("model.latent_dim must be >= 1");
  if (image_channels != 1 && image_channels != 3) throw ConfigError("image channels must be 1 or 3");
  if (height < 1 || width < 1) throw ConfigError("input size must be positive");
  if (!(scale_init > 2 * kScaleFloor) || !std::isfinite(scale_init)) throw ConfigError("model.scale_init must be a positive finite number");
  const int div = 1 << stages();
  if (height % div != 0 || width % div != 0)
    throw ConfigError("input size " + std::to_string(height) + "x" + std::to_string(width) + " is not divisible by 2^" +
                      std::to_string(stages()));
}

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor4<T> forward(const Tensor4<T>& in, const std::vector<Param<T>>& params) = 0;
  virtual Tensor4<T> backward(const Tensor4<T>& grad_out, std::vector<Param<T>>& params) = 0;
};

namespace {

constexpr double kLeakySlope = 0.2;

template <typename T>
using MapRow = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMapRow = Eigen::Map<const RowMatrix<T>>;

template <typename T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(int in_c, int out_c, int kernel, int stride, int w_idx, int b_idx)
      : in_c_(in_c), out_c_(out_c), k_(kernel), stride_(stride), pad_(kernel / 2), w_(w_idx), b_(b_idx) {}

  Tensor4<T> forward(const Tensor4<T>& in, const std::vector<Param<T>>& params) override {
    input_ = in;
    const int oh = (in.h + 2 * pad_ - k_) / stride_ + 1;
    const int ow = (in.w + 2 * pad_ - k_) / stride_ + 1;
    Tensor4<T> out(in.n, out_c_, oh, ow);
    const int kdim = in_c_ * k_ * k_;
    RowMatrix<T> cols(kdim, oh * ow);
    ConstMapRow<T> weight(params[w_].value.data(), out_c_, kdim);
    const Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias(params[b_].value.data(), out_c_);
    for (int i = 0; i < in.n; ++i) {
      im2col(in.sample(i), in.h, in.w, oh, ow, cols);
      MapRow<T> y(out.sample(i), out_c_, oh * ow);
      y.noalias() = weight * cols;
      y.colwise() += bias;
    }
    return out;
  }

  Tensor4<T> backward(const Tensor4<T>& grad_out, std::vector<Param<T>>& params) override {
    const Tensor4<T>& in = input_;
    const int oh = grad_out.h;
    const int ow = grad_out.w;
    const int kdim = in_c_ * k_ * k_;
    Tensor4<T> grad_in(in.n, in.c, in.h, in.w);
    RowMatrix<T> cols(kdim, oh * ow);
    RowMatrix<T> dcols(kdim, oh * ow);
    ConstMapRow<T> weight(params[w_].value.data(), out_c_, kdim);
    MapRow<T> dweight(params[w_].grad.data(), out_c_, kdim);
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> dbias(params[b_].grad.data(), out_c_);
    for (int i = 0; i < in.n; ++i) {
      im2col(in.sample(i), in.h, in.w, oh, ow, cols);
      ConstMapRow<T> dy(grad_out.sample(i), out_c_, oh * ow);
      dweight.noalias() += dy * cols.transpose();
      dbias += dy.rowwise().sum();
      dcols.noalias() = weight.transpose() * dy;
      col2im(dcols, in.h, in.w, oh, ow, grad_in.sample(i));
    }
    return grad_in;
  }

 private:
  void im2col(const T* src, int h, int w, int oh, int ow, RowMatrix<T>& cols) const {
    for (int c = 0; c < in_c_; ++c)
      for (int ky = 0; ky < k_; ++ky)
        for (int kx = 0; kx < k_; ++kx) {
          T* row = cols.data() + static_cast<std::size_t>((c * k_ + ky) * k_ + kx) * oh * ow;
          const T* plane = src + static_cast<std::size_t>(c) * h * w;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride_ + ky - pad_;
            T* dst = row + static_cast<std::size_t>(oy) * ow;
            if (iy < 0 || iy >= h) {
              std::fill(dst, dst + ow, T(0));
              continue;
            }
            const T* line = plane + static_cast<std::size_t>(iy) * w;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride_ + kx - pad_;
              dst[ox] = (ix >= 0 && ix < w) ? line[ix] : T(0);
            }
          }
        }
  }

  void col2im(const RowMatrix<T>& cols, int h, int w, int oh, int ow, T* dst) const {
    for (int c = 0; c < in_c_; ++c)
      for (int ky = 0; ky < k_; ++ky)
        for (int kx = 0; kx < k_; ++kx) {
          const T* row = cols.data() + static_cast<std::size_t>((c * k_ + ky) * k_ + kx) * oh * ow;
          T* plane = dst + static_cast<std::size_t>(c) * h * w;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride_ + ky - pad_;
            if (iy < 0 || iy >= h) continue;
            T* line = plane + static_cast<std::size_t>(iy) * w;
            const T* src = row + static_cast<std::size_t>(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride_ + kx - pad_;
              if (ix >= 0 && ix < w) line[ix] += src[ox];
            }
          }
        }
  }

  int in_c_, out_c_, k_, stride_, pad_, w_, b_;
  Tensor4<T> input_;
};

template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(int in_f, int out_f, int w_idx, int b_idx) : in_(in_f), out_(out_f), w_(w_idx), b_(b_idx) {}

  Tensor4<T> forward(const Tensor4<T>& in, const std::vector<Param<T>>& params) override {
    require(static_cast<int>(in.sample_size()) == in_, "dense layer: feature count mismatch");
    input_ = in;
    Tensor4<T> out(in.n, out_, 1, 1);
    ConstMapRow<T> x(in.data.data(), in.n, in_);
    ConstMapRow<T> weight(params[w_].value.data(), out_, in_);
    const Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bias(params[b_].value.data(), out_);
    MapRow<T> y(out.data.data(), in.n, out_);
    y.noalias() = x * weight.transpose();
    y.rowwise() += bias;
    return out;
  }

  Tensor4<T> backward(const Tensor4<T>& grad_out, std::vector<Param<T>>& params) override {
    Tensor4<T> grad_in(input_.n, input_.c, input_.h, input_.w);
    ConstMapRow<T> x(input_.data.data(), input_.n, in_);
    ConstMapRow<T> dy(grad_out.data.data(), grad_out.n, out_);
    ConstMapRow<T> weight(params[w_].value.data(), out_, in_);
    MapRow<T> dweight(params[w_].grad.data(), out_, in_);
    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> dbias(params[b_].grad.data(), out_);
    dweight.noalias() += dy.transpose() * x;
    dbias += dy.colwise().sum();
    MapRow<T> dx(grad_in.data.data(), input_.n, in_);
    dx.noalias() = dy * weight;
    return grad_in;
  }

 private:
  int in_, out_, w_, b_;
  Tensor4<T> input_;
};

template <typename T>
class Reshape final : public Layer<T> {
 public:
  Reshape(int c, int h, int w) : c_(c), h_(h), w_(w) {}

  Tensor4<T> forward(const Tensor4<T>& in, const std::vector<Param<T>>&) override {
    require(in.sample_size() == static_cast<std::size_t>(c_) * h_ * w_, "reshape: element count mismatch");
    in_c_ = in.c;
    in_h_ = in.h;
    in_w_ = in.w;
    Tensor4<T> out = in;
    out.c = c_;
    out.h = h_;
    out.w = w_;
    return out;
  }

  Tensor4<T> backward(const Tensor4<T>& grad_out, std::vector<Param<T>>&) override {
    Tensor4<T> g = grad_out;
    g.c = in_c_;
    g.h = in_h_;
    g.w = in_w_;
    return g;
  }

 private:
  int c_, h_, w_;
  int in_c_ = 0, in_h_ = 0, in_w_ = 0;
};

template <typename T>
class Upsample2x final : public Layer<T> {
 public:
  Tensor4<T> forward(const Tensor4<T>& in, const std::vector<Param<T>>&) override {
    Tensor4<T> out(in.n, in.c, in.h * 2, in.w * 2);
    for (int i = 0; i < in.n; ++i)
      for (int c = 0; c < in.c; ++c)
        for (int y = 0; y < out.h; ++y) {
          const T* src = &in.data[((static_cast<std::size_t>(i) * in.c + c) * in.h + y / 2) * in.w];
          T* dst = &out.at(i, c, y, 0);
          for (int x = 0; x < out.w; ++x) dst[x] = src[x / 2];
        }
    return out;
  }

  Tensor4<T> backward(const Tensor4<T>& grad_out, std::vector<Param<T>>&) override {
    Tensor4<T> g(grad_out.n, grad_out.c, grad_out.h / 2, grad_out.w / 2);
    for (int i = 0; i < grad_out.n; ++i)
      for (int c = 0; c < grad_out.c; ++c)
        for (int y = 0; y < grad_out.h; ++y) {
          const T* src = &grad_out.data[((static_cast<std::size_t>(i) * grad_out.c + c) * grad_out.h + y) * grad_out.w];
          T* dst = &g.at(i, c, y / 2, 0);
          for (int x = 0; x < grad_out.w; ++x) dst[x / 2] += src[x];
        }
    return g;
  }
};

enum class Pointwise { relu, leaky_relu, elu, tanh, sigmoid };

template <typename T>
class PointwiseLayer final : public Layer<T> {
 public:
  explicit PointwiseLayer(Pointwise kind) : kind_(kind) {}

  Tensor4<T> forward(const Tensor4<T>& in, const std::vector<Param<T>>&) override {
    Tensor4<T> out = in;
    for (auto& v : out.data) {
      switch (kind_) {
        case Pointwise::relu: v = v > T(0) ? v : T(0); break;
        case Pointwise::leaky_relu: v = v > T(0) ? v : T(kLeakySlope) * v; break;
        case Pointwise::elu: v = v > T(0) ? v : std::expm1(v); break;
        case Pointwise::tanh: v = std::tanh(v); break;
        case Pointwise::sigmoid: v = T(1) / (T(1) + std::exp(-v)); break;
      }
    }
    output_ = out;
    return out;
  }

  Tensor4<T> backward(const Tensor4<T>& grad_out, std::vector<Param<T>>&) override {
    Tensor4<T> g = grad_out;
    for (std::size_t k = 0; k < g.data.size(); ++k) {
      const T y = output_.data[k];
      T d = T(1);
      switch (kind_) {
        case Pointwise::relu: d = y > T(0) ? T(1) : T(0); break;
        case Pointwise::leaky_relu: d = y > T(0) ? T(1) : T(kLeakySlope); break;
        case Pointwise::elu: d = y > T(0) ? T(1) : y + T(1); break;
        case Pointwise::tanh: d = T(1) - y * y; break;
        case Pointwise::sigmoid: d = y * (T(1) - y); break;
      }
      g.data[k] *= d;
    }
    return g;
  }

 private:
  Pointwise kind_;
  Tensor4<T> output_;
};

Pointwise to_pointwise(Activation a) {
  switch (a) {
    case Activation::relu: return Pointwise::relu;
    case Activation::leaky_relu: return Pointwise::leaky_relu;
    case Activation::elu: return Pointwise::elu;
    case Activation::tanh: return Pointwise::tanh;
  }
  return Pointwise::relu;
}

double init_gain(Activation a) { return a == Activation::tanh ? 1.0 : std::sqrt(2.0); }

template <typename T>
T softplus(T a) {
  return std::max(a, T(0)) + std::log1p(std::exp(-std::abs(a)));
}

template <typename T>
T logistic(T a) {
  return T(1) / (T(1) + std::exp(-a));
}

template <typename T>
Tensor4<T> run_forward(std::vector<std::unique_ptr<Layer<T>>>& layers, Tensor4<T> x,
                       const std::vector<Param<T>>& params) {
  for (auto& layer : layers) x = layer->forward(x, params);
  return x;
}

template <typename T>
Tensor4<T> run_backward(std::vector<std::unique_ptr<Layer<T>>>& layers, Tensor4<T> g, std::vector<Param<T>>& params) {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) g = (*it)->backward(g, params);
  return g;
}

}  // namespace

template <typename T>
Network<T>::Network(const ModelConfig& config) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  const auto act = to_pointwise(config_.activation);
  const int d = config_.latent_dim;
  const int stages = config_.stages();
  std::vector<int> chans{config_.image_channels};
  chans.insert(chans.end(), config_.channels.begin(), config_.channels.end());

  // Parameters are drawn in declaration order from one generator so that the
  // same seed yields the same network for every scalar type.
  const auto init = [&](int idx, int fan_in, double gain) {
    std::normal_distribution<double> normal(0.0, gain / std::sqrt(static_cast<double>(fan_in)));
    for (auto& v : params_[idx].value) v = static_cast<T>(normal(rng));
  };

  for (int s = 0; s < stages; ++s) {
    const std::string base = "enc.conv" + std::to_string(s);
    const int fan_in = chans[s] * 9;
    const int w = add_param(base + ".weight", {chans[s + 1], chans[s], 3, 3});
    const int b = add_param(base + ".bias", {chans[s + 1]});
    init(w, fan_in, init_gain(config_.activation));
    encoder_.push_back(std::make_unique<Conv2d<T>>(chans[s], chans[s + 1], 3, 2, w, b));
    encoder_.push_back(std::make_unique<PointwiseLayer<T>>(act));
  }
  const int flat = chans.back() * config_.bottom_height() * config_.bottom_width();
  {
    const int w = add_param("enc.dense.weight", {2 * d, flat});
    const int b = add_param("enc.dense.bias", {2 * d});
    init(w, flat, 1.0);
    const double pre = std::log(std::expm1(config_.scale_init - kScaleFloor));
    for (int k = d; k < 2 * d; ++k) params_[b].value[k] = static_cast<T>(pre);
    encoder_.push_back(std::make_unique<Dense<T>>(flat, 2 * d, w, b));
  }

  {
    const int w = add_param("dec.dense.weight", {flat, d});
    const int b = add_param("dec.dense.bias", {flat});
    init(w, d, init_gain(config_.activation));
    decoder_.push_back(std::make_unique<Dense<T>>(d, flat, w, b));
    decoder_.push_back(std::make_unique<PointwiseLayer<T>>(act));
    decoder_.push_back(
        std::make_unique<Reshape<T>>(chans.back(), config_.bottom_height(), config_.bottom_width()));
  }
  for (int s = stages - 1; s >= 0; --s) {
    const std::string base = "dec.conv" + std::to_string(s);
    const int fan_in = chans[s + 1] * 9;
    const int w = add_param(base + ".weight", {chans[s], chans[s + 1], 3, 3});
    const int b = add_param(base + ".bias", {chans[s]});
    init(w, fan_in, s > 0 ? init_gain(config_.activation) : 1.0);
    decoder_.push_back(std::make_unique<Upsample2x<T>>());
    decoder_.push_back(std::make_unique<Conv2d<T>>(chans[s + 1], chans[s], 3, 1, w, b));
    decoder_.push_back(std::make_unique<PointwiseLayer<T>>(s > 0 ? act : Pointwise::sigmoid));
  }
}

template <typename T>
Network<T>::~Network() = default;
template <typename T>
Network<T>::Network(Network&&) noexcept = default;
template <typename T>
Network<T>& Network<T>::operator=(Network&&) noexcept = default;

template <typename T>
int Network<T>::add_param(std::string name, std::vector<int> shape) {
  std::size_t count = 1;
  for (int s : shape) count *= static_cast<std::size_t>(s);
  params_.push_back(Param<T>{std::move(name), std::move(shape), AlignedVector<T>(count, T(0)), AlignedVector<T>(count, T(0))});
  return static_cast<int>(params_.size()) - 1;
}

template <typename T>
Param<T>& Network<T>::param(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return p;
  throw ArgumentError("no parameter named '" + name + "'");
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <typename T>
typename Network<T>::Encoding Network<T>::encode(const Tensor4<T>& frames) {
  if (frames.c != config_.image_channels || frames.h != config_.height || frames.w != config_.width)
    throw ArgumentError("encode: frames are " + std::to_string(frames.c) + "x" + std::to_string(frames.h) + "x" +
                        std::to_string(frames.w) + ", model expects " + std::to_string(config_.image_channels) + "x" +
                        std::to_string(config_.height) + "x" + std::to_string(config_.width));
  require(frames.n >= 1, "encode: empty clip");
  const Tensor4<T> out = run_forward(encoder_, frames, params_);
  const int d = config_.latent_dim;
  Encoding enc{Matrix(frames.n, d), Matrix(frames.n, d)};
  head_pre_.resize(frames.n, d);
  for (int i = 0; i < frames.n; ++i)
    for (int k = 0; k < d; ++k) {
      enc.mu(i, k) = out.data[static_cast<std::size_t>(i) * 2 * d + k];
      const T pre = out.data[static_cast<std::size_t>(i) * 2 * d + d + k];
      head_pre_(i, k) = pre;
      enc.scale(i, k) = softplus(pre) + T(kScaleFloor);
    }
  return enc;
}

template <typename T>
void Network<T>::encode_backward(const Matrix& grad_mu, const Matrix& grad_scale) {
  const int n = static_cast<int>(head_pre_.rows());
  const int d = config_.latent_dim;
  require(grad_mu.rows() == n && grad_mu.cols() == d && grad_scale.rows() == n && grad_scale.cols() == d,
          "encode_backward: gradient shape mismatch");
  Tensor4<T> g(n, 2 * d, 1, 1);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) {
      g.data[static_cast<std::size_t>(i) * 2 * d + k] = grad_mu(i, k);
      g.data[static_cast<std::size_t>(i) * 2 * d + d + k] = grad_scale(i, k) * logistic(head_pre_(i, k));
    }
  run_backward(encoder_, std::move(g), params_);
}

template <typename T>
Tensor4<T> Network<T>::decode(const Matrix& z) {
  require(z.cols() == config_.latent_dim && z.rows() >= 1,
          "decode: latent matrix must be [n x " + std::to_string(config_.latent_dim) + "]");
  Tensor4<T> x(static_cast<int>(z.rows()), config_.latent_dim, 1, 1);
  for (int i = 0; i < z.rows(); ++i)
    for (int k = 0; k < z.cols(); ++k) x.data[static_cast<std::size_t>(i) * z.cols() + k] = z(i, k);
  return run_forward(decoder_, std::move(x), params_);
}

template <typename T>
typename Network<T>::Matrix Network<T>::decode_backward(const Tensor4<T>& grad_out) {
  const Tensor4<T> g = run_backward(decoder_, grad_out, params_);
  Matrix dz(g.n, config_.latent_dim);
  for (int i = 0; i < g.n; ++i)
    for (int k = 0; k < config_.latent_dim; ++k) dz(i, k) = g.data[static_cast<std::size_t>(i) * config_.latent_dim + k];
  return dz;
}

template <typename T>
void Network<T>::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), T(0));
}

template class Network<float>;
template class Network<double>;

}  // namespace glbm
