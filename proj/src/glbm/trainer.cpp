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

#include "glbm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "glbm/checkpoint.hpp"
#include "glbm/error.hpp"
#include "glbm/flow_mask.hpp"

namespace fs = std::filesystem;

namespace glbm {

LrSchedule parse_lr_schedule(const std::string& s) {
  if (s == "none") return LrSchedule::none;
  if (s == "step") return LrSchedule::step;
  if (s == "plateau") return LrSchedule::plateau;
  throw ArgumentError("unknown learning-rate schedule '" + s + "'");
}

std::string to_string(LrSchedule s) {
  switch (s) {
    case LrSchedule::none: return "none";
    case LrSchedule::step: return "step";
    case LrSchedule::plateau: return "plateau";
  }
  return "none";
}

void TrainConfig::validate() const {
  if (optimizer != "adam") throw ConfigError("unsupported optimizer '" + optimizer + "'");
  if (epochs < 1) throw ConfigError("train.epochs must be positive");
  if (clips_per_batch < 1 || clip_len < 1) throw ConfigError("train.clips_per_batch and train.clip_len must be positive");
  if (steps_per_epoch < 0) throw ConfigError("train.steps_per_epoch must be nonnegative");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be positive");
  if (!(lr_factor > 0.0 && lr_factor <= 1.0)) throw ConfigError("train.lr_factor must lie in (0, 1]");
  if (lr_patience < 1 || lr_step < 1) throw ConfigError("train.lr_patience and train.lr_step must be positive");
  if (lr_min < 0.0) throw ConfigError("train.lr_min must be nonnegative");
  if (!(grad_clip_norm > 0.0)) throw ConfigError("train.grad_clip_norm must be positive");
  if (save_every < 0) throw ConfigError("train.save_every must be nonnegative");
  if (!(lambda > 0.0)) throw ConfigError("prior.lambda must be positive");
  if (weights.alpha < 0.0 || weights.beta < 0.0 || weights.kl_weight < 0.0)
    throw ConfigError("loss weights must be nonnegative");
  if (prefetch < 0) throw ConfigError("dataset.prefetch must be nonnegative");
}

std::string TrainLog::format(const TrainRecord& r) {
  char buf[384];
  std::snprintf(buf, sizeof buf,
                "epoch=%d step=%ld total=%.8g recon=%.8g kl=%.8g sparsity=%.8g nuclear=%.8g lr=%.6g "
                "grad_norm=%.6g clipped_norm=%.6g cliques=%d wall=%.3f",
                r.epoch, r.step, r.loss.total, r.loss.recon, r.loss.kl, r.loss.sparsity, r.loss.nuclear,
                r.learning_rate, r.grad_norm, r.clipped_norm, r.cliques, r.wall_seconds);
  return buf;
}

std::string TrainLog::to_text() const {
  std::string out;
  for (const auto& r : records) out += format(r) + '\n';
  return out;
}

double TrainLog::last_epoch_mean(const std::function<double(const TrainRecord&)>& field) const {
  if (records.empty()) return 0.0;
  const int last = records.back().epoch;
  double sum = 0.0;
  int count = 0;
  for (const auto& r : records)
    if (r.epoch == last) {
      sum += field(r);
      ++count;
    }
  return sum / count;
}

namespace {

template <typename T>
struct Forward {
  typename Network<T>::Encoding enc;
  Eigen::MatrixXd head;
  StructuredPosterior post;
  PriorPrecision q;
  Eigen::MatrixXd z;
  Tensor4<T> recon;
};

template <typename T>
Forward<T> forward(Network<T>& net, const Tensor4<T>& frames, const std::vector<int>& clique_sizes,
                   const Eigen::MatrixXd& noise, const StepOptions& opts) {
  Forward<T> f;
  f.q = clique_prior(clique_sizes, opts.lambda);
  require(f.q.n() == frames.n, "train_step: clique sizes do not add up to the frame count");
  require(noise.rows() == frames.n && noise.cols() == net.config().latent_dim, "train_step: noise has the wrong shape");
  f.enc = net.encode(frames);
  f.head = f.enc.scale.template cast<double>();
  f.post = assemble_posterior(f.enc.mu.template cast<double>(), effective_scale(f.head, opts.scale_semantics), f.q);
  f.z = opts.sampling == SamplingMode::structured ? sample(f.post, noise) : sample_mean_field(f.post, f.q, noise);
  f.recon = net.decode(f.z.template cast<T>());
  return f;
}

}  // namespace

template <typename T>
LossBreakdown train_step(Network<T>& net, const Tensor4<T>& frames, const std::vector<int>& clique_sizes,
                         const MaskStack& moving, const Eigen::MatrixXd& noise, const StepOptions& opts) {
  using Matrix = typename Network<T>::Matrix;
  Forward<T> f = forward(net, frames, clique_sizes, noise, opts);
  LossGradients<T> g;
  const LossBreakdown loss = total_loss(frames, f.recon, f.post, f.q, moving, opts.weights, &g);
  const Eigen::MatrixXd dz = net.decode_backward(g.recon).template cast<double>();
  const PosteriorGradient through_z = sample_backward(f.post, f.z, dz);
  const Eigen::MatrixXd dmu = g.mu + through_z.mu;
  const Eigen::MatrixXd dscale = g.scale + through_z.scale;
  const Eigen::MatrixXd dhead = effective_scale_backward(f.head, dscale, opts.scale_semantics);
  const Matrix gmu = dmu.cast<T>();
  const Matrix ghead = dhead.cast<T>();
  net.encode_backward(gmu, ghead);
  return loss;
}

template <typename T>
LossBreakdown evaluate_loss(Network<T>& net, const Tensor4<T>& frames, const std::vector<int>& clique_sizes,
                            const MaskStack& moving, const Eigen::MatrixXd& noise, const StepOptions& opts) {
  Forward<T> f = forward(net, frames, clique_sizes, noise, opts);
  return total_loss(frames, f.recon, f.post, f.q, moving, opts.weights);
}

double mean_clique_nuclear(Network<float>& net, const Tensor4<float>& frames, const std::vector<int>& clique_sizes,
                           ScaleSemantics semantics) {
  const auto enc = net.encode(frames);
  const Eigen::MatrixXd mu = enc.mu.cast<double>();
  const Eigen::MatrixXd s = effective_scale(enc.scale.cast<double>(), semantics);
  double sum = 0.0;
  int off = 0;
  for (int size : clique_sizes) {
    Eigen::MatrixXd f(size, 2 * mu.cols());
    f << mu.middleRows(off, size), s.middleRows(off, size);
    sum += nuclear_norm(f);
    off += size;
  }
  return clique_sizes.empty() ? 0.0 : sum / static_cast<double>(clique_sizes.size());
}

void Adam::step(std::vector<Param<float>>& params, double lr) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value.size(), 0.0f);
      v_.emplace_back(p.value.size(), 0.0f);
    }
  }
  require(m_.size() == params.size(), "Adam: parameter list changed between steps");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m[k] = static_cast<float>(beta1_ * m[k] + (1.0 - beta1_) * g);
      v[k] = static_cast<float>(beta2_ * v[k] + (1.0 - beta2_) * g * g);
      const double mh = m[k] / c1;
      const double vh = v[k] / c2;
      p.value[k] -= static_cast<float>(lr * mh / (std::sqrt(vh) + eps_));
    }
  }
}

double global_grad_norm(const std::vector<Param<float>>& params) {
  double sq = 0.0;
  for (const auto& p : params)
    for (float g : p.grad) sq += static_cast<double>(g) * g;
  return std::sqrt(sq);
}

double clip_grad_norm(std::vector<Param<float>>& params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    // float rounding can push the rescaled norm slightly above the target
    const double factor = max_norm / norm * (1.0 - 1e-6);
    for (auto& p : params)
      for (float& g : p.grad) g = static_cast<float>(g * factor);
  }
  return norm;
}

void LrScheduler::end_epoch(int epoch, double mean_loss) {
  switch (c_.lr_schedule) {
    case LrSchedule::none:
      return;
    case LrSchedule::step:
      if (epoch % c_.lr_step == 0) lr_ = std::max(c_.lr_min, lr_ * c_.lr_factor);
      return;
    case LrSchedule::plateau:
      if (!has_best_ || mean_loss < best_ - 1e-4 * std::abs(best_)) {
        best_ = mean_loss;
        has_best_ = true;
        stale_ = 0;
      } else if (++stale_ >= c_.lr_patience) {
        lr_ = std::max(c_.lr_min, lr_ * c_.lr_factor);
        stale_ = 0;
      }
      return;
  }
}

int resolve_steps_per_epoch(const TrainConfig& config, const std::vector<SceneDescriptor>& scenes) {
  if (config.steps_per_epoch > 0) return config.steps_per_epoch;
  long frames = 0;
  for (const auto& s : scenes) frames += s.frame_count();
  const long per_batch = static_cast<long>(config.clips_per_batch) * config.clip_len;
  return static_cast<int>(std::max(1L, frames / per_batch));
}

namespace {

MaskStack batch_mask(const std::vector<MaskStack>& masks, const std::vector<ClipRef>& refs, int clip_len) {
  const MaskStack& first = masks[refs.front().scene];
  MaskStack out(static_cast<int>(refs.size()) * clip_len, first.height, first.width);
  std::size_t pos = 0;
  for (const auto& r : refs) {
    const MaskStack& m = masks[r.scene];
    const std::size_t len = static_cast<std::size_t>(clip_len) * m.plane();
    std::copy_n(m.frame(r.start), len, out.v.begin() + static_cast<std::ptrdiff_t>(pos));
    pos += len;
  }
  return out;
}

void dump_batch(const fs::path& path, const std::vector<SceneDescriptor>& scenes, const BatchStream::Item& item,
                const TrainRecord& rec, const std::string& reason) {
  std::ofstream out(path);
  out << "reason: " << reason << '\n';
  out << "epoch=" << rec.epoch << " step=" << rec.step << " lr=" << rec.learning_rate << '\n';
  out << "loss: " << TrainLog::format(rec) << '\n';
  for (std::size_t i = 0; i < item.refs.size(); ++i) {
    const auto& clip = item.batch.clips[i];
    float lo = 1.0f, hi = 0.0f;
    double mean = 0.0;
    for (float v : clip.frames.data) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      mean += v;
    }
    mean /= static_cast<double>(std::max<std::size_t>(1, clip.frames.size()));
    out << "clip " << i << ": scene=" << scenes[item.refs[i].scene].scene_id << " start=" << item.refs[i].start
        << " frames=" << clip.length() << " min=" << lo << " max=" << hi << " mean=" << mean << '\n';
  }
}

}  // namespace

TrainResult train(const TrainConfig& config, const ModelConfig& model, const std::vector<SceneDescriptor>& scenes,
                  const std::vector<MaskStack>& masks, const fs::path& out_dir, const Metadata* extra_metadata) {
  config.validate();
  model.validate();
  if (scenes.empty()) throw ArgumentError("train: no scenes");
  require(masks.size() == scenes.size(), "train: one motion mask stack per scene is required");
  for (std::size_t i = 0; i < scenes.size(); ++i)
    if (masks[i].frames != scenes[i].frame_count() || masks[i].height != model.height ||
        masks[i].width != model.width)
      throw ArgumentError("train: motion masks of scene " + scenes[i].scene_id + " do not match frames/model size");

  fs::create_directories(out_dir);
  std::ofstream log_file(out_dir / "train.log");
  if (!log_file) throw IoError("cannot write " + (out_dir / "train.log").string());

  TrainResult result{Network<float>(model), {}, out_dir / "ckpt"};
  Network<float>& net = result.net;
  BatchStream stream(scenes, config.clips_per_batch, config.clip_len, config.seed, model.height, model.width,
                     config.prefetch);
  std::mt19937_64 noise_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  Adam adam;
  LrScheduler sched(config);
  const StepOptions opts{config.lambda, config.weights, config.scale_semantics, config.sampling};
  const int steps = resolve_steps_per_epoch(config, scenes);

  Metadata meta = extra_metadata ? *extra_metadata : Metadata{};
  const auto t0 = std::chrono::steady_clock::now();
  long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (int s = 0; s < steps; ++s) {
      BatchStream::Item item = stream.next();
      const Tensor4<float> frames = item.batch.stacked();
      const MaskStack moving = batch_mask(masks, item.refs, config.clip_len);
      Eigen::MatrixXd noise(frames.n, model.latent_dim);
      for (Eigen::Index k = 0; k < noise.size(); ++k) noise.data()[k] = normal(noise_rng);

      TrainRecord rec;
      rec.epoch = epoch;
      rec.step = ++step;
      rec.learning_rate = sched.lr();
      rec.cliques = static_cast<int>(item.batch.clique_sizes.size());
      net.zero_grad();
      try {
        rec.loss = train_step(net, frames, item.batch.clique_sizes, moving, noise, opts);
      } catch (const NumericError& e) {
        dump_batch(out_dir / "nonfinite-batch.txt", scenes, item, rec, e.what());
        throw NumericError(std::string("non-finite loss at step ") + std::to_string(step) + ": " + e.what() +
                           " (batch written to " + (out_dir / "nonfinite-batch.txt").string() + ")");
      }
      rec.grad_norm = clip_grad_norm(net.params(), config.grad_clip_norm);
      if (!std::isfinite(rec.grad_norm)) {
        dump_batch(out_dir / "nonfinite-batch.txt", scenes, item, rec, "non-finite gradient");
        throw NumericError("non-finite gradient at step " + std::to_string(step) + " (batch written to " +
                           (out_dir / "nonfinite-batch.txt").string() + ")");
      }
      rec.clipped_norm = global_grad_norm(net.params());
      adam.step(net.params(), sched.lr());
      rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log_file << TrainLog::format(rec) << '\n' << std::flush;
      result.log.records.push_back(rec);
      epoch_loss += rec.loss.total;
    }
    sched.end_epoch(epoch, epoch_loss / steps);
    if (config.save_every > 0 && epoch % config.save_every == 0 && epoch != config.epochs) {
      char name[32];
      std::snprintf(name, sizeof name, "ckpt-e%04d", epoch);
      save_checkpoint(out_dir / name, net, epoch, meta);
    }
  }
  save_checkpoint(result.checkpoint, net, config.epochs, meta);
  return result;
}

BackgroundMode parse_background_mode(const std::string& s) {
  if (s == "median") return BackgroundMode::median;
  if (s == "per_frame") return BackgroundMode::per_frame;
  throw ArgumentError("unknown background mode '" + s + "'");
}

Tensor4<float> infer_backgrounds(Network<float>& net, const Tensor4<float>& frames, int chunk) {
  const ModelConfig& m = net.config();
  if (frames.c != m.image_channels || frames.h != m.height || frames.w != m.width)
    throw ArgumentError("frames are " + std::to_string(frames.w) + "x" + std::to_string(frames.h) + "x" +
                        std::to_string(frames.c) + " but the checkpoint expects " + std::to_string(m.width) + "x" +
                        std::to_string(m.height) + "x" + std::to_string(m.image_channels));
  require(chunk >= 1, "infer_backgrounds: chunk must be positive");
  Tensor4<float> out(frames.n, frames.c, frames.h, frames.w);
  const std::size_t ss = frames.sample_size();
  for (int start = 0; start < frames.n; start += chunk) {
    const int len = std::min(chunk, frames.n - start);
    Tensor4<float> part(len, frames.c, frames.h, frames.w);
    std::copy_n(frames.sample(start), len * ss, part.data.begin());
    const auto enc = net.encode(part);
    const Tensor4<float> recon = net.decode(enc.mu);
    std::copy(recon.data.begin(), recon.data.end(), out.sample(start));
  }
  for (float& v : out.data) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

Tensor4<float> median_background(const Tensor4<float>& b) {
  require(b.n >= 1, "median_background: no frames");
  Tensor4<float> out(1, b.c, b.h, b.w);
  std::vector<float> column(b.n);
  const std::size_t ss = b.sample_size();
  for (std::size_t k = 0; k < ss; ++k) {
    for (int i = 0; i < b.n; ++i) column[i] = b.data[i * ss + k];
    const std::size_t mid = column.size() / 2;
    std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid), column.end());
    float med = column[mid];
    if (column.size() % 2 == 0) {
      const float lower = *std::max_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid));
      med = 0.5f * (med + lower);
    }
    out.data[k] = med;
  }
  return out;
}

std::vector<Image> estimate_background(Network<float>& net, const SceneDescriptor& scene, BackgroundMode mode) {
  const ModelConfig& m = net.config();
  const FrameClip clip = load_clip(scene, 0, scene.frame_count(), m.height, m.width, m.image_channels);
  Tensor4<float> bg = infer_backgrounds(net, clip.frames);
  if (mode == BackgroundMode::median) bg = median_background(bg);
  std::vector<Image> out;
  out.reserve(bg.n);
  for (int i = 0; i < bg.n; ++i) {
    Image img = planar_to_image(bg.sample(i), bg.c, bg.h, bg.w);
    if (img.height != scene.height || img.width != scene.width) img = resize_image(img, scene.height, scene.width);
    out.push_back(std::move(img));
  }
  return out;
}

Threshold Threshold::parse(const std::string& s) {
  if (s == "otsu") return {true, 0.0};
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size() && v >= 0.0 && v <= 1.0) return {false, v};
  } catch (const std::logic_error&) {
  }
  throw ConfigError("threshold must be 'otsu' or a number in [0,1], got '" + s + "'");
}

int otsu_level(const std::vector<std::size_t>& hist) {
  double total = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    total += static_cast<double>(hist[i]);
    weighted += static_cast<double>(i) * static_cast<double>(hist[i]);
  }
  int best = 255;
  double best_var = 0.0;
  double w0 = 0.0, s0 = 0.0;
  for (std::size_t t = 0; t + 1 < hist.size(); ++t) {
    w0 += static_cast<double>(hist[t]);
    s0 += static_cast<double>(t) * static_cast<double>(hist[t]);
    const double w1 = total - w0;
    if (w0 <= 0.0 || w1 <= 0.0) continue;
    const double m0 = s0 / w0;
    const double m1 = (weighted - s0) / w1;
    const double var = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (var > best_var) {
      best_var = var;
      best = static_cast<int>(t);
    }
  }
  return best;
}

MaskStack median3x3(const MaskStack& m) {
  MaskStack out(m.frames, m.height, m.width);
  for (int f = 0; f < m.frames; ++f)
    for (int y = 0; y < m.height; ++y)
      for (int x = 0; x < m.width; ++x) {
        int on = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            on += m.at(f, std::clamp(y + dy, 0, m.height - 1), std::clamp(x + dx, 0, m.width - 1));
        out.frame(f)[static_cast<std::size_t>(y) * m.width + x] = on >= 5 ? 1 : 0;
      }
  return out;
}

MaskStack subtract(const Tensor4<float>& frames, const Tensor4<float>& backgrounds, const Threshold& threshold,
                   bool postproc) {
  require(backgrounds.c == frames.c && backgrounds.h == frames.h && backgrounds.w == frames.w,
          "subtract: frames and backgrounds differ in shape");
  require(backgrounds.n == 1 || backgrounds.n == frames.n, "subtract: need one background or one per frame");
  MaskStack out(frames.n, frames.h, frames.w);
  for (int i = 0; i < frames.n; ++i) {
    const Plane a = frame_luma(frames, i);
    const Plane b = frame_luma(backgrounds, backgrounds.n == 1 ? 0 : i);
    std::uint8_t* m = out.frame(i);
    if (threshold.otsu) {
      std::vector<int> level(a.size());
      std::vector<std::size_t> hist(256, 0);
      for (std::size_t p = 0; p < a.size(); ++p) {
        level[p] = static_cast<int>(std::lround(std::clamp(std::abs(a.v[p] - b.v[p]), 0.0f, 1.0f) * 255.0f));
        ++hist[level[p]];
      }
      const int t = otsu_level(hist);
      for (std::size_t p = 0; p < a.size(); ++p) m[p] = level[p] > t ? 1 : 0;
    } else {
      for (std::size_t p = 0; p < a.size(); ++p) m[p] = std::abs(a.v[p] - b.v[p]) > threshold.value ? 1 : 0;
    }
  }
  return postproc ? median3x3(out) : out;
}

template LossBreakdown train_step<float>(Network<float>&, const Tensor4<float>&, const std::vector<int>&,
                                         const MaskStack&, const Eigen::MatrixXd&, const StepOptions&);
template LossBreakdown train_step<double>(Network<double>&, const Tensor4<double>&, const std::vector<int>&,
                                          const MaskStack&, const Eigen::MatrixXd&, const StepOptions&);
template LossBreakdown evaluate_loss<float>(Network<float>&, const Tensor4<float>&, const std::vector<int>&,
                                            const MaskStack&, const Eigen::MatrixXd&, const StepOptions&);
template LossBreakdown evaluate_loss<double>(Network<double>&, const Tensor4<double>&, const std::vector<int>&,
                                             const MaskStack&, const Eigen::MatrixXd&, const StepOptions&);

}  // namespace glbm
