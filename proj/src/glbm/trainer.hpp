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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glbm/checkpoint.hpp"
#include "glbm/dataset.hpp"
#include "glbm/graph_prior.hpp"
#include "glbm/image_io.hpp"
#include "glbm/network.hpp"
#include "glbm/objective.hpp"
#include "glbm/posterior.hpp"
#include "glbm/tensor.hpp"

namespace glbm {

enum class LrSchedule { none, step, plateau };
LrSchedule parse_lr_schedule(const std::string& s);
std::string to_string(LrSchedule s);

struct TrainConfig {
  std::string optimizer = "adam";
  int epochs = 500;
  int clips_per_batch = 3;
  int clip_len = 40;
  int steps_per_epoch = 0;  // 0 = max(1, total frames / frames per batch)
  double learning_rate = 1e-3;
  LrSchedule lr_schedule = LrSchedule::plateau;
  double lr_factor = 0.5;
  int lr_patience = 10;
  int lr_step = 100;
  double lr_min = 1e-6;
  double grad_clip_norm = 5.0;
  int save_every = 50;
  double lambda = 1.0;
  LossWeights weights;
  ScaleSemantics scale_semantics = ScaleSemantics::precision;
  SamplingMode sampling = SamplingMode::structured;
  int prefetch = 2;
  std::uint64_t seed = 0;

  // Throws ConfigError when a field is out of range.
  void validate() const;
};

struct TrainRecord {
  int epoch = 0;  // 1-based
  long step = 0;  // 1-based, global
  LossBreakdown loss;
  double learning_rate = 0.0;
  double grad_norm = 0.0;       // before clipping
  double clipped_norm = 0.0;    // after clipping
  double wall_seconds = 0.0;
  int cliques = 0;
};

struct TrainLog {
  std::vector<TrainRecord> records;
  // One `key=value` record per line.
  static std::string format(const TrainRecord& r);
  std::string to_text() const;
  // Mean of `field` over the records of the last epoch.
  double last_epoch_mean(const std::function<double(const TrainRecord&)>& field) const;
};

struct StepOptions {
  double lambda = 1.0;
  LossWeights weights;
  ScaleSemantics scale_semantics = ScaleSemantics::precision;
  SamplingMode sampling = SamplingMode::structured;
};

// Forward pass, loss and backward pass on one batch with fixed noise [n x d].
// Parameter gradients are accumulated into `net` (call zero_grad first).
template <typename T>
LossBreakdown train_step(Network<T>& net, const Tensor4<T>& frames, const std::vector<int>& clique_sizes,
                         const MaskStack& moving, const Eigen::MatrixXd& noise, const StepOptions& opts);

// Loss only; no gradients are touched.
template <typename T>
LossBreakdown evaluate_loss(Network<T>& net, const Tensor4<T>& frames, const std::vector<int>& clique_sizes,
                            const MaskStack& moving, const Eigen::MatrixXd& noise, const StepOptions& opts);

// Mean over cliques of the nuclear norm of [mu | scale] for a batch.
double mean_clique_nuclear(Network<float>& net, const Tensor4<float>& frames, const std::vector<int>& clique_sizes,
                           ScaleSemantics semantics);

// Adam with bias correction.
class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(std::vector<Param<float>>& params, double lr);
  long steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

double global_grad_norm(const std::vector<Param<float>>& params);
// Rescales gradients so their global norm is at most `max_norm`; returns the
// norm before clipping.
double clip_grad_norm(std::vector<Param<float>>& params, double max_norm);

// Learning-rate state advanced once per epoch with the epoch's mean loss.
class LrScheduler {
 public:
  explicit LrScheduler(const TrainConfig& c) : c_(c), lr_(c.learning_rate) {}
  double lr() const { return lr_; }
  void end_epoch(int epoch, double mean_loss);

 private:
  TrainConfig c_;
  double lr_;
  double best_ = 0.0;
  bool has_best_ = false;
  int stale_ = 0;
};

struct TrainResult {
  Network<float> net;
  TrainLog log;
  std::filesystem::path checkpoint;
};

// `masks[i]` is the motion mask of scene i at the model resolution, one
// frame per scene frame. Writes `train.log`, periodic `ckpt-eNNNN` and the
// final `ckpt` under `out_dir`. A non-finite loss writes
// `nonfinite-batch.txt` and throws NumericError.
TrainResult train(const TrainConfig& config, const ModelConfig& model, const std::vector<SceneDescriptor>& scenes,
                  const std::vector<MaskStack>& masks, const std::filesystem::path& out_dir,
                  const Metadata* extra_metadata = nullptr);

int resolve_steps_per_epoch(const TrainConfig& config, const std::vector<SceneDescriptor>& scenes);

enum class BackgroundMode { per_frame, median };
BackgroundMode parse_background_mode(const std::string& s);

// Posterior-mean reconstructions of `frames`, values in [0,1]. Throws
// ArgumentError when the frames do not match the network input shape.
Tensor4<float> infer_backgrounds(Network<float>& net, const Tensor4<float>& frames, int chunk = 16);

// Pixelwise median over frames, [1][C][H][W].
Tensor4<float> median_background(const Tensor4<float>& backgrounds);

// Loads the scene at the network resolution, infers backgrounds and returns
// them as 8-bit images at the scene's native resolution (one image in median
// mode).
std::vector<Image> estimate_background(Network<float>& net, const SceneDescriptor& scene, BackgroundMode mode);

struct Threshold {
  bool otsu = true;
  double value = 0.0;  // fixed threshold on the [0,1] luma difference
  static Threshold parse(const std::string& s);
};

// Otsu level (0..255) of a histogram; pixels with level > result are
// foreground. Returns 255 on a single-level histogram.
int otsu_level(const std::vector<std::size_t>& histogram);

// Foreground masks from the absolute luma difference between frames [n] and
// backgrounds ([1] or [n]).
MaskStack subtract(const Tensor4<float>& frames, const Tensor4<float>& backgrounds, const Threshold& threshold,
                   bool postproc);

// 3x3 binary median (majority) filter with replicated borders.
MaskStack median3x3(const MaskStack& m);

}  // namespace glbm
