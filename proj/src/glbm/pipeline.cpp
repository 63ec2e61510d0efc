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

#include "glbm/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "glbm/checkpoint.hpp"
#include "glbm/error.hpp"
#include "glbm/image_io.hpp"

namespace fs = std::filesystem;

namespace glbm {
namespace {

std::string frame_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu.png", i);
  return buf;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_readable_image(e.path())) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

ModelConfig model_config_from(const RunConfig& c) {
  ModelConfig m;
  m.height = c.get_int("dataset.height");
  m.width = c.get_int("dataset.width");
  m.channels = c.get_int_list("model.channels");
  m.latent_dim = c.get_int("model.latent_dim");
  m.activation = parse_activation(c.get("model.activation"));
  const double init = c.get_double("model.scale_init");
  m.scale_init = parse_scale_semantics(c.get("posterior.scale_semantics")) == ScaleSemantics::variance
                     ? 1.0 / (init * init)
                     : init;
  m.seed = static_cast<std::uint64_t>(c.get_int("model.seed"));
  m.validate();
  return m;
}

TrainConfig train_config_from(const RunConfig& c) {
  TrainConfig t;
  t.optimizer = c.get("train.optimizer");
  t.epochs = c.get_int("train.epochs");
  t.clips_per_batch = c.get_int("train.clips_per_batch");
  t.clip_len = c.get_int("train.clip_len");
  t.steps_per_epoch = c.get_int("train.steps_per_epoch");
  t.learning_rate = c.get_double("train.learning_rate");
  t.lr_schedule = parse_lr_schedule(c.get("train.lr_schedule"));
  t.lr_factor = c.get_double("train.lr_factor");
  t.lr_patience = c.get_int("train.lr_patience");
  t.lr_step = c.get_int("train.lr_step");
  t.lr_min = c.get_double("train.lr_min");
  t.grad_clip_norm = c.get_double("train.grad_clip_norm");
  t.save_every = c.get_int("train.save_every");
  t.lambda = c.get_double("prior.lambda");
  t.weights.alpha = c.get_double("loss.alpha");
  t.weights.beta = c.get_double("loss.beta");
  t.weights.kl_weight = c.get_double("loss.kl_weight");
  t.scale_semantics = parse_scale_semantics(c.get("posterior.scale_semantics"));
  t.sampling = parse_sampling_mode(c.get("posterior.sampling"));
  t.prefetch = c.get_int("dataset.prefetch");
  t.seed = static_cast<std::uint64_t>(c.get_int("train.seed"));
  t.validate();
  return t;
}

FlowOptions flow_options_from(const RunConfig& c) {
  FlowOptions f;
  f.levels = c.get_int("flow.levels");
  f.iterations = c.get_int("flow.iterations");
  f.window_sigma = c.get_double("flow.window_sigma");
  if (f.levels < 1 || f.iterations < 1 || !(f.window_sigma > 0.0))
    throw ConfigError("flow.levels, flow.iterations and flow.window_sigma must be positive");
  return f;
}

SynthSpec synth_spec_from(const RunConfig& c) {
  SynthSpec s;
  s.scenes = c.get_int("synth.scenes");
  s.frames = c.get_int("synth.frames");
  s.height = c.get_int("synth.height");
  s.width = c.get_int("synth.width");
  s.background = c.get("synth.background") == "texture" ? BackgroundKind::texture : BackgroundKind::gradient;
  s.objects = c.get_int("synth.objects");
  s.object_size = c.get_int("synth.object_size");
  const std::string shape = c.get("synth.object_shape");
  s.object_shape = shape == "disk" ? ObjectShape::disk : shape == "mixed" ? ObjectShape::mixed : ObjectShape::square;
  s.velocity = c.get_double("synth.velocity");
  s.intensity = c.get_int("synth.intensity");
  s.jitter = c.get_int("synth.jitter");
  s.drift = c.get_double("synth.drift");
  s.seed = static_cast<std::uint64_t>(c.get_int("synth.seed"));
  s.validate();
  return s;
}

SbmOptions sbm_options_from(const RunConfig& c) {
  return {c.get_double("eval.ep_threshold"), c.get_double("eval.peak")};
}

std::vector<SceneDescriptor> scan_from(const RunConfig& c, const fs::path& data_root) {
  auto scenes = scan_dataset(data_root, parse_layout(c.get("dataset.layout")), c.get_int("dataset.max_frames"));
  if (scenes.empty()) throw IoError("no usable scenes under " + data_root.string());
  return scenes;
}

MaskStack read_mask_dir(const fs::path& dir) {
  const auto files = list_images(dir);
  if (files.empty()) throw IoError("no mask images in " + dir.string());
  MaskStack out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    int h = 0, w = 0;
    const auto m = read_mask(files[i], h, w);
    if (i == 0) out = MaskStack(static_cast<int>(files.size()), h, w);
    if (h != out.height || w != out.width) throw ArgumentError("mask " + files[i].string() + " differs in size");
    std::copy(m.begin(), m.end(), out.frame(static_cast<int>(i)));
  }
  return out;
}

std::vector<MaskStack> scene_masks(const RunConfig& c, const std::vector<SceneDescriptor>& scenes) {
  const ModelConfig m = model_config_from(c);
  const FlowOptions flow = flow_options_from(c);
  const double kappa = c.get_double("flow.kappa");
  const int window = c.get_int("flow.mask_window");
  const std::string cache = c.get("flow.mask_dir");
  std::vector<MaskStack> out;
  for (const auto& s : scenes) {
    if (!cache.empty() && fs::is_directory(fs::path(cache) / s.scene_id)) {
      MaskStack cached = read_mask_dir(fs::path(cache) / s.scene_id);
      if (cached.frames < s.frame_count() || cached.height != m.height || cached.width != m.width)
        throw ArgumentError("cached masks of scene " + s.scene_id + " do not match the frames or model size");
      cached.frames = s.frame_count();
      cached.v.resize(static_cast<std::size_t>(cached.frames) * cached.plane());
      out.push_back(std::move(cached));
      continue;
    }
    const FrameClip clip = load_clip(s, 0, s.frame_count(), m.height, m.width, m.image_channels);
    out.push_back(sequence_motion_mask(clip.frames, flow, kappa, window));
  }
  return out;
}

void make_masks(const RunConfig& c, const fs::path& data_root, const fs::path& out_dir) {
  RunConfig fresh = c;
  fresh.set("flow.mask_dir", "");
  const auto scenes = scan_from(c, data_root);
  const auto masks = scene_masks(fresh, scenes);
  for (std::size_t i = 0; i < scenes.size(); ++i)
    for (int f = 0; f < masks[i].frames; ++f)
      write_mask(out_dir / scenes[i].scene_id / frame_name(static_cast<std::size_t>(f)), masks[i].frame(f),
                 masks[i].height, masks[i].width);
}

TrainResult train_run(const RunConfig& c, const fs::path& data_root, const fs::path& out_dir) {
  const ModelConfig model = model_config_from(c);
  const TrainConfig tc = train_config_from(c);
  const auto scenes = scan_from(c, data_root);
  const auto masks = scene_masks(c, scenes);
  fs::create_directories(out_dir);
  {
    std::ofstream cfg(out_dir / "config.cfg");
    cfg << c.serialize();
    if (!cfg) throw IoError("cannot write " + (out_dir / "config.cfg").string());
  }
  const Metadata extra{
      {"prior.lambda", c.get("prior.lambda")},
      {"posterior.scale_semantics", c.get("posterior.scale_semantics")},
      {"posterior.sampling", c.get("posterior.sampling")},
      {"loss.alpha", c.get("loss.alpha")},
      {"loss.beta", c.get("loss.beta")},
      {"train.seed", c.get("train.seed")},
  };
  return train(tc, model, scenes, masks, out_dir, &extra);
}

std::vector<fs::path> estimate_run(Network<float>& net, const fs::path& scene_dir, BackgroundMode mode,
                                   const fs::path& out_dir) {
  const SceneDescriptor scene = scan_scene(scene_dir);
  const auto images = estimate_background(net, scene, mode);
  std::vector<fs::path> written;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const fs::path p = out_dir / (mode == BackgroundMode::median ? std::string("background.png") : frame_name(i));
    write_image(p, images[i]);
    written.push_back(p);
  }
  return written;
}

std::vector<fs::path> subtract_run(const RunConfig& c, const fs::path& scene_dir, const fs::path& background,
                                   const fs::path& out_dir) {
  const SceneDescriptor scene = scan_scene(scene_dir);
  const FrameClip clip = load_clip(scene, 0, scene.frame_count(), scene.height, scene.width);
  std::vector<fs::path> bg_files = fs::is_directory(background) ? list_images(background)
                                                                 : std::vector<fs::path>{background};
  if (bg_files.size() != 1 && static_cast<int>(bg_files.size()) != scene.frame_count())
    throw ArgumentError("expected one background or one per frame, found " + std::to_string(bg_files.size()));
  Tensor4<float> bgs(static_cast<int>(bg_files.size()), 3, scene.height, scene.width);
  for (std::size_t i = 0; i < bg_files.size(); ++i) {
    const Image img = read_image(bg_files[i]);
    if (img.height != scene.height || img.width != scene.width)
      throw ArgumentError("background " + bg_files[i].string() + " does not match the scene resolution");
    image_to_planar(img, 3, bgs.sample(static_cast<int>(i)));
  }
  const MaskStack masks =
      subtract(clip.frames, bgs, Threshold::parse(c.get("eval.threshold")), c.get_bool("eval.postproc"));
  std::vector<fs::path> written;
  for (int f = 0; f < masks.frames; ++f) {
    const fs::path p = out_dir / frame_name(static_cast<std::size_t>(f));
    write_mask(p, masks.frame(f), masks.height, masks.width);
    written.push_back(p);
  }
  return written;
}

MetricReport eval_sbm_run(const RunConfig& c, const fs::path& gt, const fs::path& est) {
  return sbm_metrics(read_image(gt), read_image(est), sbm_options_from(c));
}

BsScore eval_bs_run(const fs::path& pred_dir, const fs::path& gt_dir) {
  const MaskStack pred = read_mask_dir(pred_dir);
  const MaskStack gt = read_mask_dir(gt_dir);
  return bs_scores(pred, gt);
}

}  // namespace glbm
