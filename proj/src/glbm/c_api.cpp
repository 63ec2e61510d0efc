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

#include "glbm/glbm.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "glbm/checkpoint.hpp"
#include "glbm/config.hpp"
#include "glbm/error.hpp"
#include "glbm/pipeline.hpp"

struct glbm_config {
  glbm::RunConfig cfg;
};

struct glbm_model {
  glbm::LoadedCheckpoint ck;
};

namespace {

thread_local std::string last_error;

glbm_status fail(glbm_status s, const char* what) {
  last_error = what;
  return s;
}

// Runs `fn`, mapping exceptions onto status codes.
template <typename Fn>
glbm_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return GLBM_OK;
  } catch (const glbm::Error& e) {
    return fail(static_cast<glbm_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(GLBM_ERR_RUNTIME, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(GLBM_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(GLBM_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(GLBM_ERR_RUNTIME, "unknown error");
  }
}

void need(const void* p, const char* name) {
  if (!p) throw glbm::ArgumentError(std::string(name) + " must not be null");
}

void copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf) {
    if (!needed) throw glbm::ArgumentError("buffer and needed are both null");
    return;
  }
  if (cap < s.size() + 1) throw glbm::RangeError("buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

}  // namespace

extern "C" {

const char* glbm_last_error(void) { return last_error.c_str(); }

const char* glbm_version(void) { return "1.0.0"; }

glbm_status glbm_config_create(glbm_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new glbm_config{};
  });
}

void glbm_config_destroy(glbm_config* config) { delete config; }

glbm_status glbm_config_set(glbm_config* config, const char* key, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    config->cfg.set(key, value);
  });
}

glbm_status glbm_config_get(const glbm_config* config, const char* key, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    copy_out(config->cfg.get(key), buf, cap, needed);
  });
}

glbm_status glbm_config_load_file(glbm_config* config, const char* path) {
  return guarded([&] {
    need(config, "config");
    need(path, "path");
    config->cfg.load_file(path);
  });
}

glbm_status glbm_config_merge_text(glbm_config* config, const char* text) {
  return guarded([&] {
    need(config, "config");
    need(text, "text");
    config->cfg.merge_text(text);
  });
}

glbm_status glbm_config_serialize(const glbm_config* config, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    copy_out(config->cfg.serialize(), buf, cap, needed);
  });
}

size_t glbm_config_key_count(void) { return glbm::RunConfig::keys().size(); }

const char* glbm_config_key_name(size_t index) {
  const auto& keys = glbm::RunConfig::keys();
  return index < keys.size() ? keys[index].key.c_str() : nullptr;
}

const char* glbm_config_key_default(size_t index) {
  const auto& keys = glbm::RunConfig::keys();
  return index < keys.size() ? keys[index].default_value.c_str() : nullptr;
}

const char* glbm_config_key_description(size_t index) {
  const auto& keys = glbm::RunConfig::keys();
  return index < keys.size() ? keys[index].description.c_str() : nullptr;
}

glbm_status glbm_describe_keys(char* buf, size_t cap, size_t* needed) {
  return guarded([&] { copy_out(glbm::describe_keys(), buf, cap, needed); });
}

glbm_status glbm_synth(const glbm_config* config, const char* out_dir, size_t* scene_count) {
  return guarded([&] {
    need(config, "config");
    need(out_dir, "out_dir");
    const auto ids = glbm::synth_generate(glbm::synth_spec_from(config->cfg), out_dir);
    if (scene_count) *scene_count = ids.size();
  });
}

glbm_status glbm_make_masks(const glbm_config* config, const char* data_root, const char* out_dir) {
  return guarded([&] {
    need(config, "config");
    need(data_root, "data_root");
    need(out_dir, "out_dir");
    glbm::make_masks(config->cfg, data_root, out_dir);
  });
}

glbm_status glbm_train(const glbm_config* config, const char* data_root, const char* out_dir, double* final_loss) {
  return guarded([&] {
    need(config, "config");
    need(data_root, "data_root");
    need(out_dir, "out_dir");
    const glbm::TrainResult r = glbm::train_run(config->cfg, data_root, out_dir);
    if (final_loss) *final_loss = r.log.records.empty() ? 0.0 : r.log.records.back().loss.total;
  });
}

glbm_status glbm_model_load(const char* checkpoint, glbm_model** out) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(out, "out");
    *out = new glbm_model{glbm::load_checkpoint(checkpoint)};
  });
}

void glbm_model_free(glbm_model* model) { delete model; }

glbm_status glbm_model_info(const glbm_model* model, int* height, int* width, int* latent_dim, int* epoch) {
  return guarded([&] {
    need(model, "model");
    const auto& c = model->ck.net.config();
    if (height) *height = c.height;
    if (width) *width = c.width;
    if (latent_dim) *latent_dim = c.latent_dim;
    if (epoch) *epoch = model->ck.epoch;
  });
}

glbm_status glbm_estimate(glbm_model* model, const char* scene_dir, const char* mode, const char* out_dir,
                          size_t* written) {
  return guarded([&] {
    need(model, "model");
    need(scene_dir, "scene_dir");
    need(mode, "mode");
    need(out_dir, "out_dir");
    const auto paths = glbm::estimate_run(model->ck.net, scene_dir, glbm::parse_background_mode(mode), out_dir);
    if (written) *written = paths.size();
  });
}

glbm_status glbm_subtract(const glbm_config* config, const char* scene_dir, const char* background,
                          const char* out_dir, size_t* written) {
  return guarded([&] {
    need(config, "config");
    need(scene_dir, "scene_dir");
    need(background, "background");
    need(out_dir, "out_dir");
    const auto paths = glbm::subtract_run(config->cfg, scene_dir, background, out_dir);
    if (written) *written = paths.size();
  });
}

glbm_status glbm_eval_sbm(const glbm_config* config, const char* gt_image, const char* est_image,
                          glbm_sbm_report* out) {
  return guarded([&] {
    need(config, "config");
    need(gt_image, "gt_image");
    need(est_image, "est_image");
    need(out, "out");
    const glbm::MetricReport r = glbm::eval_sbm_run(config->cfg, gt_image, est_image);
    *out = {r.age, r.peps, r.pceps, r.psnr, r.msssim, r.cqm};
  });
}

glbm_status glbm_eval_bs(const char* pred_dir, const char* gt_dir, glbm_bs_score* out) {
  return guarded([&] {
    need(pred_dir, "pred_dir");
    need(gt_dir, "gt_dir");
    need(out, "out");
    const glbm::BsScore s = glbm::eval_bs_run(pred_dir, gt_dir);
    *out = {s.precision, s.recall, s.f_measure};
  });
}

}  // extern "C"
