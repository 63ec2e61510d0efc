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

#include "glbm/dataset.hpp"

#include <algorithm>
#include <iostream>

#include "glbm/error.hpp"
#include "glbm/image_io.hpp"

namespace fs = std::filesystem;

namespace glbm {
namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

void warn(std::vector<std::string>* sink, const std::string& msg) {
  std::cerr << "warning: " << msg << '\n';
  if (sink) sink->push_back(msg);
}

SceneDescriptor scan_frames(const std::string& scene_id, const fs::path& scene_root, const fs::path& frame_dir,
                            int max_frames, std::vector<std::string>* warnings) {
  SceneDescriptor desc;
  desc.scene_id = scene_id;
  desc.root = scene_root;
  std::vector<fs::path> candidates;
  for (const auto& entry : fs::directory_iterator(frame_dir))
    if (entry.is_regular_file() && has_image_extension(entry.path())) candidates.push_back(entry.path());
  std::sort(candidates.begin(), candidates.end());
  for (const auto& p : candidates) {
    if (max_frames > 0 && desc.frame_count() >= max_frames) break;
    if (!is_readable_image(p)) {
      warn(warnings, "skipping unreadable frame " + p.string());
      continue;
    }
    if (desc.frame_paths.empty()) {
      try {
        const Image first = read_image(p);
        desc.height = first.height;
        desc.width = first.width;
      } catch (const IoError&) {
        warn(warnings, "skipping unreadable frame " + p.string());
        continue;
      }
    }
    desc.frame_paths.push_back(p);
  }
  return desc;
}

}  // namespace

Layout parse_layout(const std::string& s) {
  if (s == "flat") return Layout::flat;
  if (s == "sbm-style") return Layout::sbm_style;
  throw ArgumentError("unknown dataset layout '" + s + "'");
}

int Batch::total_frames() const {
  int total = 0;
  for (int s : clique_sizes) total += s;
  return total;
}

Tensor4<float> Batch::stacked() const {
  require(!clips.empty(), "empty batch");
  const auto& first = clips.front().frames;
  Tensor4<float> out(total_frames(), first.c, first.h, first.w);
  std::size_t offset = 0;
  for (const auto& clip : clips) {
    require(clip.frames.c == first.c && clip.frames.h == first.h && clip.frames.w == first.w,
            "batch clips differ in shape");
    std::copy(clip.frames.data.begin(), clip.frames.data.end(), out.data.begin() + offset);
    offset += clip.frames.size();
  }
  return out;
}

std::vector<SceneDescriptor> scan_dataset(const fs::path& root, Layout layout, int max_frames,
                                          std::vector<std::string>* warnings) {
  if (!fs::is_directory(root)) throw IoError("dataset root does not exist: " + root.string());
  std::vector<fs::path> scene_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) scene_dirs.push_back(entry.path());
  std::sort(scene_dirs.begin(), scene_dirs.end());

  std::vector<SceneDescriptor> scenes;
  for (const auto& dir : scene_dirs) {
    const fs::path frame_dir = layout == Layout::sbm_style ? dir / "input" : dir;
    if (!fs::is_directory(frame_dir)) {
      warn(warnings, "scene " + dir.filename().string() + " has no frame directory, skipped");
      continue;
    }
    SceneDescriptor desc = scan_frames(dir.filename().string(), dir, frame_dir, max_frames, warnings);
    if (desc.frame_paths.empty()) {
      warn(warnings, "scene " + desc.scene_id + " has no readable frames, skipped");
      continue;
    }
    scenes.push_back(std::move(desc));
  }
  return scenes;
}

SceneDescriptor scan_scene(const fs::path& scene_dir, int max_frames, std::vector<std::string>* warnings) {
  if (!fs::is_directory(scene_dir)) throw IoError("scene directory does not exist: " + scene_dir.string());
  const fs::path frame_dir = fs::is_directory(scene_dir / "input") ? scene_dir / "input" : scene_dir;
  fs::path normalized = scene_dir.lexically_normal();
  if (normalized.filename().empty()) normalized = normalized.parent_path();
  SceneDescriptor desc = scan_frames(normalized.filename().string(), scene_dir, frame_dir, max_frames, warnings);
  if (desc.frame_paths.empty()) throw IoError("scene " + scene_dir.string() + " has no readable frames");
  return desc;
}

FrameClip load_clip(const SceneDescriptor& scene, int start, int length, int height, int width, int channels) {
  if (start < 0 || length < 1 || start + length > scene.frame_count())
    throw RangeError("clip window [" + std::to_string(start) + ", " + std::to_string(start + length) +
                     ") outside scene " + scene.scene_id + " with " + std::to_string(scene.frame_count()) + " frames");
  require(height > 0 && width > 0, "load_clip: target size must be positive");
  FrameClip clip;
  clip.scene_id = scene.scene_id;
  clip.start_index = start;
  clip.frames = Tensor4<float>(length, channels, height, width);
  for (int i = 0; i < length; ++i) {
    const Image img = resize_image(read_image(scene.frame_paths[start + i]), height, width);
    image_to_planar(img, channels, clip.frames.sample(i));
  }
  return clip;
}

BatchSampler::BatchSampler(const std::vector<SceneDescriptor>& scenes, int clips_per_batch, int clip_len,
                           std::uint64_t seed)
    : clips_per_batch_(clips_per_batch), clip_len_(clip_len), rng_(seed) {
  if (clips_per_batch < 1 || clip_len < 1) throw ConfigError("clips_per_batch and clip_len must be positive");
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    frame_counts_.push_back(scenes[i].frame_count());
    if (scenes[i].frame_count() >= clip_len) eligible_.push_back(static_cast<int>(i));
  }
  if (eligible_.empty())
    throw ConfigError("no scene has at least " + std::to_string(clip_len) + " frames for the requested clip length");
}

std::vector<ClipRef> BatchSampler::next() {
  std::vector<ClipRef> refs;
  refs.reserve(clips_per_batch_);
  for (int i = 0; i < clips_per_batch_; ++i) {
    std::uniform_int_distribution<int> pick_scene(0, static_cast<int>(eligible_.size()) - 1);
    const int scene = eligible_[pick_scene(rng_)];
    std::uniform_int_distribution<int> pick_start(0, frame_counts_[scene] - clip_len_);
    refs.push_back({scene, pick_start(rng_)});
  }
  return refs;
}

BatchStream::BatchStream(std::vector<SceneDescriptor> scenes, int clips_per_batch, int clip_len, std::uint64_t seed,
                         int height, int width, int prefetch)
    : scenes_(std::move(scenes)),
      sampler_(scenes_, clips_per_batch, clip_len, seed),
      height_(height),
      width_(width),
      capacity_(static_cast<std::size_t>(std::max(prefetch, 0))) {
  if (capacity_ > 0) thread_ = std::thread([this] { worker(); });
}

BatchStream::~BatchStream() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

BatchStream::Item BatchStream::produce() {
  Item item;
  item.refs = sampler_.next();
  for (const auto& ref : item.refs) {
    item.batch.clips.push_back(load_clip(scenes_[ref.scene], ref.start, sampler_.clip_len(), height_, width_));
    item.batch.clique_sizes.push_back(sampler_.clip_len());
  }
  return item;
}

void BatchStream::worker() {
  while (true) {
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stop_ || queue_.size() < capacity_; });
      if (stop_) return;
    }
    try {
      Item item = produce();
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(item));
    } catch (const std::exception& e) {
      std::lock_guard lock(mu_);
      failure_ = e.what();
      stop_ = true;
    }
    cv_.notify_all();
  }
}

BatchStream::Item BatchStream::next() {
  if (capacity_ == 0) return produce();
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return !queue_.empty() || failure_.has_value(); });
  if (queue_.empty()) throw IoError("batch loading failed: " + *failure_);
  Item item = std::move(queue_.front());
  queue_.pop_front();
  lock.unlock();
  cv_.notify_all();
  return item;
}

}  // namespace glbm
