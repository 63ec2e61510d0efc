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

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "glbm/tensor.hpp"

namespace glbm {

enum class Layout { flat, sbm_style };

Layout parse_layout(const std::string& s);

struct SceneDescriptor {
  std::string scene_id;
  std::filesystem::path root;  // scene directory
  std::vector<std::filesystem::path> frame_paths;
  int height = 0;
  int width = 0;

  int frame_count() const { return static_cast<int>(frame_paths.size()); }
};

// Frames of one scene, planar [c][C][H][W] with intensities in [0,1].
struct FrameClip {
  std::string scene_id;
  int start_index = 0;
  Tensor4<float> frames;

  int length() const { return frames.n; }
};

struct Batch {
  std::vector<FrameClip> clips;
  std::vector<int> clique_sizes;

  int total_frames() const;
  // Concatenation of all clips along the frame axis.
  Tensor4<float> stacked() const;
};

struct ClipRef {
  int scene = 0;  // index into the scene list
  int start = 0;
};

// Lists every scene under `root`, sorted by scene id. Unreadable frames and
// scenes without frames are skipped; a message is appended to `warnings`
// (when given) and printed to stderr. `max_frames` > 0 truncates each scene.
std::vector<SceneDescriptor> scan_dataset(const std::filesystem::path& root, Layout layout, int max_frames = 0,
                                          std::vector<std::string>* warnings = nullptr);

// Reads one scene directory, detecting an `input/` subdirectory.
SceneDescriptor scan_scene(const std::filesystem::path& scene_dir, int max_frames = 0,
                           std::vector<std::string>* warnings = nullptr);

FrameClip load_clip(const SceneDescriptor& scene, int start, int length, int height, int width, int channels = 3);

// Deterministic stream of (scene, start) windows. Scenes shorter than
// `clip_len` are never drawn.
class BatchSampler {
 public:
  BatchSampler(const std::vector<SceneDescriptor>& scenes, int clips_per_batch, int clip_len, std::uint64_t seed);

  std::vector<ClipRef> next();
  int clips_per_batch() const { return clips_per_batch_; }
  int clip_len() const { return clip_len_; }

 private:
  std::vector<int> eligible_;
  std::vector<int> frame_counts_;
  int clips_per_batch_;
  int clip_len_;
  std::mt19937_64 rng_;
};

// Loads the batches planned by a BatchSampler, optionally on a background
// thread with a bounded queue of `prefetch` batches.
class BatchStream {
 public:
  BatchStream(std::vector<SceneDescriptor> scenes, int clips_per_batch, int clip_len, std::uint64_t seed, int height,
              int width, int prefetch);
  ~BatchStream();
  BatchStream(const BatchStream&) = delete;
  BatchStream& operator=(const BatchStream&) = delete;

  struct Item {
    Batch batch;
    std::vector<ClipRef> refs;
  };
  Item next();

 private:
  Item produce();
  void worker();

  std::vector<SceneDescriptor> scenes_;
  BatchSampler sampler_;
  int height_;
  int width_;
  std::size_t capacity_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Item> queue_;
  std::optional<std::string> failure_;
  bool stop_ = false;
  std::thread thread_;
};

}  // namespace glbm
