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

#include "glbm/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "glbm/error.hpp"

namespace fs = std::filesystem;

namespace glbm {
namespace {

using Color = std::array<double, 3>;

double luma(const Color& c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; }

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

std::string frame_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d.png", i);
  return buf;
}

Image make_background(const SynthSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> level(50.0, 200.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const Color c0{level(rng), level(rng), level(rng)};
  const Color c1{level(rng), level(rng), level(rng)};
  const double theta = angle(rng);
  const double dx = std::cos(theta), dy = std::sin(theta);

  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves;
  if (spec.background == BackgroundKind::texture) {
    std::uniform_real_distribution<double> freq(-0.25, 0.25);
    std::uniform_real_distribution<double> amp(6.0, 14.0);
    for (int k = 0; k < 4; ++k) waves.push_back({freq(rng), freq(rng), angle(rng), amp(rng)});
  }

  const double span = std::abs(dx) * (spec.width - 1) + std::abs(dy) * (spec.height - 1);
  const double base = std::min(0.0, dx * (spec.width - 1)) + std::min(0.0, dy * (spec.height - 1));
  Image img(spec.height, spec.width, 3);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      const double t = span > 0.0 ? (dx * x + dy * y - base) / span : 0.0;
      double tex = 0.0;
      for (const auto& w : waves) tex += w.amp * std::sin(w.fx * x + w.fy * y + w.phase);
      for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = to_u8(c0[ch] + (c1[ch] - c0[ch]) * t + tex);
    }
  return img;
}

struct Object {
  double x, y;    // top-left corner
  double vx, vy;  // px per frame
  bool disk;
  Color color;
};

bool covers(const Object& o, int size, int x, int y) {
  const int ox = static_cast<int>(std::lround(o.x));
  const int oy = static_cast<int>(std::lround(o.y));
  if (x < ox || y < oy || x >= ox + size || y >= oy + size) return false;
  if (!o.disk) return true;
  const double r = size / 2.0;
  const double cx = x + 0.5 - (ox + r);
  const double cy = y + 0.5 - (oy + r);
  return cx * cx + cy * cy <= r * r;
}

void advance(Object& o, int size, int height, int width) {
  o.x += o.vx;
  o.y += o.vy;
  const double max_x = width - size, max_y = height - size;
  if (o.x < 0.0) o.x = -o.x, o.vx = -o.vx;
  if (o.x > max_x) o.x = 2.0 * max_x - o.x, o.vx = -o.vx;
  if (o.y < 0.0) o.y = -o.y, o.vy = -o.vy;
  if (o.y > max_y) o.y = 2.0 * max_y - o.y, o.vy = -o.vy;
  o.x = std::clamp(o.x, 0.0, max_x);
  o.y = std::clamp(o.y, 0.0, max_y);
}

}  // namespace

void SynthSpec::validate() const {
  if (scenes < 1 || frames < 1) throw ConfigError("synth: scenes and frames must be positive");
  if (height < 1 || width < 1) throw ConfigError("synth: resolution must be positive");
  if (objects < 0) throw ConfigError("synth: objects must be nonnegative");
  if (objects > 0 && (object_size < 1 || object_size > std::min(height, width)))
    throw ConfigError("synth: object_size must fit inside the frame");
  if (!std::isfinite(velocity) || velocity < 0.0) throw ConfigError("synth: velocity must be finite and nonnegative");
  if (intensity < -1 || intensity > 255) throw ConfigError("synth: intensity must be -1 or in [0,255]");
  if (jitter < 0) throw ConfigError("synth: jitter must be nonnegative");
  if (!std::isfinite(drift) || drift < 0.0 || drift >= 1.0) throw ConfigError("synth: drift must lie in [0,1)");
  if (foreground_fraction() > 0.3)
    throw ConfigError("synth: foreground covers " + std::to_string(foreground_fraction()) +
                      " of the frame, at most 0.3 allowed");
}

double SynthSpec::foreground_fraction() const {
  return static_cast<double>(objects) * object_size * object_size / (static_cast<double>(height) * width);
}

SynthScene synth_scene(const SynthSpec& spec, int index) {
  spec.validate();
  require<RangeError>(index >= 0 && index < spec.scenes, "synth_scene: scene index out of range");
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);

  SynthScene scene;
  char id[16];
  std::snprintf(id, sizeof id, "scene%02d", index);
  scene.scene_id = id;
  scene.background = make_background(spec, rng);
  const Image& bg = scene.background;

  Color mean{0, 0, 0};
  for (int y = 0; y < bg.height; ++y)
    for (int x = 0; x < bg.width; ++x)
      for (int ch = 0; ch < 3; ++ch) mean[ch] += bg.at(y, x, ch);
  for (double& m : mean) m /= static_cast<double>(bg.height) * bg.width;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Object> objs;
  for (int k = 0; k < spec.objects; ++k) {
    Object o;
    o.x = unit(rng) * (spec.width - spec.object_size);
    o.y = unit(rng) * (spec.height - spec.object_size);
    const double theta = unit(rng) * 2.0 * std::numbers::pi;
    o.vx = spec.velocity * std::cos(theta);
    o.vy = spec.velocity * std::sin(theta);
    o.disk = spec.object_shape == ObjectShape::disk || (spec.object_shape == ObjectShape::mixed && k % 2 == 1);
    if (spec.intensity >= 0) {
      o.color = {double(spec.intensity), double(spec.intensity), double(spec.intensity)};
    } else {
      const bool bright = luma(mean) < 128.0;
      for (double& c : o.color) c = bright ? 225.0 + 30.0 * unit(rng) : 30.0 * unit(rng);
    }
    objs.push_back(o);
  }

  std::uniform_int_distribution<int> shift(-spec.jitter, spec.jitter);
  for (int f = 0; f < spec.frames; ++f) {
    const int sx = spec.jitter ? shift(rng) : 0;
    const int sy = spec.jitter ? shift(rng) : 0;
    const double gain = 1.0 + spec.drift * std::sin(2.0 * std::numbers::pi * f / spec.frames);
    Image frame(spec.height, spec.width, 3);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(spec.height) * spec.width, 0);
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        const Object* hit = nullptr;
        for (const auto& o : objs)
          if (covers(o, spec.object_size, x, y)) hit = &o;
        const int by = std::clamp(y + sy, 0, spec.height - 1);
        const int bx = std::clamp(x + sx, 0, spec.width - 1);
        for (int ch = 0; ch < 3; ++ch) {
          const double v = hit ? hit->color[ch] : static_cast<double>(bg.at(by, bx, ch));
          frame.at(y, x, ch) = spec.drift > 0.0 ? to_u8(v * gain) : static_cast<std::uint8_t>(std::lround(v));
        }
        mask[static_cast<std::size_t>(y) * spec.width + x] = hit ? 1 : 0;
      }
    scene.frames.push_back(std::move(frame));
    scene.masks.push_back(std::move(mask));
    for (auto& o : objs) advance(o, spec.object_size, spec.height, spec.width);
  }
  return scene;
}

std::vector<std::string> synth_generate(const SynthSpec& spec, const fs::path& out) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

  std::vector<std::string> ids;
  std::ofstream manifest(out / "manifest.txt");
  if (!manifest) throw IoError("cannot write " + (out / "manifest.txt").string());
  manifest << "synth.scenes = " << spec.scenes << '\n'
           << "synth.frames = " << spec.frames << '\n'
           << "synth.height = " << spec.height << '\n'
           << "synth.width = " << spec.width << '\n'
           << "synth.background = " << (spec.background == BackgroundKind::gradient ? "gradient" : "texture") << '\n'
           << "synth.objects = " << spec.objects << '\n'
           << "synth.object_size = " << spec.object_size << '\n'
           << "synth.object_shape = "
           << (spec.object_shape == ObjectShape::square ? "square"
               : spec.object_shape == ObjectShape::disk ? "disk"
                                                        : "mixed")
           << '\n'
           << "synth.velocity = " << spec.velocity << '\n'
           << "synth.intensity = " << spec.intensity << '\n'
           << "synth.jitter = " << spec.jitter << '\n'
           << "synth.drift = " << spec.drift << '\n'
           << "synth.seed = " << spec.seed << '\n';

  for (int s = 0; s < spec.scenes; ++s) {
    const SynthScene scene = synth_scene(spec, s);
    const fs::path dir = out / scene.scene_id;
    write_image(dir / "GT_background" / "background.png", scene.background);
    std::size_t fg = 0;
    for (int f = 0; f < spec.frames; ++f) {
      write_image(dir / "input" / frame_name(f), scene.frames[f]);
      write_mask(dir / "groundtruth" / frame_name(f), scene.masks[f].data(), spec.height, spec.width);
      fg += static_cast<std::size_t>(std::count(scene.masks[f].begin(), scene.masks[f].end(), 1));
    }
    manifest << "scene = " << scene.scene_id << " frames=" << spec.frames << " foreground_pixels=" << fg << '\n';
    ids.push_back(scene.scene_id);
  }
  if (!manifest) throw IoError("failed while writing " + (out / "manifest.txt").string());
  return ids;
}

}  // namespace glbm
