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

#include <doctest.h>

#include <fstream>

#include "glbm/dataset.hpp"
#include "glbm/error.hpp"
#include "glbm/image_io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

void write_frames(const fs::path& dir, int count, std::uint8_t value, int size = 16) {
  for (int i = 0; i < count; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "%06d.png", i);
    glbm::write_image(dir / name, glbm::Image(size, size, 3, static_cast<std::uint8_t>(value + i)));
  }
}

}  // namespace

TEST_CASE("dataset: scanning layouts") {
  testsupport::TempDir root("scan");
  write_frames(root / "b/input", 7, 10);
  write_frames(root / "a/input", 5, 10);
  auto scenes = glbm::scan_dataset(root.path(), glbm::Layout::sbm_style);
  REQUIRE(scenes.size() == 2);
  CHECK(scenes[0].scene_id == "a");
  CHECK(scenes[0].frame_count() == 5);
  CHECK(scenes[1].frame_count() == 7);
  CHECK(std::is_sorted(scenes[1].frame_paths.begin(), scenes[1].frame_paths.end()));
  CHECK(scenes[0].height == 16);
  CHECK(glbm::scan_dataset(root.path(), glbm::Layout::sbm_style, 3)[1].frame_count() == 3);

  testsupport::TempDir flat("flat");
  write_frames(flat / "s", 4, 0);
  CHECK(glbm::scan_dataset(flat.path(), glbm::Layout::flat)[0].frame_count() == 4);

  testsupport::TempDir empty("empty");
  CHECK(glbm::scan_dataset(empty.path(), glbm::Layout::flat).empty());
  CHECK_THROWS_AS(glbm::scan_dataset(empty / "missing", glbm::Layout::flat), glbm::IoError);
}

TEST_CASE("dataset: unreadable frames are skipped with a warning") {
  testsupport::TempDir root("unreadable");
  write_frames(root / "s/input", 10, 0);
  {
    std::ofstream f(root / "s/input/000004.png", std::ios::trunc);
    f << "corrupt";
  }
  std::vector<std::string> warnings;
  const auto scenes = glbm::scan_dataset(root.path(), glbm::Layout::sbm_style, 0, &warnings);
  REQUIRE(scenes.size() == 1);
  CHECK(scenes[0].frame_count() == 9);
  CHECK(warnings.size() == 1);

  testsupport::TempDir bad("noframes");
  fs::create_directories(bad / "x/input");
  warnings.clear();
  CHECK(glbm::scan_dataset(bad.path(), glbm::Layout::sbm_style, 0, &warnings).empty());
  CHECK(warnings.size() == 1);
}

TEST_CASE("dataset: load_clip values, resizing and range errors") {
  testsupport::TempDir root("clip");
  glbm::write_image(root / "k/000000.png", glbm::Image(8, 8, 3, 0));
  glbm::write_image(root / "k/000001.png", glbm::Image(8, 8, 1, 255));
  glbm::Image checker(64, 64, 3);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      for (int c = 0; c < 3; ++c) checker.at(y, x, c) = ((x / 4 + y / 4) % 2) ? 255 : 0;
  glbm::write_image(root / "k/000002.png", checker);
  const auto scene = glbm::scan_scene(root / "k");
  CHECK(scene.scene_id == "k");

  const auto black = glbm::load_clip(scene, 0, 1, 8, 8);
  for (float v : black.frames.data) CHECK(v == 0.0f);
  const auto white = glbm::load_clip(scene, 1, 1, 8, 8);
  CHECK(white.frames.c == 3);
  for (float v : white.frames.data) CHECK(v == 1.0f);
  const auto small = glbm::load_clip(scene, 2, 1, 32, 32);
  double mean = 0.0;
  for (float v : small.frames.data) mean += v;
  CHECK(std::abs(mean / small.frames.size() - 0.5) < 0.01);

  CHECK_THROWS_AS(glbm::load_clip(scene, 2, 2, 8, 8), glbm::RangeError);
  CHECK_THROWS_AS(glbm::load_clip(scene, -1, 1, 8, 8), glbm::RangeError);
}

TEST_CASE("dataset: batches") {
  testsupport::TempDir root("batch");
  write_frames(root / "a", 50, 0, 8);
  write_frames(root / "b", 45, 0, 8);
  write_frames(root / "c", 10, 0, 8);
  const auto scenes = glbm::scan_dataset(root.path(), glbm::Layout::flat);

  glbm::BatchSampler s1(scenes, 3, 40, 9), s2(scenes, 3, 40, 9);
  for (int i = 0; i < 20; ++i) {
    const auto r1 = s1.next();
    const auto r2 = s2.next();
    REQUIRE(r1.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(r1[k].scene == r2[k].scene);
      CHECK(r1[k].start == r2[k].start);
      CHECK(r1[k].scene != 2);  // too short
      CHECK(r1[k].start + 40 <= scenes[r1[k].scene].frame_count());
    }
  }
  CHECK_THROWS_AS(glbm::BatchSampler(scenes, 1, 60, 0), glbm::ConfigError);

  glbm::BatchStream sync(scenes, 3, 40, 4, 8, 8, 0);
  glbm::BatchStream ahead(scenes, 3, 40, 4, 8, 8, 2);
  for (int i = 0; i < 3; ++i) {
    const auto a = sync.next();
    const auto b = ahead.next();
    CHECK(a.batch.total_frames() == 120);
    CHECK(a.batch.clique_sizes == std::vector<int>{40, 40, 40});
    CHECK(a.batch.stacked().data == b.batch.stacked().data);
  }

  glbm::BatchStream single(scenes, 1, 1, 0, 8, 8, 0);
  const auto one = single.next();
  CHECK(one.batch.clique_sizes == std::vector<int>{1});
  CHECK(one.batch.stacked().n == 1);
}
