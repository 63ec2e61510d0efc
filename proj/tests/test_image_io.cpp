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

#include "glbm/error.hpp"
#include "glbm/image_io.hpp"
#include "support.hpp"

TEST_CASE("image io: png round trip and planar conversion") {
  testsupport::TempDir dir("imgio");
  glbm::Image img(5, 7, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 13);
  glbm::write_image(dir / "sub/a.png", img);
  CHECK(glbm::is_readable_image(dir / "sub/a.png"));
  const glbm::Image back = glbm::read_image(dir / "sub/a.png");
  CHECK(back.pixels == img.pixels);

  std::vector<float> planar(3 * 5 * 7);
  glbm::image_to_planar(img, 3, planar.data());
  CHECK(planar[0] == doctest::Approx(img.at(0, 0, 0) / 255.0));
  CHECK(planar[35] == doctest::Approx(img.at(0, 0, 1) / 255.0));
  CHECK(glbm::planar_to_image(planar.data(), 3, 5, 7).pixels == img.pixels);
}

TEST_CASE("image io: gray conversion, masks and failures") {
  glbm::Image px(1, 1, 3);
  px.at(0, 0, 0) = 200;
  px.at(0, 0, 1) = 100;
  px.at(0, 0, 2) = 50;
  CHECK(glbm::to_gray(px).pixels[0] == 124);  // 0.299*200 + 0.587*100 + 0.114*50 = 124.25

  testsupport::TempDir dir("mask");
  std::vector<std::uint8_t> m{0, 1, 1, 0, 0, 1};
  glbm::write_mask(dir / "m.png", m.data(), 2, 3);
  int h = 0, w = 0;
  CHECK(glbm::read_mask(dir / "m.png", h, w) == m);
  CHECK(h == 2);
  CHECK(w == 3);

  CHECK_THROWS_AS(glbm::read_image(dir / "none.png"), glbm::IoError);
  {
    std::ofstream f(dir / "junk.png");
    f << "not an image";
  }
  CHECK_FALSE(glbm::is_readable_image(dir / "junk.png"));
}
