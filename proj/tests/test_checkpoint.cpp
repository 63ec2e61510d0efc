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

#include "glbm/checkpoint.hpp"
#include "glbm/error.hpp"
#include "support.hpp"

namespace {

glbm::ModelConfig small() {
  glbm::ModelConfig c;
  c.height = 8;
  c.width = 16;
  c.channels = {4, 6};
  c.latent_dim = 5;
  c.activation = glbm::Activation::elu;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("checkpoint: save and load round trip") {
  testsupport::TempDir dir("ckpt");
  glbm::Network<float> net(small());
  net.params()[0].value[0] = 0.125f;
  glbm::save_checkpoint(dir / "run/ckpt", net, 17, {{"loss.alpha", "0.01"}});
  CHECK_FALSE(std::filesystem::exists(dir / "run/ckpt.tmp"));

  const auto ck = glbm::load_checkpoint(dir / "run/ckpt");
  CHECK(ck.epoch == 17);
  CHECK(ck.version == glbm::kCheckpointVersion);
  CHECK(ck.get("loss.alpha") == "0.01");
  CHECK(ck.get("absent", "x") == "x");
  CHECK(ck.net.config().channels == small().channels);
  CHECK(ck.net.config().activation == glbm::Activation::elu);
  for (std::size_t i = 0; i < net.params().size(); ++i) CHECK(ck.net.params()[i].value == net.params()[i].value);
}

TEST_CASE("checkpoint: damaged files are rejected") {
  testsupport::TempDir dir("ckptbad");
  glbm::Network<float> net(small());
  glbm::save_checkpoint(dir / "ok", net, 1);
  CHECK_THROWS_AS(glbm::load_checkpoint(dir / "absent"), glbm::IoError);

  {
    std::ofstream f(dir / "magic");
    f << "NOT-A-CHECKPOINT 1\n";
  }
  CHECK_THROWS_AS(glbm::load_checkpoint(dir / "magic"), glbm::IoError);

  std::ifstream in(dir / "ok", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  {
    std::ofstream f(dir / "short", std::ios::binary);
    f << bytes.substr(0, bytes.size() - 40);
  }
  CHECK_THROWS_AS(glbm::load_checkpoint(dir / "short"), glbm::IoError);

  std::string v2 = bytes;
  v2.replace(v2.find(" 1\n"), 3, " 9\n");
  {
    std::ofstream f(dir / "v9", std::ios::binary);
    f << v2;
  }
  CHECK_THROWS_AS(glbm::load_checkpoint(dir / "v9"), glbm::IoError);

  CHECK_THROWS_AS(glbm::save_checkpoint(dir / "x", net, 1, {{"bad key", "v"}}), glbm::ArgumentError);
}
