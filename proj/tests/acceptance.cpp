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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Criteria 7 and 8 train real models and take several minutes.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glbm/checkpoint.hpp"
#include "glbm/config.hpp"
#include "glbm/eval_metrics.hpp"
#include "glbm/flow_mask.hpp"
#include "glbm/graph_prior.hpp"
#include "glbm/network.hpp"
#include "glbm/objective.hpp"
#include "glbm/pipeline.hpp"
#include "glbm/posterior.hpp"
#include "glbm/synth.hpp"
#include "glbm/trainer.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using testsupport::rel_err;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome kl_oracle() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> ncl(1, 3), dim(1, 4);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    std::vector<int> cliques(ncl(rng));
    int n = 0;
    for (auto& c : cliques) {
      c = std::uniform_int_distribution<int>(1, 6)(rng);
      n += c;
    }
    // Keep the total frame count within 6.
    while (n > 6) {
      auto it = std::max_element(cliques.begin(), cliques.end());
      --*it;
      --n;
    }
    cliques.erase(std::remove(cliques.begin(), cliques.end(), 0), cliques.end());
    const int d = dim(rng);
    const Eigen::MatrixXd mu = testsupport::random_matrix(rng, n, d);
    const Eigen::MatrixXd scale = testsupport::random_matrix(rng, n, d, 0.3, 2.0);
    const auto q = glbm::clique_prior(cliques, 1.0);
    const double kl = glbm::kl_divergence(glbm::assemble_posterior(mu, scale, q), q);
    worst = std::max(worst, rel_err(kl, testsupport::dense_kl(mu, scale, testsupport::dense_prior(cliques, 1.0))));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 1e-8 && secs < 10.0, fmt("max rel err %.3g over 50 instances, %.2f s", worst, secs)};
}

Outcome edgeless() {
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = 1 + t % 5, d = 1 + t % 4;
    const Eigen::MatrixXd mu = testsupport::random_matrix(rng, n, d, -2.0, 2.0);
    const Eigen::MatrixXd s = testsupport::random_matrix(rng, n, d, 0.2, 3.0);
    // Singleton cliques have no edges, so q = lambda I.
    const auto q = glbm::clique_prior(std::vector<int>(n, 1), 1.0);
    const double kl = glbm::kl_divergence(glbm::assemble_posterior(mu, s, q), q);
    double closed = 0.0;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k)
        closed += 0.5 * (1.0 / (s(i, k) * s(i, k)) + mu(i, k) * mu(i, k) - 1.0 + 2.0 * std::log(s(i, k)));
    worst = std::max(worst, std::abs(kl - closed));
  }
  return {worst <= 1e-10, fmt("max abs err %.3g over 20 instances", worst)};
}

double grad_err(double fd, double an) { return std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}); }

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(103);
  const int c = 2, d = 2, hw = 16;
  const std::vector<int> cliques{c};
  const auto q = glbm::clique_prior(cliques, 1.0);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  glbm::Tensor4<double> v(c, 3, hw, hw), b(c, 3, hw, hw);
  for (auto& x : v.data) x = u(rng);
  for (auto& x : b.data) x = u(rng);
  glbm::MaskStack moving(c, hw, hw);
  for (auto& m : moving.v) m = u(rng) > 0.8;
  Eigen::MatrixXd mu = testsupport::random_matrix(rng, c, d);
  Eigen::MatrixXd scale = testsupport::random_matrix(rng, c, d, 0.5, 1.5);
  const glbm::LossWeights w{0.05, 0.5, 1.0};

  auto loss = [&] { return glbm::total_loss(v, b, glbm::assemble_posterior(mu, scale, q), q, moving, w).total; };
  glbm::LossGradients<double> g;
  glbm::total_loss(v, b, glbm::assemble_posterior(mu, scale, q), q, moving, w, &g);
  double worst = 0.0;
  for (int i = 0; i < c; ++i)
    for (int k = 0; k < d; ++k) {
      worst = std::max(worst, grad_err(testsupport::central_diff(loss, mu(i, k), 1e-6), g.mu(i, k)));
      worst = std::max(worst, grad_err(testsupport::central_diff(loss, scale(i, k), 1e-6), g.scale(i, k)));
    }
  for (std::size_t e = 0; e < b.data.size(); e += 97)
    worst = std::max(worst, grad_err(testsupport::central_diff(loss, b.data[e], 1e-7), g.recon.data[e]));

  // Network parameters through the full step with fixed noise.
  glbm::ModelConfig m;
  m.height = hw;
  m.width = hw;
  m.channels = {4, 4};
  m.latent_dim = d;
  m.activation = glbm::Activation::elu;
  m.scale_init = 1.0;
  m.seed = 9;
  glbm::Network<double> net(m);
  const Eigen::MatrixXd noise = testsupport::gaussian_matrix(rng, c, d);
  glbm::StepOptions opts;
  opts.weights = w;
  net.zero_grad();
  glbm::train_step(net, v, cliques, moving, noise, opts);
  auto net_loss = [&] { return glbm::evaluate_loss(net, v, cliques, moving, noise, opts).total; };
  int checked = 0;
  for (auto& p : net.params()) {
    const std::size_t stride = std::max<std::size_t>(1, p.value.size() / 4);
    for (std::size_t e = 0; e < p.value.size(); e += stride, ++checked)
      worst = std::max(worst, grad_err(testsupport::central_diff(net_loss, p.value[e], 1e-6), p.grad[e]));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 1e-4 && secs < 60.0,
          fmt("max rel err %.3g (mu, scale, recon and %.0f parameter entries), %.2f s", worst, checked, secs)};
}

Outcome nuclear() {
  std::mt19937_64 rng(104);
  double worst = 0.0, worst_rot = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int r = 1 + static_cast<int>(rng() % 40), cols = 1 + static_cast<int>(rng() % 64);
    const Eigen::MatrixXd f = testsupport::random_matrix(rng, r, cols);
    // Eigenvalues of the smaller Gram matrix.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r < cols ? Eigen::MatrixXd(f * f.transpose())
                                                                : Eigen::MatrixXd(f.transpose() * f));
    const double oracle = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double nn = glbm::nuclear_norm(f);
    worst = std::max(worst, std::abs(nn - oracle) / std::max(1.0, oracle));
    const Eigen::MatrixXd rot = Eigen::HouseholderQR<Eigen::MatrixXd>(testsupport::gaussian_matrix(rng, r, r)).householderQ();
    worst_rot = std::max(worst_rot, std::abs(glbm::nuclear_norm(rot * f) - nn) / std::max(1.0, nn));
  }
  return {worst <= 1e-8 && worst_rot <= 1e-8,
          fmt("oracle err %.3g, rotation err %.3g over 20 matrices up to 40x64", worst, worst_rot)};
}

Outcome sampler() {
  std::mt19937_64 rng(105);
  const std::vector<int> cliques{3, 2, 3};
  const int n = 8, d = 2, draws = 100000;
  const auto q = glbm::clique_prior(cliques, 1.0);
  const Eigen::MatrixXd mu = testsupport::random_matrix(rng, n, d);
  const Eigen::MatrixXd scale = testsupport::random_matrix(rng, n, d, 0.8, 1.5);
  const auto post = glbm::assemble_posterior(mu, scale, q);
  std::vector<Eigen::MatrixXd> sum(d, Eigen::MatrixXd::Zero(n, n));
  for (int t = 0; t < draws; ++t) {
    const Eigen::MatrixXd z = glbm::sample(post, testsupport::gaussian_matrix(rng, n, d)) - mu;
    for (int k = 0; k < d; ++k) sum[k].noalias() += z.col(k) * z.col(k).transpose();
  }
  double worst = 0.0;
  for (int ci = 0; ci < 3; ++ci)
    for (int k = 0; k < d; ++k) {
      const Eigen::MatrixXd cov = glbm::precision_block(post, q, ci, k).inverse();
      const int off = q.offsets[ci], sz = cliques[ci];
      const Eigen::MatrixXd emp = sum[k].block(off, off, sz, sz) / draws;
      worst = std::max(worst, (emp - cov).cwiseAbs().maxCoeff());
    }
  // Cross-clique blocks must be uncorrelated.
  double cross = 0.0;
  for (int k = 0; k < d; ++k) cross = std::max(cross, (sum[k].block(0, 3, 3, 5) / draws).cwiseAbs().maxCoeff());
  return {worst <= 0.05 && cross <= 0.05, fmt("max entry err %.4f, max cross-clique cov %.4f (1e5 draws)", worst, cross)};
}

float texture(double x, double y) {
  return static_cast<float>(0.45 + 0.18 * std::sin(0.35 * x + 0.1 * y) + 0.12 * std::cos(0.23 * y - 0.05 * x) +
                            0.08 * std::sin(0.11 * (x + y)));
}

Outcome motion_square() {
  const int n = 5, h = 100, w = 100, side = 10, step = 5;
  auto inside = [&](int i, int y, int x) { return y >= 45 && y < 45 + side && x >= 20 + step * i && x < 20 + side + step * i; };
  glbm::Tensor4<float> frames(n, 1, h, w);
  for (int i = 0; i < n; ++i)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int sx = x - step * i;
        frames.at(i, 0, y, x) = inside(i, y, x) ? 0.8f + 0.15f * std::sin(1.3 * sx) * std::cos(1.1 * y) : texture(x, y);
      }
  const auto mask = glbm::sequence_motion_mask(frames, {}, 2.0, n);
  // Frame 0 copies the first pair's mask.
  std::size_t tp = 0, pos = 0, fp = 0, neg = 0;
  for (int i = 1; i < n; ++i)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const bool m = mask.at(i, y, x) != 0;
        if (inside(i, y, x)) {
          ++pos;
          tp += m;
        } else {
          ++neg;
          fp += m;
        }
      }
  const double recall = static_cast<double>(tp) / pos, fpr = static_cast<double>(fp) / neg;
  return {recall >= 0.9 && fpr <= 0.05, fmt("recall %.4f, false-positive rate %.4f", recall, fpr)};
}

// Reduced schedule used by the synthetic experiments.
glbm::RunConfig synthetic_config() {
  glbm::RunConfig c;
  c.set("dataset.height", "96");
  c.set("dataset.width", "96");
  c.set("dataset.prefetch", "0");
  c.set("model.channels", "16,32,64,64");
  c.set("model.latent_dim", "16");
  c.set("train.epochs", "200");
  c.set("train.clip_len", "20");
  c.set("train.save_every", "0");
  c.set("train.learning_rate", "0.002");
  c.set("train.lr_patience", "30");
  // About 1 / (96 * 96 * 3).
  c.set("loss.kl_weight", "3.6e-5");
  c.set("loss.alpha", "1e-4");
  c.set("synth.scenes", "3");
  c.set("synth.frames", "60");
  c.set("synth.seed", "7");
  return c;
}

Outcome recovery(const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  glbm::RunConfig c = synthetic_config();
  const fs::path data = work / "data";
  const auto ids = glbm::synth_generate(glbm::synth_spec_from(c), data);
  const auto result = glbm::train_run(c, data, work / "run");
  glbm::Network<float> net = glbm::load_checkpoint(result.checkpoint).net;
  bool pass = true;
  std::ostringstream os;
  for (const auto& id : ids) {
    const fs::path scene = data / id;
    glbm::estimate_run(net, scene, glbm::BackgroundMode::median, work / "est" / id);
    const auto r = glbm::eval_sbm_run(c, scene / "GT_background/background.png", work / "est" / id / "background.png");
    glbm::subtract_run(c, scene, work / "est" / id / "background.png", work / "fg" / id);
    const auto s = glbm::eval_bs_run(work / "fg" / id, scene / "groundtruth");
    pass = pass && r.age <= 10.0 && r.psnr >= 25.0 && s.f_measure >= 0.6;
    os << id << fmt(" AGE %.2f PSNR %.2f F %.3f; ", r.age, r.psnr, s.f_measure);
  }
  const double mins = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  os << fmt("%.1f min", mins);
  return {pass, os.str()};
}

Outcome low_rank(const fs::path& work) {
  glbm::RunConfig c = synthetic_config();
  c.set("train.epochs", "40");
  const fs::path data = work / "data";
  if (!fs::exists(data / "manifest.txt")) glbm::synth_generate(glbm::synth_spec_from(c), data);
  std::vector<double> finals;
  std::ostringstream os;
  for (const char* alpha : {"0", "0.01", "0.1"}) {
    c.set("loss.alpha", alpha);
    const auto r = glbm::train_run(c, data, work / (std::string("alpha-") + alpha));
    const int cliques = r.log.records.back().cliques;
    finals.push_back(r.log.last_epoch_mean([](const glbm::TrainRecord& t) { return t.loss.nuclear; }) / cliques);
    os << "alpha " << alpha << fmt(": %.3f; ", finals.back());
  }
  const bool pass = finals[1] <= finals[0] && finals[2] <= finals[1];
  return {pass, os.str() + "final-epoch mean per-clique nuclear norm"};
}

Outcome metric_fixtures() {
  bool ok = true;
  std::ostringstream os;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) {
      ok = false;
      os << what << " failed; ";
    }
  };
  glbm::Image a(48, 64, 3);
  for (std::size_t i = 0; i < a.pixels.size(); ++i) a.pixels[i] = static_cast<std::uint8_t>((i * 53 + i / 7) % 256);
  const auto same = glbm::sbm_metrics(a, a);
  expect(same.age == 0 && same.peps == 0 && same.pceps == 0, "identical AGE/pEPs/pCEPS");
  expect(std::abs(same.psnr - 100.0) <= 1e-6 && std::abs(same.msssim - 1.0) <= 1e-6 && std::abs(same.cqm - 100.0) <= 1e-6,
         "identical PSNR/MSSSIM/CQM");
  const auto sat = glbm::sbm_metrics(glbm::Image(32, 32, 3, 0), glbm::Image(32, 32, 3, 255));
  expect(sat.age == 255 && sat.peps == 1 && sat.pceps == 1 && std::abs(sat.psnr) <= 1e-6, "saturating case");
  glbm::Image gt(100, 100, 1, 90), est = gt;
  est.at(40, 60, 0) = 200;
  const auto one = glbm::sbm_metrics(gt, est);
  expect(one.peps == 1e-4 && one.pceps == 0, "single error pixel");
  expect(glbm::kCqmLumaWeight == 0.9449 && glbm::kCqmChromaWeight == 0.0551, "CQM weights");

  glbm::MaskStack g(1, 10, 10), p(1, 10, 10);
  for (int y = 2; y < 6; ++y)
    for (int x = 2; x < 8; ++x) g.at(0, y, x) = 1;
  auto s = glbm::bs_scores(g, g);
  expect(s.precision == 1 && s.recall == 1 && s.f_measure == 1, "pred = gt");
  s = glbm::bs_scores(p, g);
  expect(s.recall == 0 && s.f_measure == 0, "empty prediction");
  for (int y = 2; y < 4; ++y)
    for (int x = 2; x < 8; ++x) p.at(0, y, x) = 1;
  s = glbm::bs_scores(p, g);
  expect(s.precision == 1 && s.recall == 0.5 && std::abs(s.f_measure - 2.0 / 3.0) <= 1e-12, "half rectangle");
  return {ok, ok ? "sbm and bs fixtures exact, CQM weights 0.9449/0.0551" : os.str()};
}

Outcome recipe() {
  const glbm::TrainConfig t;
  const glbm::RunConfig rc;
  const glbm::TrainConfig from_keys = glbm::train_config_from(rc);
  auto same = [](const glbm::TrainConfig& x) {
    return x.optimizer == "adam" && x.lr_schedule == glbm::LrSchedule::plateau && x.grad_clip_norm == 5.0 &&
           x.clips_per_batch == 3 && x.clip_len == 40 && x.epochs == 500;
  };
  const bool pass = same(t) && same(from_keys);
  return {pass, "optimizer " + t.optimizer + ", schedule " + glbm::to_string(t.lr_schedule) +
                    fmt(", clip %.1f, batch %.0f x %.0f", t.grad_clip_norm, t.clips_per_batch, t.clip_len) +
                    fmt(", %.0f epochs", t.epochs)};
}

}  // namespace

int main() {
  testsupport::TempDir work("acceptance");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 structured KL matches the dense oracle", kl_oracle},
      {"2 edgeless KL reduces to the per-frame closed form", edgeless},
      {"3 loss and parameter gradients match central differences", gradients},
      {"4 nuclear norm matches the eigenvalue oracle", nuclear},
      {"5 structured samples have covariance P^-1", sampler},
      {"6 moving-square motion mask", motion_square},
      {"7 synthetic background recovery", [&] { return recovery(work.path()); }},
      {"8 nuclear norm non-increasing in alpha", [&] { return low_rank(work.path()); }},
      {"9 metric fixtures", metric_fixtures},
      {"10 default training recipe", recipe},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
