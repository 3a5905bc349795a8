// Copyright (c) 2026 The nvsr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "nvsr/error.hpp"
#include "nvsr/synthetic.hpp"
#include "nvsr/train.hpp"
#include "support/tempdir.hpp"

using namespace nvsr;

namespace {

ModelConfig small_config(Variant v) {
  ModelConfig c = desk_config(v);
  c.base_width = 8;
  c.output_h = 32;
  c.output_w = 64;
  return c;
}

VideoClip small_clip(int frames = 4) {
  return make_synthetic_video(SyntheticKind::textured_noise, frames, 32, 64, 3);
}

SRModel<float> fresh_srb(const SrbConfig& config = {}) {
  Rng rng(99);
  return SRModel<float>(config, rng);
}

std::uint64_t checksum(const SRModel<float>& srb) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& p : srb.parameters())
    for (float v : p.data()) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      h = (h ^ bits) * 1099511628211ULL;
    }
  return h;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

DegradationRanges identity_color() {
  DegradationRanges r;
  r.saturation = {1, 1};
  r.gain = {1, 1};
  r.bias = {0, 0};
  return r;
}

}  // namespace

TEST_CASE("flat-color corpus is learned to near-zero L1 within 200 steps") {
  std::vector<Frame> corpus;
  for (float v : {0.1f, 0.35f, 0.6f, 0.85f}) {
    std::vector<float> planar(3 * 16 * 16);
    for (std::size_t i = 0; i < planar.size(); ++i) planar[i] = v * (0.7f + 0.1f * float(i / 256));
    corpus.emplace_back(16, 16, std::move(planar));
  }
  PretrainOptions o;
  o.epochs = 4;
  o.crops_per_epoch = 50;
  o.crop_size = 8;
  o.degradation = identity_color();
  const auto r = pretrain_sr(corpus, {4, 1, 2}, o);
  REQUIRE(r.epoch_loss.size() == 4);
  CHECK(r.epoch_loss.back() < 0.01);
}

TEST_CASE("pre-training is deterministic and lowers the loss") {
  // Sharp checker edges under blur: recoverable detail, so the loss must fall.
  std::vector<Frame> corpus;
  for (int i = 0; i < 6; ++i) {
    SyntheticOptions so;
    so.checker_cell = 3 + i;
    corpus.push_back(make_synthetic_video(SyntheticKind::moving_checker, 1, 64, 64, std::uint64_t(i), so)[0]);
  }
  PretrainOptions o;
  o.epochs = 40;
  o.crops_per_epoch = 32;
  o.degradation = identity_color();
  o.seed = 4;
  const auto a = pretrain_sr(corpus, {}, o);
  const auto b = pretrain_sr(corpus, {}, o);
  CHECK(a.epoch_loss == b.epoch_loss);
  CHECK(checksum(a.model) == checksum(b.model));
  CHECK(a.epoch_loss.back() < a.epoch_loss.front());

  CHECK_THROWS_AS(pretrain_sr({}, {}, o), ConfigError);
  o.crop_size = 66;
  CHECK_THROWS_AS(pretrain_sr(corpus, {}, o), InvalidCrop);
}

TEST_CASE("sr pairs pair a crop with its degraded half-size version") {
  const auto image = make_texture_corpus(1, 40, 40, 0)[0];
  Rng rng(1);
  DegradationSampler sampler(2);
  const auto pair = make_sr_pair(image, 16, rng, sampler, identity_color());
  CHECK(pair.hr.height() == 16);
  CHECK(pair.degraded_lr.height() == 8);
  CHECK(pair.degraded_lr.width() == 8);
  CHECK_THROWS_AS(make_sr_pair(image, 15, rng, sampler, {}), InvalidCrop);
}

TEST_CASE("fit rejects mismatched inputs") {
  const auto clip = small_clip(2);
  TrainSchedule s;
  s.total_epochs = 1;
  CHECK_THROWS_AS(fit_video(clip, desk_config(Variant::nerv), s, nullptr), ConfigError);
  CHECK_THROWS_AS(fit_video(clip, small_config(Variant::sr_nerv), s, nullptr), ConfigError);
}

TEST_CASE("fitting is deterministic and writes its artifacts") {
  testing::TempDir a, b;
  const auto clip = small_clip();
  TrainSchedule s;
  s.total_epochs = 6;
  s.srb_finetune_start = 3;
  s.seed = 8;
  s.eval_every = 2;
  const auto srb = fresh_srb();
  const auto ra = fit_video(clip, small_config(Variant::sr_nerv), s, &srb, {a.path()});
  const auto rb = fit_video(clip, small_config(Variant::sr_nerv), s, &srb, {b.path()});
  CHECK(ra.record.epoch_loss == rb.record.epoch_loss);
  for (const char* name : {"config.txt", "loss.csv", "eval.csv", "metrics.csv", "checkpoint.nvck"}) {
    CAPTURE(name);
    REQUIRE(std::filesystem::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }
  // epoch,lr,srb_trainable,loss
  const std::string loss = slurp(a / "loss.csv");
  CHECK(loss.rfind("epoch,lr,srb_trainable,loss\n", 0) == 0);
  CHECK(std::count(loss.begin(), loss.end(), '\n') == 7);
  CHECK(ra.record.evals.size() == 3);
  CHECK(ra.record.srb_trainable == std::vector<bool>{false, false, false, true, true, true});
  CHECK(ra.record.config_hash.size() == 16);
}

TEST_CASE("frozen SR block keeps its bytes until the start epoch") {
  const auto clip = small_clip();
  const auto srb = fresh_srb();
  const auto initial = checksum(srb);
  TrainSchedule s;
  s.total_epochs = 7;  // the last epoch runs at lr 0
  s.srb_finetune_start = 4;
  std::vector<std::uint64_t> sums;
  FitOptions o;
  o.on_epoch_end = [&](int, const VideoModel<float>& m) { sums.push_back(checksum(*m.srb())); };
  fit_video(clip, small_config(Variant::sr_nerv), s, &srb, o);
  REQUIRE(sums.size() == 7);
  for (int e = 0; e < 4; ++e) CHECK(sums[std::size_t(e)] == initial);
  CHECK(sums[4] != initial);
  CHECK(sums[5] != sums[4]);
}

TEST_CASE("resumed training follows the uninterrupted trajectory") {
  const auto clip = small_clip();
  const auto srb = fresh_srb();
  TrainSchedule s;
  s.total_epochs = 6;
  s.srb_finetune_start = 2;
  s.seed = 3;
  for (int cut : {1, 4}) {
    CAPTURE(cut);
    const auto full = fit_video(clip, small_config(Variant::sr_nerv), s, &srb);
    FitOptions first;
    first.stop_after = cut;
    const auto part = fit_video(clip, small_config(Variant::sr_nerv), s, &srb, first);
    CHECK(part.record.epoch_loss.size() == std::size_t(cut));
    const Checkpoint saved = decode_checkpoint(encode_checkpoint(part.checkpoint));
    FitOptions second;
    second.resume = &saved;
    const auto rest = fit_video(clip, small_config(Variant::sr_nerv), s, nullptr, second);
    CHECK(rest.record.epoch_loss == full.record.epoch_loss);
    CHECK(rest.record.loss_csv() == full.record.loss_csv());
    CHECK(rest.record.eval_csv() == full.record.eval_csv());
    CHECK(encode_checkpoint(rest.checkpoint) == encode_checkpoint(full.checkpoint));
  }
  TrainSchedule other = s;
  other.base_lr *= 2;
  FitOptions o;
  o.stop_after = 2;
  const auto part = fit_video(clip, small_config(Variant::sr_nerv), s, &srb, o);
  FitOptions bad;
  bad.resume = &part.checkpoint;
  CHECK_THROWS_AS(fit_video(clip, small_config(Variant::sr_nerv), other, nullptr, bad), ConfigError);
  CHECK_THROWS_AS(fit_video(clip, small_config(Variant::sr_hnerv), s, nullptr, bad), ConfigError);
}

TEST_CASE("unfreezing does not destabilize the loss") {
  const auto clip = small_clip();
  PretrainOptions po;
  po.epochs = 20;
  po.crops_per_epoch = 16;
  po.crop_size = 16;
  const auto srb = pretrain_sr(make_texture_corpus(6, 32, 32, 1), {}, po).model;
  TrainSchedule s;
  s.total_epochs = 30;
  s.srb_finetune_start = 10;
  double before = 0, after = 0;
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    s.seed = seed;
    const auto r = fit_video(clip, small_config(Variant::sr_nerv), s, &srb);
    before += r.record.epoch_loss[9];
    after += r.record.epoch_loss[15];
    CHECK_FALSE(r.record.diverged());
  }
  CHECK(after < 2 * before);
}

TEST_CASE("evaluation against the model's own output is perfect") {
  const auto c = small_config(Variant::nerv);
  VideoModel<float> model(c, 5);
  const VideoClip own({reconstruct_frame(model, 0.0)});
  const auto report = evaluate_video(model, own);
  REQUIRE(report.size() == 1);
  CHECK(report.psnr_db[0] == kPsnrCapDb);
  CHECK(report.ms_ssim[0] == doctest::Approx(1.0).epsilon(1e-12));

  const auto clip = small_clip(3);
  const auto r = evaluate_video(model, clip);
  const std::string csv = r.to_csv();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 + 1);
  CHECK(r.mean_psnr() == doctest::Approx(std::accumulate(r.psnr_db.begin(), r.psnr_db.end(), 0.0) / 3).epsilon(1e-12));
  CHECK_THROWS_AS(evaluate_video(VideoModel<float>(desk_config(Variant::nerv), 0), clip), InvalidShape);
}

TEST_CASE("a one-cell ablation equals the single run") {
  const auto clip = small_clip();
  const auto srb = fresh_srb();
  TrainSchedule s;
  s.total_epochs = 4;
  const auto table = ablate_finetune_start(clip, small_config(Variant::sr_nerv), srb, {2}, s, {6});
  REQUIRE(table.cells.size() == 1);
  s.srb_finetune_start = 2;
  s.seed = 6;
  const auto run = fit_video(clip, small_config(Variant::sr_nerv), s, &srb);
  CHECK(table.cells[0].mean_psnr() == evaluate_video(run.model, clip).mean_psnr());
  CHECK(table.to_csv().rfind("fine_tuning_start_epoch,2\nsr-nerv,", 0) == 0);
  CHECK(table.runs_csv().rfind("start,seed,psnr_db,ms_ssim\n2,6,", 0) == 0);

  CHECK_THROWS_AS(ablate_finetune_start(clip, small_config(Variant::sr_nerv), srb, {5}, s, {0}), ConfigError);
  CHECK_THROWS_AS(ablate_finetune_start(clip, small_config(Variant::nerv), srb, {0}, s, {0}), ConfigError);
}

TEST_CASE("divergence flag compares the last loss with the first") {
  ExperimentRecord r;
  r.epoch_loss = {0.5, 0.2, 0.1};
  CHECK_FALSE(r.diverged());
  r.epoch_loss = {0.5, 0.2, 0.6};
  CHECK(r.diverged());
}
