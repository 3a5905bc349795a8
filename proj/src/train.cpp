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

#include "nvsr/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

#include "nvsr/config.hpp"
#include "nvsr/error.hpp"

namespace nvsr {

namespace fs = std::filesystem;

namespace {

// Stream ids for derive_seed.
constexpr std::uint64_t kCropStream = 10, kDegradeStream = 11, kSrbInitStream = 12, kShuffleStream = 1000;

Frame crop(const Frame& f, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) {
  std::vector<float> v(3 * h * w);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) v[(c * h + y) * w + x] = f.at(c, y0 + y, x0 + x);
  return Frame(h, w, std::move(v));
}

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_g(v[i]);
  return s;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(std::strtod(item.c_str(), nullptr));
  return out;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

std::string run_text(const ModelConfig& config, const TrainSchedule& schedule) {
  ExperimentConfig c;
  c.model = config;
  c.schedule = schedule;
  c.experiment.seed = schedule.seed;
  return serialize_config(c);
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

void save_progress(Checkpoint& ck, const ExperimentRecord& rec) {
  ck.set_state("epochs_done", std::to_string(rec.epoch_loss.size()));
  ck.set_state("run_hash", rec.config_hash);
  ck.set_state("epoch_loss", join(rec.epoch_loss));
  ck.set_state("epoch_lr", join(rec.epoch_lr));
  std::vector<double> trainable(rec.srb_trainable.begin(), rec.srb_trainable.end());
  ck.set_state("srb_trainable", join(trainable));
  std::string epochs;
  for (const auto& e : rec.evals) {
    epochs += (epochs.empty() ? "" : ",") + std::to_string(e.epoch);
    ck.set_state("eval." + std::to_string(e.epoch) + ".psnr", join(e.report.psnr_db));
    ck.set_state("eval." + std::to_string(e.epoch) + ".ms_ssim", join(e.report.ms_ssim));
  }
  ck.set_state("eval_epochs", epochs);
}

int load_progress(const Checkpoint& ck, ExperimentRecord& rec) {
  const auto state = ck.state();
  auto get = [&](const std::string& key) -> std::string {
    const auto it = state.find(key);
    if (it == state.end()) throw ConfigError("checkpoint lacks training state '" + key + "'");
    return it->second;
  };
  if (get("run_hash") != rec.config_hash)
    throw ConfigError("checkpoint was written by a different configuration, schedule or seed");
  rec.epoch_loss = split_doubles(get("epoch_loss"));
  rec.epoch_lr = split_doubles(get("epoch_lr"));
  for (double v : split_doubles(get("srb_trainable"))) rec.srb_trainable.push_back(v != 0);
  for (double e : split_doubles(get("eval_epochs"))) {
    EvalPoint p;
    p.epoch = int(e);
    p.report.psnr_db = split_doubles(get("eval." + std::to_string(p.epoch) + ".psnr"));
    p.report.ms_ssim = split_doubles(get("eval." + std::to_string(p.epoch) + ".ms_ssim"));
    rec.evals.push_back(std::move(p));
  }
  const int done = std::stoi(get("epochs_done"));
  if (std::size_t(done) != rec.epoch_loss.size()) throw ConfigError("checkpoint training state is inconsistent");
  return done;
}

}  // namespace

// ---------------------------------------------------------------------------

SrPair make_sr_pair(const Frame& image, int crop_size, Rng& rng, DegradationSampler& sampler,
                    const DegradationRanges& ranges) {
  const std::size_t c = std::size_t(crop_size);
  if (crop_size < 2 || crop_size % 2) throw InvalidCrop("SR crop size must be even, got " + std::to_string(crop_size));
  if (image.height() < c || image.width() < c)
    throw InvalidCrop("image " + std::to_string(image.height()) + "x" + std::to_string(image.width()) +
                      " is smaller than the " + std::to_string(crop_size) + " px crop");
  const std::size_t y0 = index_draw(rng, image.height() - c + 1);
  const std::size_t x0 = index_draw(rng, image.width() - c + 1);
  Frame hr = crop(image, y0, x0, c, c);
  Frame lr = degrade(downsample_area(hr, 2), sampler.sample(ranges));
  return {std::move(lr), std::move(hr)};
}

PretrainResult pretrain_sr(const std::vector<Frame>& corpus, const SrbConfig& config, const PretrainOptions& options) {
  if (corpus.empty()) throw ConfigError("pretrain_sr: empty corpus");
  if (options.epochs < 1 || options.crops_per_epoch < 1) throw ConfigError("pretrain_sr: epochs and crops must be positive");
  if (!(options.lr > 0)) throw ConfigError("pretrain_sr: lr must be positive");
  options.degradation.validate();
  for (const auto& img : corpus)
    if (img.height() < std::size_t(options.crop_size) || img.width() < std::size_t(options.crop_size))
      throw InvalidCrop("pretrain_sr: corpus image smaller than the crop size");

  Rng crop_rng(derive_seed(options.seed, kCropStream)), init_rng(derive_seed(options.seed, kSrbInitStream));
  DegradationSampler sampler(derive_seed(options.seed, kDegradeStream));
  PretrainResult result{SRModel<float>(config, init_rng), {}};
  Adam<float> opt({{"srb", result.model.parameters(), true}});

  const double total_steps = double(options.epochs) * double(options.crops_per_epoch);
  std::size_t step = 0;
  for (int e = 0; e < options.epochs; ++e) {
    double sum = 0;
    for (int i = 0; i < options.crops_per_epoch; ++i, ++step) {
      const Frame& image = corpus[index_draw(crop_rng, corpus.size())];
      const SrPair pair = make_sr_pair(image, options.crop_size, crop_rng, sampler, options.degradation);
      auto l = loss(LossKind::l1, result.model.forward(frame_to_tensor<float>(pair.degraded_lr)),
                    frame_to_tensor<float>(pair.hr));
      l.backward();
      opt.step(options.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * double(step) / total_steps)));
      sum += double(l.item());
    }
    result.epoch_loss.push_back(sum / options.crops_per_epoch);
  }
  return result;
}

SrComparison compare_with_nearest(const SRModel<float>& srb, const std::vector<Frame>& images, int crops,
                                  int crop_size, const DegradationRanges& ranges, std::uint64_t seed) {
  if (images.empty() || crops < 1) throw ConfigError("compare_with_nearest: need images and at least one crop");
  Rng rng(derive_seed(seed, kCropStream));
  DegradationSampler sampler(derive_seed(seed, kDegradeStream));
  SrComparison out;
  for (int i = 0; i < crops; ++i) {
    const SrPair pair = make_sr_pair(images[index_draw(rng, images.size())], crop_size, rng, sampler, ranges);
    out.sr_psnr += psnr(frame_from_tensor(srb.forward(frame_to_tensor<float>(pair.degraded_lr))), pair.hr);
    out.nearest_psnr += psnr(upsample_nearest(pair.degraded_lr, 2), pair.hr);
  }
  out.crops = std::size_t(crops);
  out.sr_psnr /= crops;
  out.nearest_psnr /= crops;
  return out;
}

// ---------------------------------------------------------------------------

std::string ExperimentRecord::loss_csv() const {
  std::string out = "epoch,lr,srb_trainable,loss\n";
  char line[128];
  for (std::size_t e = 0; e < epoch_loss.size(); ++e) {
    std::snprintf(line, sizeof(line), "%zu,%.9g,%d,%.9g\n", e, epoch_lr[e], int(srb_trainable[e]), epoch_loss[e]);
    out += line;
  }
  return out;
}

std::string ExperimentRecord::eval_csv() const {
  std::string out = "epoch,psnr_db,ms_ssim\n";
  char line[96];
  for (const auto& p : evals) {
    std::snprintf(line, sizeof(line), "%d,%.6f,%.8f\n", p.epoch, p.report.mean_psnr(), p.report.mean_ms_ssim());
    out += line;
  }
  return out;
}

double ExperimentRecord::final_psnr() const { return evals.empty() ? 0.0 : evals.back().report.mean_psnr(); }

double ExperimentRecord::final_ms_ssim() const { return evals.empty() ? 0.0 : evals.back().report.mean_ms_ssim(); }

bool ExperimentRecord::diverged() const { return !epoch_loss.empty() && epoch_loss.back() > epoch_loss.front(); }

MetricReport evaluate_video(const VideoModel<float>& model, const VideoClip& clip) {
  std::vector<Frame> out;
  out.reserve(clip.size());
  for (std::size_t k = 0; k < clip.size(); ++k) out.push_back(reconstruct_frame(model, clip, k));
  return evaluate_frames(out, clip.frames());
}

FitResult fit_video(const VideoClip& clip, const ModelConfig& config, const TrainSchedule& schedule,
                    const SRModel<float>* pretrained_srb, const FitOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  schedule.validate();
  if (clip.size() == 0) throw ConfigError("fit_video: empty clip");
  if (clip.height() != std::size_t(config.output_h) || clip.width() != std::size_t(config.output_w))
    throw ConfigError("fit_video: clip is " + std::to_string(clip.height()) + "x" + std::to_string(clip.width()) +
                      " but the model outputs " + std::to_string(config.output_h) + "x" +
                      std::to_string(config.output_w));
  if (is_sr(config.variant) && !pretrained_srb && !options.resume)
    throw ConfigError("fit_video: " + std::string(variant_name(config.variant)) + " needs a pre-trained SR block");

  FitResult result{VideoModel<float>(config, schedule.seed), {}, {}};
  VideoModel<float>& model = result.model;
  ExperimentRecord& rec = result.record;
  rec.seed = schedule.seed;
  rec.config_hash = config_hash(run_text(config, schedule));
  if (pretrained_srb && model.srb()) model.srb()->copy_from(*pretrained_srb);

  Adam<float> opt(model.param_groups());
  const bool has_srb = model.srb() != nullptr;
  int first = 0;
  if (options.resume) {
    if (options.resume->config_text() != serialize_model_config(config))
      throw ConfigError("fit_video: resume checkpoint holds a different model configuration");
    load_parameters(model.named_parameters(), *options.resume);
    restore_optimizer_state(opt, *options.resume);
    first = load_progress(*options.resume, rec);
  }

  std::vector<Tensor<float>> targets;
  for (const auto& f : clip.frames()) targets.push_back(frame_to_tensor<float>(f));

  const int end = options.stop_after > 0 ? std::min(schedule.total_epochs, options.stop_after) : schedule.total_epochs;
  const int eval_every = schedule.effective_eval_every();
  for (int e = first; e < end; ++e) {
    const bool srb_on = has_srb && srb_trainable_at(e, schedule);
    if (has_srb) opt.set_trainable("srb", srb_on);
    const double lr = lr_at(e, schedule);
    Rng shuffle(derive_seed(schedule.seed, kShuffleStream + std::uint64_t(e)));
    double sum = 0;
    for (std::size_t k : shuffled_indices(shuffle, clip.size())) {
      auto l = loss(LossKind::l2, model.forward(clip.time_index(k), &clip[k]), targets[k]);
      l.backward();
      opt.step(lr);
      sum += double(l.item());
    }
    rec.epoch_loss.push_back(sum / double(clip.size()));
    rec.epoch_lr.push_back(lr);
    rec.srb_trainable.push_back(srb_on);
    if ((e + 1) % eval_every == 0 || e + 1 == schedule.total_epochs) rec.evals.push_back({e, evaluate_video(model, clip)});
    if (options.on_epoch_end) options.on_epoch_end(e, model);
  }

  result.checkpoint = model_checkpoint(model);
  add_optimizer_state(result.checkpoint, opt);
  save_progress(result.checkpoint, rec);

  if (!options.out_dir.empty()) {
    fs::create_directories(options.out_dir);
    write_text(options.out_dir / "config.txt", run_text(config, schedule));
    write_text(options.out_dir / "loss.csv", rec.loss_csv());
    write_text(options.out_dir / "eval.csv", rec.eval_csv());
    if (!rec.evals.empty()) write_text(options.out_dir / "metrics.csv", rec.evals.back().report.to_csv());
    rec.checkpoint_path = (options.out_dir / "checkpoint.nvck").string();
    save_checkpoint(result.checkpoint, rec.checkpoint_path);
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

// ---------------------------------------------------------------------------

double AblationCell::mean_psnr() const { return mean_of(psnr); }

double AblationCell::mean_ms_ssim() const { return mean_of(ms_ssim); }

std::string AblationTable::to_csv() const {
  std::string header = "fine_tuning_start_epoch", row(variant_name(variant));
  char buf[32];
  for (const auto& c : cells) {
    header += "," + std::to_string(c.start);
    std::snprintf(buf, sizeof(buf), ",%.4f", c.mean_psnr());
    row += buf;
  }
  return header + "\n" + row + "\n";
}

std::string AblationTable::runs_csv() const {
  std::string out = "start,seed,psnr_db,ms_ssim\n";
  char line[96];
  for (const auto& c : cells)
    for (std::size_t i = 0; i < c.psnr.size(); ++i) {
      std::snprintf(line, sizeof(line), "%d,%llu,%.6f,%.8f\n", c.start, static_cast<unsigned long long>(seeds[i]),
                    c.psnr[i], c.ms_ssim[i]);
      out += line;
    }
  return out;
}

AblationTable ablate_finetune_start(const VideoClip& clip, const ModelConfig& config, const SRModel<float>& pretrained,
                                    const std::vector<int>& starts, const TrainSchedule& schedule,
                                    const std::vector<std::uint64_t>& seeds) {
  if (!is_sr(config.variant)) throw ConfigError("ablate_finetune_start needs an SR variant");
  if (starts.empty() || seeds.empty()) throw ConfigError("ablate_finetune_start needs at least one start and one seed");
  for (int s : starts)
    if (s < 0 || s > schedule.total_epochs)
      throw ConfigError("fine-tuning start " + std::to_string(s) + " outside [0, " +
                        std::to_string(schedule.total_epochs) + "]");
  AblationTable table;
  table.variant = config.variant;
  table.seeds = seeds;
  for (int start : starts) {
    AblationCell cell;
    cell.start = start;
    for (std::uint64_t seed : seeds) {
      TrainSchedule s = schedule;
      s.srb_finetune_start = start;
      s.seed = seed;
      const auto run = fit_video(clip, config, s, &pretrained);
      cell.psnr.push_back(run.record.final_psnr());
      cell.ms_ssim.push_back(run.record.final_ms_ssim());
    }
    table.cells.push_back(std::move(cell));
  }
  return table;
}

}  // namespace nvsr
