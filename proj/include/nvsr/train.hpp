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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "nvsr/checkpoint.hpp"
#include "nvsr/degrade.hpp"
#include "nvsr/metrics.hpp"
#include "nvsr/models.hpp"
#include "nvsr/schedule.hpp"

namespace nvsr {

// ---------------------------------------------------------------------------
// SR block pre-training

struct PretrainOptions {
  int epochs = 300;
  int crops_per_epoch = 64;
  int crop_size = 32;  // high-resolution side, even
  /// Peak rate; decays along a cosine to 0 over the run.
  double lr = 1e-3;
  std::uint64_t seed = 0;
  DegradationRanges degradation;
};

struct PretrainResult {
  SRModel<float> model;
  std::vector<double> epoch_loss;  // mean L1 per epoch
};

/// One training pair: a random high-resolution crop and its 2x area
/// downsample passed through a sampled degradation.
struct SrPair {
  Frame degraded_lr;
  Frame hr;
};
SrPair make_sr_pair(const Frame& image, int crop_size, Rng& rng, DegradationSampler& sampler,
                    const DegradationRanges& ranges);

/// Throws ConfigError on an empty corpus, InvalidCrop if an image is smaller
/// than the crop.
PretrainResult pretrain_sr(const std::vector<Frame>& corpus, const SrbConfig& config, const PretrainOptions& options);

struct SrComparison {
  double sr_psnr = 0;       // mean over crops
  double nearest_psnr = 0;  // nearest-neighbour 2x of the same inputs
  std::size_t crops = 0;
};
SrComparison compare_with_nearest(const SRModel<float>& srb, const std::vector<Frame>& images, int crops,
                                  int crop_size, const DegradationRanges& ranges, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Video fitting

struct EvalPoint {
  int epoch = 0;  // evaluated after this epoch
  MetricReport report;
};

struct ExperimentRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<double> epoch_loss;
  std::vector<double> epoch_lr;
  std::vector<bool> srb_trainable;
  std::vector<EvalPoint> evals;
  double wall_seconds = 0;
  std::string checkpoint_path;

  /// epoch,lr,srb_trainable,loss
  std::string loss_csv() const;
  /// epoch,psnr_db,ms_ssim (clip means)
  std::string eval_csv() const;
  double final_psnr() const;
  double final_ms_ssim() const;
  /// Final loss above the first epoch's loss.
  bool diverged() const;
};

struct FitOptions {
  /// Artifacts (config, loss.csv, eval.csv, metrics.csv, checkpoint.nvck) go
  /// here when non-empty.
  std::filesystem::path out_dir;
  /// Stop after this many completed epochs (0 = run the whole schedule).
  int stop_after = 0;
  /// Continue from a checkpoint written by an earlier fit of the same setup.
  const Checkpoint* resume = nullptr;
  /// Called after every epoch with the epoch index.
  std::function<void(int, const VideoModel<float>&)> on_epoch_end;
};

struct FitResult {
  VideoModel<float> model;
  ExperimentRecord record;
  /// Parameters, optimizer state and progress after the last epoch run.
  Checkpoint checkpoint;
};

/// Fits one clip: each epoch visits every frame once in a seeded shuffled
/// order, one L2 step per frame. The SR block group trains only at epochs
/// where srb_trainable_at holds.
/// Throws ConfigError if the clip size differs from the model output, or an
/// SR variant has no pre-trained block (unless resuming).
FitResult fit_video(const VideoClip& clip, const ModelConfig& config, const TrainSchedule& schedule,
                    const SRModel<float>* pretrained_srb, const FitOptions& options = {});

MetricReport evaluate_video(const VideoModel<float>& model, const VideoClip& clip);

// ---------------------------------------------------------------------------
// Fine-tuning start ablation

struct AblationCell {
  int start = 0;
  std::vector<double> psnr;  // per seed
  std::vector<double> ms_ssim;
  double mean_psnr() const;
  double mean_ms_ssim() const;
};

struct AblationTable {
  Variant variant = Variant::sr_nerv;
  std::vector<std::uint64_t> seeds;
  std::vector<AblationCell> cells;

  /// One header row of start epochs and one row of mean PSNR.
  std::string to_csv() const;
  /// start,seed,psnr_db,ms_ssim for every run.
  std::string runs_csv() const;
};

/// Runs fit_video for every (start, seed); runs sharing a seed share their
/// initialization.
AblationTable ablate_finetune_start(const VideoClip& clip, const ModelConfig& config, const SRModel<float>& pretrained,
                                    const std::vector<int>& starts, const TrainSchedule& schedule,
                                    const std::vector<std::uint64_t>& seeds);

}  // namespace nvsr
