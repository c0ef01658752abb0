/* Copyright 2026 The GourNet-CPP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gournet/checkpoint.hpp"
#include "gournet/config.hpp"
#include "gournet/data.hpp"
#include "gournet/error.hpp"
#include "gournet/image.hpp"
#include "gournet/model.hpp"
#include "gournet/objective.hpp"
#include "gournet/optimize.hpp"

namespace gournet {

struct TrainingConfig {
  double lr = 0.001;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 3;
  std::uint64_t seed = 42;
  bool restore_best = true;
  AugmentPolicy augment{};

  void validate() const {
    AdamConfig{lr}.validate();
    if (batch_size == 0) throw ArgumentError("batch size must be >= 1");
    if (max_epochs == 0) throw ArgumentError("max epochs must be >= 1");
    augment.validate();
  }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0;
  double train_accuracy = 0;
  double val_loss = 0;
  double val_accuracy = 0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
  bool restored_best = false;
};

struct LabeledBatch {
  Tensor<float> inputs;  // N x H x W x 3
  std::vector<int> labels;
};

/// Stacks preprocessed images for `indices`. With a policy, sample i of
/// epoch e is augmented from its own stream derive_seed(seed, e, i), so the
/// result does not depend on batch composition.
inline LabeledBatch assemble_batch(ImageSource& source, const SplitManifest& manifest,
                                   const std::vector<std::size_t>& indices, const AugmentPolicy* policy,
                                   std::uint64_t seed, std::uint64_t epoch) {
  const std::size_t h = source.height(), w = source.width(), px = h * w * 3;
  LabeledBatch b{Tensor<float>({indices.size(), h, w, 3}), {}};
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Sample& s = manifest.samples[indices[k]];
    const Image& img = source.get(s.path);
    if (policy) {
      Rng rng(derive_seed({seed, 0x4155474DULL, epoch, indices[k]}));
      const Image aug = augment(img, *policy, rng);
      std::copy(aug.raw(), aug.raw() + px, b.inputs.raw() + k * px);
    } else {
      std::copy(img.raw(), img.raw() + px, b.inputs.raw() + k * px);
    }
    b.labels.push_back(s.label);
  }
  return b;
}

struct EvalResult {
  double loss = 0;
  double accuracy = 0;
  std::size_t count = 0;
  std::size_t correct = 0;
  std::vector<int> predictions;  // argmax per sample, in `indices` order
  std::vector<int> labels;
};

/// One unaugmented pass over `indices`. The loss is the per-sample mean, so
/// it does not depend on how the samples are batched.
inline EvalResult evaluate(Model<float>& model, ImageSource& source, const SplitManifest& manifest,
                           const std::vector<std::size_t>& indices, std::size_t batch_size = 32) {
  if (indices.empty()) throw ArgumentError("evaluate: empty split");
  EvalResult r;
  double loss_sum = 0;
  for (const auto& batch : plan_batches(indices, batch_size, false, 0, 0)) {
    const auto b = assemble_batch(source, manifest, batch, nullptr, 0, 0);
    const auto probs = model.forward(b.inputs);
    loss_sum += sparse_ce_loss(probs, b.labels) * static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const int pred = static_cast<int>(argmax_row(probs, i));
      r.predictions.push_back(pred);
      r.labels.push_back(b.labels[i]);
      r.correct += pred == b.labels[i];
    }
  }
  r.count = indices.size();
  r.loss = loss_sum / static_cast<double>(r.count);
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.count);
  return r;
}

/// Receives each finished epoch; used for progress output.
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam + sparse categorical cross-entropy over the training split, one
/// validation pass per epoch, early stopping on validation loss.
///
/// Only train and validation samples are ever decoded. On early stop (and
/// with restore_best) the model ends holding the weights of the best epoch.
inline TrainResult train(Model<float>& model, const SplitManifest& manifest, ImageSource& source,
                         const TrainingConfig& cfg, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (model.config().input.at(2) != 3) throw ArgumentError("train: model input must have 3 channels");
  if (source.height() != model.config().input[0] || source.width() != model.config().input[1]) {
    throw ArgumentError("train: image source size does not match the model input");
  }
  const auto train_idx = manifest.members(Split::kTrain);
  const auto val_idx = manifest.members(Split::kVal);
  if (train_idx.empty()) throw DataError("training split is empty");
  if (val_idx.empty()) throw DataError("validation split is empty; early stopping needs validation data");
  if (model.num_classes() < manifest.class_names.size()) {
    throw ArgumentError("train: model head has " + std::to_string(model.num_classes()) + " classes, dataset has " +
                        std::to_string(manifest.class_names.size()));
  }

  Adam<float> adam(AdamConfig{cfg.lr});
  EarlyStopping<Model<float>::Snapshot> stopper(cfg.patience);
  TrainResult result;
  auto params = model.params();

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double loss_sum = 0;
    std::size_t correct = 0, seen = 0;
    const auto batches = plan_batches(train_idx, cfg.batch_size, true, cfg.seed, epoch);
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const auto b = assemble_batch(source, manifest, batches[bi], &cfg.augment, cfg.seed, epoch);
      const auto logits = model.logits(b.inputs);
      const auto probs = softmax(logits);
      const double loss = sparse_ce_loss(probs, b.labels);
      if (!std::isfinite(loss) || !logits.all_finite()) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(bi + 1));
      }
      model.backward_from_logits(sparse_ce_grad_logits(logits, b.labels));
      try {
        adam.step(params);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(bi + 1));
      }
      loss_sum += loss * static_cast<double>(b.labels.size());
      correct += count_correct(probs, b.labels);
      seen += b.labels.size();
    }
    const auto val = evaluate(model, source, manifest, val_idx, cfg.batch_size);
    EpochRecord rec{epoch, loss_sum / static_cast<double>(seen), static_cast<double>(correct) / static_cast<double>(seen),
                    val.loss, val.accuracy};
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (stopper.update(val.loss, [&] { return model.snapshot(); }) == StopDecision::kStop) {
      result.stopped_early = true;
      break;
    }
  }
  result.best_epoch = stopper.best_epoch();
  if (cfg.restore_best && stopper.best_snapshot() && stopper.best_epoch() != result.history.size()) {
    model.restore(*stopper.best_snapshot());
    result.restored_best = true;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Prediction

struct ClassScore {
  std::string name;
  double probability = 0;
};

/// Preprocesses `img` like the evaluation path (resize + rescale) and returns
/// every class ranked by descending probability (ties keep class order).
inline std::vector<ClassScore> predict(Model<float>& model, const Image& img,
                                       const std::vector<std::string>& class_names) {
  const Shape& in = model.config().input;
  const Image x = rescale(resize_bilinear(img, in.at(0), in.at(1)));
  const auto probs = model.forward(x.reshaped({1, in[0], in[1], 3}));
  std::vector<ClassScore> out;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    std::string name = k < class_names.size() ? class_names[k] : "class_" + std::to_string(k);
    out.push_back({std::move(name), probs[k]});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.probability > b.probability; });
  return out;
}

inline std::vector<ClassScore> predict(Model<float>& model, const std::filesystem::path& image_path,
                                       const std::vector<std::string>& class_names) {
  return predict(model, load_image(image_path), class_names);
}

// ---------------------------------------------------------------------------
// History CSV: `epoch,train_loss,train_accuracy,val_loss,val_accuracy`, %.6f.

inline std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
  char buf[256];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f\n", r.epoch, r.train_loss, r.train_accuracy, r.val_loss,
                  r.val_accuracy);
    out += buf;
  }
  return out;
}

inline void write_history(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write history " + path.string());
  out << history_csv(history);
  if (!out) throw DataError("short write to " + path.string());
}

inline std::vector<EpochRecord> read_history(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open history " + path.string());
  std::string line;
  std::vector<EpochRecord> out;
  std::getline(in, line);
  if (line != "epoch,train_loss,train_accuracy,val_loss,val_accuracy") {
    throw DataError(path.string() + ": unexpected history header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpochRecord r;
    if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%lf", &r.epoch, &r.train_loss, &r.train_accuracy, &r.val_loss,
                    &r.val_accuracy) != 5) {
      throw DataError(path.string() + ": malformed history row '" + line + "'");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace gournet
