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

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gournet/checkpoint.hpp"
#include "gournet/config.hpp"
#include "gournet/curves.hpp"
#include "gournet/data.hpp"
#include "gournet/error.hpp"
#include "gournet/model.hpp"
#include "gournet/solver.hpp"
#include "gournet/synthetic.hpp"
#include "gournet/trainer.hpp"

namespace gournet::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Seed used when --seed is absent: $GOURNET_SEED, else 42.
inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("GOURNET_SEED"); env && *env) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ArgumentError(std::string("GOURNET_SEED is not an unsigned integer: ") + env);
    }
  }
  return 42;
}

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline void require_rgb(const ModelConfig& cfg) {
  if (cfg.input.at(2) != 3) throw ArgumentError("model input must have 3 channels for RGB images");
}

/// Uses an existing manifest, or scans `data` and writes a fresh split.
inline SplitManifest obtain_manifest(const std::string& data, const std::string& manifest_path, std::uint64_t seed,
                                     std::ostream& out) {
  if (!manifest_path.empty() && std::filesystem::exists(manifest_path)) {
    out << "using manifest " << manifest_path << "\n";
    return read_manifest(manifest_path);
  }
  const Dataset ds = scan_dataset(data);
  for (const auto& w : ds.report.warnings) out << "warning: " << w << "\n";
  SplitManifest m = stratified_split(ds, seed);
  if (!manifest_path.empty()) {
    write_manifest(m, manifest_path);
    out << "wrote manifest " << manifest_path << "\n";
  }
  return m;
}

inline void print_split_counts(const SplitManifest& m, std::ostream& out) {
  const auto counts = m.counts();
  std::size_t totals[3] = {0, 0, 0};
  for (std::size_t c = 0; c < m.class_names.size(); ++c) {
    out << m.class_names[c] << ": train " << counts[c][0] << ", val " << counts[c][1] << ", test " << counts[c][2]
        << "\n";
    for (int s = 0; s < 3; ++s) totals[s] += counts[c][s];
  }
  out << "total: train " << totals[0] << ", val " << totals[1] << ", test " << totals[2] << "\n";
}

}  // namespace detail

/// Runs the command line. Exit codes: 0 success, 1 usage error, 2 data error,
/// 3 numeric failure.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"GourNet CNN training and inference engine", "gournet"};
  app.require_subcommand(1);

  std::string config, data, manifest, checkpoint = "model.gnck", history = "history.csv", curves, image, log_path;
  std::string split_name = "test", emit_dir, out_dir, kind = "leaves";
  std::optional<std::uint64_t> seed;
  TrainingConfig tc;
  std::uint64_t target = 0;
  std::size_t eval_batch = 32, top = 0, per_class = 100, size = 8;
  bool no_augment = false, no_restore = false;
  SearchFamily family;

  auto* params = app.add_subcommand("params", "Audit the parameter count of a config");
  params->add_option("--config", config, "Architecture .cfg file")->required();

  auto* solve = app.add_subcommand("solve-config", "Search the conv/pool family for configs with a target count");
  solve->add_option("--target", target, "Exact total parameter count")->required();
  solve->add_option("--log", log_path, "Write the completed-search log here");
  solve->add_option("--emit", emit_dir, "Write every match as a .cfg into this directory");
  solve->add_option("--min-blocks", family.min_blocks, "Fewest conv+pool blocks")->capture_default_str();
  solve->add_option("--max-blocks", family.max_blocks, "Most conv+pool blocks")->capture_default_str();
  solve->add_option("--max-units", family.max_units, "Largest hidden dense width")->capture_default_str();

  auto* split = app.add_subcommand("split", "Scan a class-per-directory corpus and write the 80/10/10 manifest");
  split->add_option("--data", data, "Dataset root")->required();
  split->add_option("--manifest", manifest, "Output manifest CSV")->required();
  split->add_option("--seed", seed, "Split seed");

  auto* trn = app.add_subcommand("train", "Train a model");
  trn->add_option("--data", data, "Dataset root")->required();
  trn->add_option("--config", config, "Architecture .cfg file")->required();
  trn->add_option("--manifest", manifest, "Manifest CSV (read if present, written otherwise)");
  trn->add_option("--epochs", tc.max_epochs, "Maximum epochs")->capture_default_str();
  trn->add_option("--batch-size", tc.batch_size, "Batch size")->capture_default_str();
  trn->add_option("--lr", tc.lr, "Adam learning rate")->capture_default_str();
  trn->add_option("--patience", tc.patience, "Early-stopping patience (epochs)")->capture_default_str();
  trn->add_option("--seed", seed, "Seed for init, split, shuffling and augmentation");
  trn->add_option("--out", checkpoint, "Output checkpoint (.gnck)")->capture_default_str();
  trn->add_option("--history", history, "Output history CSV")->capture_default_str();
  trn->add_option("--curves", curves, "Output SVG with accuracy and loss curves");
  trn->add_option("--rotation-turns", tc.augment.rotation_max_turns, "Max augmentation rotation, in turns")
      ->capture_default_str();
  trn->add_flag("--no-augment", no_augment, "Disable flips and rotation");
  trn->add_flag("--no-restore-best", no_restore, "Keep the last weights instead of the best epoch's");

  auto* eval = app.add_subcommand("evaluate", "Evaluate a checkpoint on one split");
  eval->add_option("--data", data, "Dataset root")->required();
  eval->add_option("--config", config, "Architecture .cfg file")->required();
  eval->add_option("--checkpoint,--out", checkpoint, "Checkpoint to evaluate")->required();
  eval->add_option("--manifest", manifest, "Manifest CSV")->required();
  eval->add_option("--split", split_name, "train, val or test")->capture_default_str();
  eval->add_option("--batch-size", eval_batch, "Batch size")->capture_default_str();

  auto* pred = app.add_subcommand("predict", "Rank the classes for one image");
  pred->add_option("--config", config, "Architecture .cfg file")->required();
  pred->add_option("--checkpoint,--out", checkpoint, "Checkpoint")->required();
  pred->add_option("--image", image, "JPEG or PPM image")->required();
  pred->add_option("--manifest", manifest, "Manifest CSV supplying class names");
  pred->add_option("--data", data, "Dataset root supplying class names");
  pred->add_option("--top", top, "Print only the top K classes");

  auto* crv = app.add_subcommand("curves", "Render a history CSV as SVG");
  crv->add_option("--history", history, "History CSV")->required();
  crv->add_option("--out", out_dir, "Output SVG")->required();

  auto* syn = app.add_subcommand("synth", "Write a synthetic class-per-directory image corpus");
  syn->add_option("--out", out_dir, "Output root")->required();
  syn->add_option("--kind", kind, "leaves (8 classes) or separable (2 classes)")
      ->check(CLI::IsMember({"leaves", "separable"}))
      ->capture_default_str();
  syn->add_option("--per-class", per_class, "Images per class")->capture_default_str();
  syn->add_option("--size", size, "Image side for the separable set")->capture_default_str();
  syn->add_option("--seed", seed, "Generator seed");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const std::uint64_t the_seed = seed ? *seed : default_seed();

    if (*params) {
      out << render_report(audit(load_config(config)));
    } else if (*solve) {
      const auto res = solve_config(target, family);
      out << res.matches.size() << " configuration(s) with exactly " << format_count(target) << " parameters\n";
      for (std::size_t i = 0; i < res.matches.size(); ++i) {
        const auto cfg = to_config(res.matches[i], family);
        out << "\n# match " << i + 1 << "\n" << to_text(cfg);
        if (!emit_dir.empty()) {
          std::filesystem::create_directories(emit_dir);
          char name[32];
          std::snprintf(name, sizeof name, "match_%03zu.cfg", i + 1);
          std::ofstream f(std::filesystem::path(emit_dir) / name, std::ios::binary);
          f << to_text(cfg);
        }
      }
      out << "\n" << res.log;
      if (!log_path.empty()) {
        std::ofstream f(log_path, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write " + log_path);
        f << res.log;
      }
    } else if (*split) {
      const Dataset ds = scan_dataset(data);
      for (const auto& w : ds.report.warnings) out << "warning: " << w << "\n";
      const auto m = stratified_split(ds, the_seed);
      write_manifest(m, manifest);
      detail::print_split_counts(m, out);
      out << "wrote " << manifest << "\n";
    } else if (*trn) {
      const ModelConfig cfg = load_config(config);
      detail::require_rgb(cfg);
      tc.seed = the_seed;
      tc.restore_best = !no_restore;
      if (no_augment) tc.augment = AugmentPolicy::none();
      tc.validate();
      const SplitManifest m = detail::obtain_manifest(data, manifest, the_seed, out);
      Model<float> model(cfg, derive_seed({the_seed, 0x494E4954ULL}));
      ImageSource source(data, cfg.input[0], cfg.input[1]);
      const auto result = train(model, m, source, tc, [&](const EpochRecord& r) {
        out << "epoch " << r.epoch << ": loss " << detail::fixed6(r.train_loss) << " acc "
            << detail::fixed6(r.train_accuracy) << " val_loss " << detail::fixed6(r.val_loss) << " val_acc "
            << detail::fixed6(r.val_accuracy) << "\n";
        out.flush();
      });
      if (result.stopped_early) out << "early stop after epoch " << result.history.size() << "\n";
      if (result.restored_best) out << "restored weights of epoch " << result.best_epoch << "\n";
      save_checkpoint(model, checkpoint);
      write_history(result.history, history);
      if (!curves.empty()) emit_curves(result.history, curves);
      out << "wrote " << checkpoint << " and " << history << "\n";
    } else if (*eval) {
      const ModelConfig cfg = load_config(config);
      detail::require_rgb(cfg);
      const SplitManifest m = read_manifest(manifest);
      Model<float> model(cfg, 0);
      load_checkpoint(model, checkpoint);
      ImageSource source(data, cfg.input[0], cfg.input[1]);
      const Split which = parse_split(split_name);
      const auto r = evaluate(model, source, m, m.members(which), eval_batch);
      out << "split " << to_string(which) << ": loss " << detail::fixed6(r.loss) << " accuracy "
          << detail::fixed6(r.accuracy) << " (" << r.correct << "/" << r.count << ")\n";
    } else if (*pred) {
      const ModelConfig cfg = load_config(config);
      detail::require_rgb(cfg);
      std::vector<std::string> names;
      if (!manifest.empty()) {
        names = read_manifest(manifest).class_names;
      } else if (!data.empty()) {
        names = scan_dataset(data, false).class_names;
      }
      Model<float> model(cfg, 0);
      load_checkpoint(model, checkpoint);
      const auto ranked = predict(model, std::filesystem::path(image), names);
      const std::size_t n = top ? std::min(top, ranked.size()) : ranked.size();
      for (std::size_t i = 0; i < n; ++i) out << ranked[i].name << '\t' << detail::fixed6(ranked[i].probability) << "\n";
    } else if (*crv) {
      emit_curves(read_history(history), out_dir);
      out << "wrote " << out_dir << "\n";
    } else if (*syn) {
      if (kind == "leaves") {
        synthetic::write_leaves(out_dir, per_class, the_seed);
      } else {
        synthetic::write_separable(out_dir, per_class, size, the_seed);
      }
      out << "wrote " << kind << " corpus to " << out_dir << "\n";
    }
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << "\n";
    return kData;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace gournet::cli
