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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gournet/error.hpp"
#include "gournet/tensor.hpp"

namespace gournet {

/// A trainable tensor and its gradient buffer, addressed by checkpoint name.
template <class T>
struct ParamRef {
  std::string name;
  Tensor<T>* value;
  Tensor<T>* grad;
};

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;

  /// lr == 0 is accepted and freezes the weights (used to force plateaus).
  void validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ArgumentError("adam: lr must be finite and >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ArgumentError("adam: beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ArgumentError("adam: beta2 must be in [0, 1)");
    if (!(epsilon > 0.0)) throw ArgumentError("adam: epsilon must be > 0");
  }
};

/// First and second moments, one pair per parameter, plus the step count.
template <class T>
struct AdamState {
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::uint64_t t = 0;
};

/// One bias-corrected Adam update over every parameter.
///
/// All gradients are checked before anything is mutated, so a non-finite
/// gradient leaves both parameters and state untouched.
template <class T>
void adam_step(std::span<const ParamRef<T>> params, AdamState<T>& state, const AdamConfig& cfg) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.value->shape());
      state.v.emplace_back(p.value->shape());
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("adam: state holds " + std::to_string(state.m.size()) + " moments for " +
                     std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (p.grad->shape() != p.value->shape() || state.m[i].shape() != p.value->shape()) {
      throw ShapeError("adam: shape mismatch for " + p.name + ": param " + shape_str(p.value->shape()) +
                       ", grad " + shape_str(p.grad->shape()) + ", state " + shape_str(state.m[i].shape()));
    }
    if (!p.grad->all_finite()) throw NumericError("adam: non-finite gradient in " + p.name);
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(cfg.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(cfg.beta2, t));
  const T lr = static_cast<T>(cfg.lr);
  const T eps = static_cast<T>(cfg.epsilon);

  for (std::size_t i = 0; i < params.size(); ++i) {
    T* w = params[i].value->raw();
    const T* g = params[i].grad->raw();
    T* m = state.m[i].raw();
    T* v = state.v[i].raw();
    for (std::size_t j = 0; j < params[i].value->size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const T m_hat = m[j] / c1;
      const T v_hat = v[j] / c2;
      w[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

/// Stateful wrapper owning its AdamState.
template <class T>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  void step(std::span<const ParamRef<T>> params) { adam_step(params, state_, cfg_); }

  const AdamConfig& config() const noexcept { return cfg_; }
  const AdamState<T>& state() const noexcept { return state_; }

 private:
  AdamConfig cfg_;
  AdamState<T> state_;
};

enum class StopDecision { kContinue, kStop };

/// Early stopping on a monitored loss.
///
/// An epoch improves when its value is strictly below the best so far. The
/// policy asks to stop once `patience` consecutive epochs fail to improve.
/// Whenever an epoch improves, `update` calls the supplied snapshot functor
/// and keeps the result so the best weights can be restored later.
template <class Snapshot>
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience = 3) : patience_(patience) {}

  template <class TakeSnapshot>
  StopDecision update(double value, TakeSnapshot&& take_snapshot) {
    if (!std::isfinite(value)) {
      throw NumericError("early stopping: non-finite monitored value at epoch " + std::to_string(epoch_ + 1));
    }
    ++epoch_;
    if (value < best_value_) {
      best_value_ = value;
      best_epoch_ = epoch_;
      since_improvement_ = 0;
      best_ = std::forward<TakeSnapshot>(take_snapshot)();
    } else {
      ++since_improvement_;
    }
    return since_improvement_ >= patience_ && epoch_ > best_epoch_ ? StopDecision::kStop
                                                                   : StopDecision::kContinue;
  }

  std::size_t patience() const noexcept { return patience_; }
  std::size_t epochs_seen() const noexcept { return epoch_; }
  /// 1-based epoch of the best value; 0 before any update.
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_value() const noexcept { return best_value_; }
  std::size_t epochs_since_improvement() const noexcept { return since_improvement_; }
  const std::optional<Snapshot>& best_snapshot() const noexcept { return best_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t since_improvement_ = 0;
  double best_value_ = std::numeric_limits<double>::infinity();
  std::optional<Snapshot> best_;
};

}  // namespace gournet
