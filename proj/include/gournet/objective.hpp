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
#include <span>
#include <string>

#include "gournet/error.hpp"
#include "gournet/layers.hpp"
#include "gournet/tensor.hpp"

namespace gournet {

/// Probabilities are clamped to this floor before taking the log.
inline constexpr double kProbabilityFloor = 1e-12;

namespace detail {

template <class T>
void check_labels(const char* op, const Tensor<T>& rows, std::span<const int> labels) {
  if (rows.rank() != 2) throw ShapeError(std::string(op) + ": expected N x K, got " + shape_str(rows.shape()));
  if (labels.size() != rows.dim(0)) {
    throw ArgumentError(std::string(op) + ": " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(rows.dim(0)) + " rows");
  }
  const auto k = static_cast<int>(rows.dim(1));
  for (int y : labels) {
    if (y < 0 || y >= k) {
      throw ArgumentError(std::string(op) + ": label " + std::to_string(y) + " outside [0, " +
                          std::to_string(k) + ")");
    }
  }
}

}  // namespace detail

/// Sparse categorical cross-entropy: batch mean of -log p[i, y_i].
template <class T>
double sparse_ce_loss(const Tensor<T>& probs, std::span<const int> labels) {
  detail::check_labels("sparse_ce_loss", probs, labels);
  const std::size_t k = probs.dim(1);
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = static_cast<double>(probs[i * k + static_cast<std::size_t>(labels[i])]);
    sum -= std::log(std::max(p, kProbabilityFloor));
  }
  return sum / static_cast<double>(labels.size());
}

/// Gradient of sparse_ce_loss(softmax(logits)) with respect to the logits:
/// (softmax(logits) - onehot(labels)) / N.
template <class T>
Tensor<T> sparse_ce_grad_logits(const Tensor<T>& logits, std::span<const int> labels) {
  detail::check_labels("sparse_ce_grad_logits", logits, labels);
  Tensor<T> g = softmax(logits);
  const std::size_t k = logits.dim(1);
  const T inv_n = T(1) / static_cast<T>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    g[i * k + static_cast<std::size_t>(labels[i])] -= T(1);
    for (std::size_t j = 0; j < k; ++j) g[i * k + j] *= inv_n;
  }
  return g;
}

/// Index of the row maximum; ties go to the lowest index.
template <class T>
std::size_t argmax_row(const Tensor<T>& rows, std::size_t r) {
  const std::size_t k = rows.shape().back();
  const T* p = rows.raw() + r * k;
  return static_cast<std::size_t>(std::max_element(p, p + k) - p);
}

/// Number of rows whose argmax equals the label.
template <class T>
std::size_t count_correct(const Tensor<T>& probs, std::span<const int> labels) {
  detail::check_labels("accuracy", probs, labels);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    hits += argmax_row(probs, i) == static_cast<std::size_t>(labels[i]);
  }
  return hits;
}

template <class T>
double accuracy(const Tensor<T>& probs, std::span<const int> labels) {
  return static_cast<double>(count_correct(probs, labels)) / static_cast<double>(labels.size());
}

}  // namespace gournet
