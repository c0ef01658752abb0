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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gournet/config.hpp"
#include "gournet/error.hpp"
#include "gournet/layers.hpp"
#include "gournet/optimize.hpp"
#include "gournet/rng.hpp"
#include "gournet/tensor.hpp"

namespace gournet {

/// Runtime layer. forward() caches what backward() needs; backward() returns
/// the input gradient and overwrites the layer's parameter gradients.
template <class T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual Tensor<T> forward(const Tensor<T>& input) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual std::vector<ParamRef<T>> params() { return {}; }
  virtual LayerKind kind() const = 0;

  const std::string& name() const noexcept { return name_; }

 protected:
  explicit Layer(std::string name) : name_(std::move(name)) {}

 private:
  std::string name_;
};

template <class T>
class Conv2DLayer final : public Layer<T> {
 public:
  Conv2DLayer(std::string name, Weights<T> w, Padding pad)
      : Layer<T>(std::move(name)), w_(std::move(w)), pad_(pad),
        grad_{Tensor<T>(w_.kernel.shape()), Tensor<T>(w_.bias.shape())} {}

  Tensor<T> forward(const Tensor<T>& input) override {
    input_ = input;
    return conv2d_forward(input, w_, pad_);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    auto g = conv2d_backward(grad_out, input_, w_, pad_);
    grad_.kernel = std::move(g.kernel);
    grad_.bias = std::move(g.bias);
    return std::move(g.input);
  }
  std::vector<ParamRef<T>> params() override {
    return {{this->name() + "/kernel", &w_.kernel, &grad_.kernel}, {this->name() + "/bias", &w_.bias, &grad_.bias}};
  }
  LayerKind kind() const override { return LayerKind::kConv2D; }

 private:
  Weights<T> w_;
  Padding pad_;
  Weights<T> grad_;
  Tensor<T> input_;
};

template <class T>
class DenseLayer final : public Layer<T> {
 public:
  DenseLayer(std::string name, Weights<T> w)
      : Layer<T>(std::move(name)), w_(std::move(w)), grad_{Tensor<T>(w_.kernel.shape()), Tensor<T>(w_.bias.shape())} {}

  Tensor<T> forward(const Tensor<T>& input) override {
    input_ = input;
    return dense_forward(input, w_);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    auto g = dense_backward(grad_out, input_, w_);
    grad_.kernel = std::move(g.kernel);
    grad_.bias = std::move(g.bias);
    return std::move(g.input);
  }
  std::vector<ParamRef<T>> params() override {
    return {{this->name() + "/kernel", &w_.kernel, &grad_.kernel}, {this->name() + "/bias", &w_.bias, &grad_.bias}};
  }
  LayerKind kind() const override { return LayerKind::kDense; }

 private:
  Weights<T> w_;
  Weights<T> grad_;
  Tensor<T> input_;
};

template <class T>
class MaxPool2DLayer final : public Layer<T> {
 public:
  MaxPool2DLayer(std::string name, std::size_t ph, std::size_t pw) : Layer<T>(std::move(name)), ph_(ph), pw_(pw) {}

  Tensor<T> forward(const Tensor<T>& input) override {
    input_shape_ = input.shape();
    auto r = maxpool2d_forward(input, ph_, pw_);
    argmax_ = std::move(r.argmax);
    return std::move(r.output);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    return maxpool2d_backward(grad_out, argmax_, input_shape_);
  }
  LayerKind kind() const override { return LayerKind::kMaxPool2D; }

 private:
  std::size_t ph_, pw_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

template <class T>
class ReLULayer final : public Layer<T> {
 public:
  explicit ReLULayer(std::string name) : Layer<T>(std::move(name)) {}

  Tensor<T> forward(const Tensor<T>& input) override {
    input_ = input;
    return relu(input);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override { return relu_backward(grad_out, input_); }
  LayerKind kind() const override { return LayerKind::kReLU; }

 private:
  Tensor<T> input_;
};

template <class T>
class FlattenLayer final : public Layer<T> {
 public:
  explicit FlattenLayer(std::string name) : Layer<T>(std::move(name)) {}

  Tensor<T> forward(const Tensor<T>& input) override {
    input_shape_ = input.shape();
    return input.reshaped({input.dim(0), input.size() / input.dim(0)});
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override { return grad_out.reshaped(input_shape_); }
  LayerKind kind() const override { return LayerKind::kFlatten; }

 private:
  Shape input_shape_;
};

template <class T>
class SoftmaxLayer final : public Layer<T> {
 public:
  explicit SoftmaxLayer(std::string name) : Layer<T>(std::move(name)) {}

  Tensor<T> forward(const Tensor<T>& input) override {
    probs_ = softmax(input);
    return probs_;
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override { return softmax_backward(grad_out, probs_); }
  LayerKind kind() const override { return LayerKind::kSoftmax; }

 private:
  Tensor<T> probs_;
};

/// Sequential stack built from a ModelConfig.
///
/// Conv and dense activations become their own runtime layers. A trailing
/// softmax is kept separate so training can use the fused softmax +
/// cross-entropy gradient: logits() stops short of it, forward() includes it.
/// One caller at a time: forward() caches activations for backward().
template <class T>
class Model {
 public:
  /// Glorot-uniform kernels and zero biases, drawn in layer order from Rng(seed).
  Model(const ModelConfig& cfg, std::uint64_t seed) : config_(cfg) {
    Rng rng(seed);
    Shape shape = cfg.input;
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
      const LayerSpec& s = cfg.layers[i];
      const std::string name = layer_name(s, i + 1);
      const Shape out = infer_output_shape(s, shape);
      switch (s.kind) {
        case LayerKind::kConv2D: {
          const std::size_t cin = shape[2];
          Weights<T> w{glorot_uniform<T>({s.kernel_h, s.kernel_w, cin, s.filters}, s.kernel_h * s.kernel_w * cin,
                                         s.kernel_h * s.kernel_w * s.filters, rng),
                       Tensor<T>({s.filters})};
          layers_.push_back(std::make_unique<Conv2DLayer<T>>(name, std::move(w), s.padding));
          break;
        }
        case LayerKind::kDense: {
          Weights<T> w{glorot_uniform<T>(shape[0], s.units, rng), Tensor<T>({s.units})};
          layers_.push_back(std::make_unique<DenseLayer<T>>(name, std::move(w)));
          break;
        }
        case LayerKind::kMaxPool2D:
          layers_.push_back(std::make_unique<MaxPool2DLayer<T>>(name, s.pool_h, s.pool_w));
          break;
        case LayerKind::kFlatten:
          layers_.push_back(std::make_unique<FlattenLayer<T>>(name));
          break;
        case LayerKind::kReLU:
          layers_.push_back(std::make_unique<ReLULayer<T>>(name));
          break;
        case LayerKind::kSoftmax:
          layers_.push_back(std::make_unique<SoftmaxLayer<T>>(name));
          break;
        case LayerKind::kBatchNorm:
          throw ArgumentError(name + " is an accounting-only entry and cannot be executed");
      }
      if (s.activation == Activation::kReLU) layers_.push_back(std::make_unique<ReLULayer<T>>(name + "/relu"));
      if (s.activation == Activation::kSoftmax) {
        layers_.push_back(std::make_unique<SoftmaxLayer<T>>(name + "/softmax"));
      }
      shape = out;
    }
    output_shape_ = shape;
  }

  const ModelConfig& config() const noexcept { return config_; }
  std::size_t num_classes() const noexcept { return output_shape_.back(); }

  /// Pre-softmax scores, N x K.
  Tensor<T> logits(const Tensor<T>& input) {
    check_input(input);
    Tensor<T> x = input;
    for (std::size_t i = 0; i < head_end(); ++i) x = layers_[i]->forward(x);
    return x;
  }

  /// Class probabilities, N x K.
  Tensor<T> forward(const Tensor<T>& input) {
    Tensor<T> x = logits(input);
    for (std::size_t i = head_end(); i < layers_.size(); ++i) x = layers_[i]->forward(x);
    return x;
  }

  /// Backpropagates a gradient with respect to the logits of the last
  /// logits()/forward() call; returns the gradient with respect to the input.
  Tensor<T> backward_from_logits(const Tensor<T>& grad_logits) {
    Tensor<T> g = grad_logits;
    for (std::size_t i = head_end(); i-- > 0;) g = layers_[i]->backward(g);
    return g;
  }

  /// Trainable tensors in layer order: "<layer>/kernel", "<layer>/bias".
  std::vector<ParamRef<T>> params() {
    std::vector<ParamRef<T>> out;
    for (auto& l : layers_) {
      for (auto& p : l->params()) out.push_back(std::move(p));
    }
    return out;
  }

  std::uint64_t param_count() {
    std::uint64_t n = 0;
    for (const auto& p : params()) n += p.value->size();
    return n;
  }

  using Snapshot = std::vector<Tensor<T>>;

  Snapshot snapshot() {
    Snapshot s;
    for (const auto& p : params()) s.push_back(*p.value);
    return s;
  }

  void restore(const Snapshot& s) {
    auto ps = params();
    if (s.size() != ps.size()) throw ShapeError("restore: snapshot has the wrong number of tensors");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (s[i].shape() != ps[i].value->shape()) throw ShapeError("restore: shape mismatch for " + ps[i].name);
      *ps[i].value = s[i];
    }
  }

 private:
  std::size_t head_end() const {
    return !layers_.empty() && layers_.back()->kind() == LayerKind::kSoftmax ? layers_.size() - 1 : layers_.size();
  }

  void check_input(const Tensor<T>& input) const {
    if (input.rank() != 4 || Shape(input.shape().begin() + 1, input.shape().end()) != config_.input) {
      throw ShapeError("model: input " + shape_str(input.shape()) + " does not match N x " + shape_str(config_.input));
    }
  }

  ModelConfig config_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  Shape output_shape_;
};

}  // namespace gournet
