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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gournet/objective.hpp"
#include "support/oracles.hpp"

namespace gournet {
namespace {

TEST(LossTest, OneHotAtLabelIsZero) {
  Tensor<double> p({2, 3}, {0, 1, 0, 1, 0, 0});
  const std::vector<int> y{1, 0};
  EXPECT_EQ(sparse_ce_loss(p, y), 0.0);
}

TEST(LossTest, UniformIsLogK) {
  const std::vector<int> y{3, 0, 7};
  EXPECT_NEAR(sparse_ce_loss(Tensor<double>({3, 8}, 0.125), y), 2.07944, 1e-5);
  EXPECT_NEAR(sparse_ce_loss(Tensor<float>({3, 8}, 0.125f), y), std::log(8.0), 1e-6);
}

TEST(LossTest, WorkedExampleRowAtTrueClass) {
  Tensor<double> p({1, 8}, {0.098, 0.002, 0.491, 0.018, 0.006, 0.329, 0.054, 0.001});
  const std::vector<int> y{2};
  EXPECT_NEAR(sparse_ce_loss(p, y), 0.711311, 1e-5);  // -ln 0.491
}

TEST(LossTest, ZeroProbabilityIsClampedFinite) {
  Tensor<double> p({1, 2}, {1.0, 0.0});
  const std::vector<int> y{1};
  EXPECT_NEAR(sparse_ce_loss(p, y), -std::log(1e-12), 1e-9);
}

TEST(LossTest, LabelOutOfRangeAndCountMismatch) {
  Tensor<double> p({1, 8}, 0.125);
  EXPECT_THROW((void)sparse_ce_loss(p, std::vector<int>{8}), ArgumentError);
  EXPECT_THROW((void)sparse_ce_loss(p, std::vector<int>{-1}), ArgumentError);
  EXPECT_THROW((void)sparse_ce_loss(p, std::vector<int>{0, 1}), ArgumentError);
}

TEST(LossTest, NonNegativeOnRandomRows) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto p = softmax(oracle::random_tensor({4, 8}, rng, -10, 10));
    std::vector<int> y(4);
    for (auto& v : y) v = static_cast<int>(rng.below(8));
    EXPECT_GE(sparse_ce_loss(p, y), 0.0);
  }
}

TEST(GradTest, HandArithmeticTwoClasses) {
  const auto g = sparse_ce_grad_logits(Tensor<double>({1, 2}), std::vector<int>{0});
  EXPECT_DOUBLE_EQ(g[0], -0.5);
  EXPECT_DOUBLE_EQ(g[1], 0.5);
}

TEST(GradTest, RowsSumToZero) {
  Rng rng(2);
  const auto z = oracle::random_tensor({6, 8}, rng, -5, 5);
  const std::vector<int> y{0, 1, 2, 3, 4, 7};
  const auto g = sparse_ce_grad_logits(z, y);
  for (std::size_t r = 0; r < 6; ++r) {
    double s = 0;
    for (std::size_t j = 0; j < 8; ++j) s += g[r * 8 + j];
    EXPECT_NEAR(s, 0.0, 1e-6);
  }
}

TEST(GradTest, FusedMatchesFiniteDifferences) {
  Rng rng(3);
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = 1 + rng.below(5), k = 2 + rng.below(9);
    auto z = oracle::random_tensor({n, k}, rng, -4, 4);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(k));
    auto loss = [&] { return sparse_ce_loss(softmax(z), y); };
    EXPECT_LT(oracle::max_rel_err(sparse_ce_grad_logits(z, y), oracle::numeric_grad(z, loss)), 1e-4)
        << "instance " << inst;
  }
}

TEST(GradTest, FusedEqualsCompositionOfParts) {
  Rng rng(4);
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = 1 + rng.below(5), k = 2 + rng.below(9);
    const auto z = oracle::random_tensor({n, k}, rng, -4, 4);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(k));
    const auto p = softmax(z);
    Tensor<double> dp({n, k});
    for (std::size_t i = 0; i < n; ++i) {
      dp[i * k + static_cast<std::size_t>(y[i])] = -1.0 / (static_cast<double>(n) * p[i * k + y[i]]);
    }
    const auto composed = softmax_backward(dp, p);
    const auto fused = sparse_ce_grad_logits(z, y);
    for (std::size_t i = 0; i < fused.size(); ++i) EXPECT_NEAR(fused[i], composed[i], 1e-6);
  }
}

TEST(AccuracyTest, OneHotRows) {
  Tensor<double> p({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  EXPECT_EQ(accuracy(p, std::vector<int>{0, 1, 2}), 1.0);
  EXPECT_EQ(accuracy(p, std::vector<int>{1, 2, 0}), 0.0);
}

TEST(AccuracyTest, WorkedExampleRow) {
  Tensor<double> p({1, 8}, {0.098, 0.002, 0.491, 0.018, 0.006, 0.329, 0.054, 0.001});
  EXPECT_EQ(accuracy(p, std::vector<int>{2}), 1.0);
  EXPECT_EQ(accuracy(p, std::vector<int>{5}), 0.0);
}

TEST(AccuracyTest, TiesGoToLowestIndex) {
  Tensor<double> p({1, 4}, 0.25);
  EXPECT_EQ(accuracy(p, std::vector<int>{0}), 1.0);
  EXPECT_EQ(accuracy(p, std::vector<int>{3}), 0.0);
}

}  // namespace
}  // namespace gournet
