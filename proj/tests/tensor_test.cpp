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

#include "gournet/tensor.hpp"
#include "support/oracles.hpp"

namespace gournet {
namespace {

TEST(TensorTest, ShapeAndSizeAgree) {
  Tensor<float> t({2, 3, 4});
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.rank(), 3u);
  EXPECT_THROW(Tensor<float>({2, 3}, std::vector<float>(5)), ShapeError);
  EXPECT_THROW(Tensor<float>({2, 0}), ShapeError);
}

TEST(TensorTest, ReshapeKeepsDataAndRejectsCountChange) {
  Tensor<float> t({2, 3}, {1, 2, 3, 4, 5, 6});
  const auto r = t.reshaped({3, 2});
  EXPECT_EQ(r.at({2, 1}), 6.0f);
  EXPECT_EQ(t.shape(), (Shape{2, 3}));
  EXPECT_THROW((void)t.reshaped({4, 2}), ShapeError);
}

TEST(MatmulTest, IdentityLeavesMatrixUnchanged) {
  Tensor<float> eye({2, 2}, {1, 0, 0, 1});
  Tensor<float> m({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(matmul(eye, m), m);
}

TEST(MatmulTest, RowTimesColumnIsDotProduct) {
  Tensor<float> a({1, 2}, {1, 2});
  Tensor<float> b({2, 1}, {3, 4});
  EXPECT_EQ(matmul(a, b).at({0, 0}), 11.0f);
}

TEST(MatmulTest, MismatchNamesBothShapes) {
  Tensor<float> a({2, 3});
  Tensor<float> b({4, 5});
  try {
    (void)matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("[2x3]"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[4x5]"), std::string::npos);
  }
}

TEST(MatmulTest, MatchesTripleLoopOracle5x7x3) {
  Rng rng(7);
  auto a = oracle::random_tensor({5, 7}, rng);
  auto b = oracle::random_tensor({7, 3}, rng);
  const auto c = matmul(a.cast<float>(), b.cast<float>());
  const auto ref = oracle::matmul({a.data().begin(), a.data().end()}, {b.data().begin(), b.data().end()}, 5, 7, 3);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(c[i], ref[i], 1e-5);
}

TEST(MatmulTest, MatchesOracleOn50RandomShapes) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = 1 + rng.below(9), k = 1 + rng.below(9), n = 1 + rng.below(9);
    auto a = oracle::random_tensor({m, k}, rng);
    auto b = oracle::random_tensor({k, n}, rng);
    const auto c = matmul(a, b);
    const auto ref = oracle::matmul({a.data().begin(), a.data().end()}, {b.data().begin(), b.data().end()}, m, k, n);
    for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(c[i], ref[i], 1e-12) << "trial " << trial;
  }
}

TEST(MatmulTest, TransposedGemmVariantsMatchExplicitTranspose) {
  Rng rng(3);
  const std::size_t m = 4, k = 5, n = 3;
  auto a = oracle::random_tensor({m, k}, rng);
  auto b = oracle::random_tensor({k, n}, rng);
  Tensor<double> at({k, m}), bt({n, k});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) at.at({p, i}) = a.at({i, p});
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t j = 0; j < n; ++j) bt.at({j, p}) = b.at({p, j});
  const auto ref = matmul(a, b);
  for (auto [ta, tb] : {std::pair{Trans::kYes, Trans::kNo}, {Trans::kNo, Trans::kYes}, {Trans::kYes, Trans::kYes}}) {
    Tensor<double> c({m, n});
    gemm(ta, tb, m, n, k, (ta == Trans::kYes ? at : a).raw(), (tb == Trans::kYes ? bt : b).raw(), c.raw(), false);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], ref[i], 1e-12);
  }
}

TEST(MatmulTest, AssociativityOnRandomInstances) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = 1 + rng.below(6), k = 1 + rng.below(6), l = 1 + rng.below(6), n = 1 + rng.below(6);
    const auto a = oracle::random_tensor({m, k}, rng).cast<float>();
    const auto b = oracle::random_tensor({k, l}, rng).cast<float>();
    const auto c = oracle::random_tensor({l, n}, rng).cast<float>();
    const auto left = matmul(matmul(a, b), c);
    const auto right = matmul(a, matmul(b, c));
    double num = 0, den = 0;
    for (std::size_t i = 0; i < left.size(); ++i) {
      num = std::max(num, static_cast<double>(std::abs(left[i] - right[i])));
      den = std::max(den, static_cast<double>(std::abs(right[i])));
    }
    EXPECT_LT(num / std::max(den, 1.0), 1e-4);
  }
}

TEST(ElementwiseTest, ExpOfZeroAndOne) {
  const auto e = exp(Tensor<double>({2}, {0.0, 1.0}));
  EXPECT_DOUBLE_EQ(e[0], 1.0);
  EXPECT_NEAR(e[1], 2.718281828, 1e-9);
}

TEST(ElementwiseTest, ExpMatchesWorkedExampleValue) {
  EXPECT_NEAR(exp(Tensor<float>({1}, {2.5f}))[0], 12.182f, 1e-3f);
}

TEST(ElementwiseTest, ScaleByScalar) {
  EXPECT_EQ(scale(Tensor<float>({2}, {2, 4}), 0.5f), Tensor<float>({2}, {1, 2}));
}

TEST(ElementwiseTest, BinaryOpsAndMismatch) {
  Tensor<float> a({3}, {1, -2, 3});
  Tensor<float> b({3}, {4, 5, -6});
  EXPECT_EQ(add(a, b), Tensor<float>({3}, {5, 3, -3}));
  EXPECT_EQ(sub(a, b), Tensor<float>({3}, {-3, -7, 9}));
  EXPECT_EQ(mul(a, b), Tensor<float>({3}, {4, -10, -18}));
  EXPECT_EQ(maximum(a, b), Tensor<float>({3}, {4, 5, 3}));
  EXPECT_THROW((void)add(a, Tensor<float>({2})), ShapeError);
}

TEST(ElementwiseTest, LogRejectsNonPositive) {
  EXPECT_NEAR(log(Tensor<double>({1}, {std::exp(2.0)}))[0], 2.0, 1e-12);
  EXPECT_THROW((void)log(Tensor<double>({2}, {1.0, 0.0})), DomainError);
  EXPECT_THROW((void)log(Tensor<double>({1}, {-3.0})), DomainError);
}

TEST(GlorotTest, UnitBoundWhenFansAreThree) {
  Rng rng(1);
  const auto w = glorot_uniform<float>(3, 3, rng);
  for (float v : w.data()) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(GlorotTest, BoundForFansSixIsSqrtHalf) {
  Rng rng(2);
  const auto w = glorot_uniform<double>({200, 200}, 6, 6, rng);
  double lo = 0, hi = 0;
  for (double v : w.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double bound = std::sqrt(0.5);
  EXPECT_LE(hi, bound);
  EXPECT_GE(lo, -bound);
  // 40k draws reach within 1% of both ends
  EXPECT_GT(hi, 0.99 * bound);
  EXPECT_LT(lo, -0.99 * bound);
}

TEST(GlorotTest, SameSeedSameTensorAndZeroFanRejected) {
  Rng a(99), b(99);
  EXPECT_EQ(glorot_uniform<float>(4, 5, a), glorot_uniform<float>(4, 5, b));
  Rng c(0);
  EXPECT_THROW((void)glorot_uniform<float>(0, 5, c), ArgumentError);
  EXPECT_THROW((void)glorot_uniform<float>(5, 0, c), ArgumentError);
}

TEST(RngTest, EqualSeedsEmitEqualStreams) {
  Rng a(123456789), b(123456789);
  for (int i = 0; i < 10000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngTest, FirstDrawIsPinned) {
  // xoshiro256** seeded through SplitMix64; pinned so any change to the
  // generator (which would silently change every seeded run) fails loudly.
  Rng rng(0);
  const std::uint64_t first = rng.next_u64();
  Rng again(0);
  EXPECT_EQ(again.next_u64(), first);
  EXPECT_EQ(first, 0x99EC5F36CB75F2B4ULL);
}

TEST(RngTest, BelowStaysInRangeAndShuffleIsAPermutation) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) ASSERT_LT(rng.below(7), 7u);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  rng.shuffle(w.begin(), w.end());
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

}  // namespace
}  // namespace gournet
