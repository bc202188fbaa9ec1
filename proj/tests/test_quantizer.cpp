/* Copyright 2026 The axemu Authors. All Rights Reserved.

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

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>
#include <vector>

#include "axemu/error.hpp"
#include "axemu/quantizer.hpp"
#include "support/oracles.hpp"

namespace axemu {
namespace {

TEST(ComputeCoeffs, UnsignedZeroTo255Hundredths) {
  const QuantParams p = compute_coeffs({0.0, 2.55}, Signedness::kUnsigned);
  EXPECT_EQ(p.alpha, 2.55 / 255.0);
  EXPECT_NEAR(p.alpha, 0.01, 1e-17);
  EXPECT_EQ(p.beta, 0);
  EXPECT_EQ(p.dequantize(0), 0.0);
}

TEST(ComputeCoeffs, DegenerateZeroRange) {
  const QuantParams p = compute_coeffs({0.0, 0.0}, Signedness::kSigned);
  EXPECT_EQ(p.alpha, 1.0);
  EXPECT_EQ(p.beta, -128);
  EXPECT_EQ(p.quantize(0.0), -128);
}

TEST(ComputeCoeffs, SymmetricSignedRangeMatchesExtendedPrecision) {
  const QuantParams p = compute_coeffs({-1.0, 1.0}, Signedness::kSigned);
  const auto oracle = testing::oracle_coeffs(-1.0, 1.0, Signedness::kSigned);
  EXPECT_EQ(p.beta, oracle.beta);
  EXPECT_EQ(p.beta, -1);
  EXPECT_EQ(p.alpha, 2.0 / 255.0);
  EXPECT_EQ(p.dequantize(p.quantize(0.0)), 0.0);
  EXPECT_GE(p.quantize(-1.0), -128);
  EXPECT_LE(p.quantize(1.0), 127);
}

TEST(ComputeCoeffs, RangeIsWidenedToContainZero) {
  const QuantParams pos = compute_coeffs({2.0, 5.1}, Signedness::kUnsigned);
  EXPECT_EQ(pos.alpha, 5.1 / 255.0);
  EXPECT_EQ(pos.beta, 0);
  const QuantParams neg = compute_coeffs({-5.1, -2.0}, Signedness::kUnsigned);
  EXPECT_EQ(neg.beta, 255);
}

TEST(ComputeCoeffs, MatchesLongDoubleOracleOnRandomRanges) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> end(-50.0, 50.0);
  for (int i = 0; i < 5000; ++i) {
    double a = end(rng), b = end(rng);
    if (a > b) std::swap(a, b);
    for (Signedness mode : {Signedness::kUnsigned, Signedness::kSigned}) {
      const QuantParams p = compute_coeffs({a, b}, mode);
      const auto o = testing::oracle_coeffs(a, b, mode);
      ASSERT_NEAR(p.alpha, static_cast<double>(o.alpha), 1e-15 * p.alpha);
      ASSERT_EQ(p.beta, o.beta) << a << " " << b;
    }
  }
}

TEST(ComputeCoeffs, RejectsNonFiniteAndInvertedRanges) {
  EXPECT_THROW(compute_coeffs({0.0, NAN}, Signedness::kUnsigned), Error);
  EXPECT_THROW(compute_coeffs({-INFINITY, 0.0}, Signedness::kSigned), Error);
  EXPECT_THROW(compute_coeffs({1.0, -1.0}, Signedness::kSigned), Error);
}

TEST(Quantize, FrozenExamples) {
  QuantParams p{0.01, 0, Signedness::kUnsigned, RoundMode::kHalfAwayFromZero};
  EXPECT_EQ(p.quantize(1.0), 100);
  EXPECT_EQ(p.quantize(300 * p.alpha), 255);
  EXPECT_EQ(p.quantize(-3.0), 0);
  EXPECT_EQ(p.dequantize(100), 1.0);
  EXPECT_THROW(p.quantize(NAN), Error);
}

TEST(Quantize, TensorRoundTripKeepsShapeAndLayout) {
  std::mt19937_64 rng(8);
  const Tensor4 t = testing::random_tensor({2, 3, 4, 5}, Layout::kHWCN, rng, -2.0f, 1.0f);
  const QuantParams p = compute_coeffs(tensor_min_max(t), Signedness::kSigned);
  const QuantTensor q = quantize(t, p);
  EXPECT_EQ(q.shape, t.shape());
  EXPECT_EQ(q.layout, t.layout());
  const Tensor4 back = dequantize(q);
  ASSERT_EQ(back.shape(), t.shape());
  for (std::int64_t i = 0; i < t.size(); ++i)
    EXPECT_LE(std::abs(back.data()[i] - t.data()[i]), p.alpha / 2 + 1e-6);
}

TEST(RoundWith, TieBreaking) {
  EXPECT_EQ(round_with(RoundMode::kHalfAwayFromZero, 2.5), 3.0);
  EXPECT_EQ(round_with(RoundMode::kHalfAwayFromZero, -2.5), -3.0);
  EXPECT_EQ(round_with(RoundMode::kHalfToEven, 2.5), 2.0);
  EXPECT_EQ(round_with(RoundMode::kHalfToEven, 3.5), 4.0);
  EXPECT_EQ(round_with(RoundMode::kHalfToEven, -2.5), -2.0);
  EXPECT_EQ(round_with(RoundMode::kHalfTowardZero, 2.5), 2.0);
  EXPECT_EQ(round_with(RoundMode::kHalfTowardZero, -2.5), -2.0);
  for (RoundMode m : {RoundMode::kHalfAwayFromZero, RoundMode::kHalfToEven, RoundMode::kHalfTowardZero}) {
    EXPECT_EQ(round_with(m, 2.49), 2.0);
    EXPECT_EQ(round_with(m, 2.51), 3.0);
    EXPECT_EQ(round_with(m, -2.51), -3.0);
    EXPECT_EQ(round_with(m, 7.0), 7.0);
  }
}

TEST(RoundMode, NamesRoundTrip) {
  for (RoundMode m : {RoundMode::kHalfAwayFromZero, RoundMode::kHalfToEven, RoundMode::kHalfTowardZero})
    EXPECT_EQ(parse_round_mode(round_mode_name(m)), m);
  EXPECT_THROW(parse_round_mode("banker"), Error);
  EXPECT_EQ(parse_signedness("signed"), Signedness::kSigned);
}

class QuantizerProperty : public ::testing::TestWithParam<std::tuple<Signedness, RoundMode>> {};

TEST_P(QuantizerProperty, ZeroExactIdempotentMonotoneAndBounded) {
  const auto [mode, round] = GetParam();
  std::mt19937_64 rng(static_cast<unsigned>(mode) * 7 + static_cast<unsigned>(round));
  std::uniform_real_distribution<double> end(-10.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    double a = end(rng), b = end(rng);
    if (a > b) std::swap(a, b);
    const QuantParams p = compute_coeffs({a, b}, mode, round);

    const double zero = p.dequantize(p.quantize(0.0));
    ASSERT_EQ(zero, 0.0);
    ASSERT_FALSE(std::signbit(zero));

    for (int code = p.lo(); code <= p.hi(); ++code) ASSERT_EQ(p.quantize(p.dequantize(code)), code);

    const double lo_r = p.dequantize(p.lo());
    const double hi_r = p.dequantize(p.hi());
    std::uniform_real_distribution<double> in_range(lo_r, hi_r);
    std::vector<double> values(10000);
    for (double& v : values) v = in_range(rng);
    std::sort(values.begin(), values.end());
    int prev = p.lo();
    for (double r : values) {
      const int code = p.quantize(r);
      ASSERT_GE(code, prev);
      prev = code;
      ASSERT_LE(std::abs(p.dequantize(code) - r), p.alpha / 2 * (1 + 1e-12));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(
    AllModes, QuantizerProperty,
    ::testing::Combine(::testing::Values(Signedness::kUnsigned, Signedness::kSigned),
                       ::testing::Values(RoundMode::kHalfAwayFromZero, RoundMode::kHalfToEven,
                                         RoundMode::kHalfTowardZero)));

}  // namespace
}  // namespace axemu
