/*
 * Copyright 2026 The ptest Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ptest/oracle.hpp"

#include <gtest/gtest.h>

#include <random>

#include "ptest/error.hpp"
#include "ptest/permanent.hpp"
#include "test_util.hpp"

namespace ptest {
namespace {

using testing::random_matrix;

std::unique_ptr<OracleFamily> make(std::string_view text, std::uint64_t seed = 1) {
  return make_oracle(parse_oracle_spec(text), EnsembleSampler(seed));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected ptest::Error";
  return ErrorCode::kInvalidParams;
}

TEST(ExactOracle, MatchesNaivePermanent) {
  auto oracle = make("exact");
  std::mt19937_64 rng(3);
  for (int k = 1; k <= 8; ++k) {
    for (int t = 0; t < 10; ++t) {
      const ComplexMatrix x = random_matrix(rng, k);
      EXPECT_LE(testing::rel_diff(oracle->query(k, x), permanent_naive(x)), 1e-9);
    }
  }
}

TEST(ZeroOracle, AlwaysZero) {
  auto oracle = make("zero");
  std::mt19937_64 rng(4);
  for (int k = 1; k <= 6; ++k) EXPECT_EQ(oracle->query(k, random_matrix(rng, k)), Complex(0.0));
}

TEST(AdditiveNoise, SeededFourByFourWithinBound) {
  auto oracle = make("noise:0.5");
  EnsembleSampler s(17);
  const ComplexMatrix x = sample_matrix(s, 4);
  EXPECT_LE(std::norm(oracle->query(4, x) - permanent_ryser(x)), 0.25 * 24.0);
}

TEST(AdditiveNoise, GoodOracleCertificate) {
  for (const char* text : {"noise:0.5", "noise-worst:0.5"}) {
    auto oracle = make(text);
    for (int k = 1; k <= 6; ++k) {
      EnsembleSampler s = EnsembleSampler(5).derive(static_cast<std::uint64_t>(k));
      const double bound = 0.25 * factorial(k) * (1.0 + 1e-12);
      int violations = 0;
      for (int i = 0; i < 10000; ++i) {
        const ComplexMatrix x = sample_matrix(s, k);
        if (std::norm(oracle->query(k, x) - permanent_ryser(x)) > bound) ++violations;
      }
      EXPECT_EQ(violations, 0) << text << " k=" << k;
    }
  }
}

TEST(AdditiveNoise, WorstCaseSitsOnTheBoundary) {
  auto oracle = make("noise-worst:0.3");
  EnsembleSampler s(8);
  for (int i = 0; i < 200; ++i) {
    const ComplexMatrix x = sample_matrix(s, 3);
    const double err = std::abs(oracle->query(3, x) - permanent_ryser(x));
    ASSERT_NEAR(err, 0.3 * std::sqrt(6.0), 1e-12);
  }
}

TEST(AdditiveNoise, DefaultFillsTheDiskInterior) {
  auto oracle = make("noise:1");
  EnsembleSampler s(9);
  double mean_sq = 0.0;
  constexpr int kDraws = 20000;
  for (int i = 0; i < kDraws; ++i) {
    const ComplexMatrix x = sample_matrix(s, 2);
    mean_sq += std::norm(oracle->query(2, x) - permanent_ryser(x)) / 2.0;
  }
  // Uniform on the unit disk: E|u|^2 = 1/2.
  EXPECT_NEAR(mean_sq / kDraws, 0.5, 0.01);
}

TEST(BuiltinOracles, DeterministicPerMatrix) {
  for (const char* text : {"noise:0.5", "corrupt:0.5:10", "heavy:0.5:2:3", "scaled:2", "shift:1"}) {
    auto a = make(text, 77);
    auto b = make(text, 77);
    EnsembleSampler s(10);
    for (int i = 0; i < 50; ++i) {
      const ComplexMatrix x = sample_matrix(s, 3);
      const Complex first = a->query(3, x);
      ASSERT_EQ(first, a->query(3, x)) << text;
      ASSERT_EQ(first, b->query(3, x)) << text;
    }
  }
}

TEST(BuiltinOracles, ConstructionSeedChangesNoise) {
  auto a = make("noise:0.5", 1);
  auto b = make("noise:0.5", 2);
  EnsembleSampler s(10);
  const ComplexMatrix x = sample_matrix(s, 3);
  EXPECT_NE(a->query(3, x), b->query(3, x));
}

TEST(CorruptedFraction, EmpiricalRateMatchesEta) {
  for (double eta : {0.05, 0.3}) {
    OracleSpec spec;
    spec.kind = OracleKind::kCorruptedFraction;
    spec.eta = eta;
    spec.magnitude = 100.0;
    auto oracle = make_oracle(spec, EnsembleSampler(3));
    EnsembleSampler s(44);
    int corrupted = 0;
    constexpr int kDraws = 100000;
    for (int i = 0; i < kDraws; ++i) {
      const ComplexMatrix x = sample_matrix(s, 1);
      if (oracle->query(1, x) == Complex(100.0)) ++corrupted;
    }
    EXPECT_NEAR(static_cast<double>(corrupted) / kDraws, eta, 0.01) << "eta=" << eta;
  }
}

TEST(HeavyTail, SpikeValue) {
  auto oracle = make("heavy:1:2:5");
  EnsembleSampler s(2);
  EXPECT_EQ(oracle->query(3, sample_matrix(s, 3)), Complex(2.0 * 5.0 * std::sqrt(6.0)));
}

TEST(ScaledAndShift, Values) {
  auto scaled = make("scaled:3");
  auto shifted = make("shift:2");
  EnsembleSampler s(6);
  const ComplexMatrix x = sample_matrix(s, 4);
  const Complex p = permanent_ryser(x);
  EXPECT_EQ(scaled->query(4, x), 3.0 * p);
  EXPECT_EQ(shifted->query(4, x), p + 2.0 * std::sqrt(24.0));
}

TEST(OracleFamily, QueryAccounting) {
  auto oracle = make("exact");
  EnsembleSampler s(1);
  for (int i = 0; i < 3; ++i) oracle->query(2, sample_matrix(s, 2));
  oracle->query(5, sample_matrix(s, 5));
  EXPECT_EQ(oracle->query_count(2), 3U);
  EXPECT_EQ(oracle->query_count(5), 1U);
  EXPECT_EQ(oracle->query_count(4), 0U);
  EXPECT_EQ(oracle->total_queries(), 4U);
  oracle->reset_counts();
  EXPECT_EQ(oracle->total_queries(), 0U);
}

TEST(OracleFamily, RejectsOutOfRangeQueries) {
  OracleSpec spec;
  spec.max_dim = 4;
  auto oracle = make_oracle(spec, EnsembleSampler(1));
  EXPECT_EQ(code_of([&] { oracle->query(5, ComplexMatrix(5)); }), ErrorCode::kDimensionTooLarge);
  EXPECT_EQ(code_of([&] { oracle->query(3, ComplexMatrix(2)); }), ErrorCode::kInvalidParams);
  EXPECT_EQ(oracle->total_queries(), 0U);
}

TEST(OracleSpec, ParseAndPrint) {
  EXPECT_EQ(parse_oracle_spec("exact").kind, OracleKind::kExact);
  const OracleSpec noise = parse_oracle_spec("noise:0.25");
  EXPECT_EQ(noise.kind, OracleKind::kAdditiveNoise);
  EXPECT_EQ(noise.noise_delta, 0.25);
  EXPECT_FALSE(noise.worst_case);
  EXPECT_TRUE(parse_oracle_spec("noise-worst:0.25").worst_case);
  const OracleSpec heavy = parse_oracle_spec("heavy:0.1:2");
  EXPECT_EQ(heavy.tail_T, 0.0);
  const OracleSpec remote = parse_oracle_spec("remote:tcp:127.0.0.1:9000");
  EXPECT_EQ(remote.endpoint, "tcp:127.0.0.1:9000");
  for (const char* text : {"exact", "zero", "noise:0.5", "noise-worst:0.125", "scaled:-2", "corrupt:0.05:100",
                           "heavy:0.1:2:37.5", "shift:40", "remote:ptest serve --oracle exact"}) {
    EXPECT_EQ(to_string(parse_oracle_spec(text)), text);
  }
}

TEST(OracleSpec, InvalidSpecs) {
  for (const char* text : {"", "bogus", "noise", "noise:-1", "noise:abc", "scaled:nan", "corrupt:1.5:2",
                           "corrupt:0.1", "heavy:2:1", "shift:inf", "remote:", "remote", "exact:1"}) {
    EXPECT_EQ(code_of([&] { parse_oracle_spec(text); }), ErrorCode::kInvalidSpec) << text;
  }
  EXPECT_EQ(code_of([] { make_oracle(parse_oracle_spec("heavy:0.1:2"), EnsembleSampler(1)); }),
            ErrorCode::kInvalidSpec);
  OracleSpec big;
  big.max_dim = 25;
  EXPECT_EQ(code_of([&] { make_oracle(big, EnsembleSampler(1)); }), ErrorCode::kInvalidSpec);
}

TEST(RemoteOracle, UnavailableEndpoints) {
  EXPECT_EQ(code_of([] { make("remote:exit 0"); }), ErrorCode::kRemoteUnavailable);
  EXPECT_EQ(code_of([] { make("remote:cat"); }), ErrorCode::kRemoteUnavailable);
  EXPECT_EQ(code_of([] { make("remote:tcp:127.0.0.1:1"); }), ErrorCode::kRemoteUnavailable);
}

TEST(HashUniform, SaltsAreIndependentAndUnitRange) {
  EnsembleSampler s(5);
  const std::uint64_t h = hash_matrix(1, sample_matrix(s, 3));
  EXPECT_NE(hash_uniform(h, 1), hash_uniform(h, 2));
  for (std::uint64_t salt = 0; salt < 1000; ++salt) {
    const double u = hash_uniform(h, salt);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

}  // namespace
}  // namespace ptest
