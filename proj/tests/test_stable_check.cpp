// Copyright 2026 The negdep Authors
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


#include <random>

#include <gtest/gtest.h>

#include "negdep/gallery.hpp"
#include "negdep/na_verify.hpp"
#include "negdep/stable_check.hpp"
#include "oracles.hpp"

using namespace negdep;

namespace {

void expect_sound_root(const MultiaffinePoly& poly, const RootWitness& w) {
  std::vector<double> coeffs(poly.coeffs().begin(), poly.coeffs().end());
  const auto value = oracle::evaluate(coeffs, poly.n(), w.point);
  EXPECT_LE(std::abs(value), 1e-8 * poly.sum_abs_coeffs());
  for (const auto& z : w.point) EXPECT_GE(z.imag(), 1e-12);
  EXPECT_TRUE(w.imag_parts_positive);
}

std::vector<BernoulliLaw> ust_fixtures() {
  std::vector<BernoulliLaw> out;
  for (auto name : {"ust-triangle", "ust-path3", "ust-square", "ust-diamond", "ust-k4"})
    out.push_back(std::get<BernoulliLaw>(build_gallery(name).value));
  return out;
}

}  // namespace

TEST(Bivariate, Examples) {
  EXPECT_TRUE(check_stable_bivariate(MultiaffinePoly(2, {0, 0.5, 0.5, 0})).holds());
  MultiaffinePoly bad(2, {0.5, 0, 0, 0.5});
  auto v = check_stable_bivariate(bad);
  ASSERT_TRUE(v.fails());
  expect_sound_root(bad, *v.witness);
  const double p = 0.3, q = 0.8;
  EXPECT_TRUE(check_stable_bivariate(MultiaffinePoly(2, {(1 - p) * (1 - q), p * (1 - q), (1 - p) * q, p * q})).holds());
}

TEST(Bivariate, Errors) {
  try {
    check_stable_bivariate(MultiaffinePoly(3, std::vector<double>(8, 0.125)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongDimension);
  }
  try {
    check_stable_bivariate(MultiaffinePoly(2, {0.5, -0.1, 0.3, 0.3}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeCoefficient);
  }
}

TEST(Numeric, AgreesWithBivariateOnRandomDraws) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  int fails = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    MultiaffinePoly poly(2, {u(rng), u(rng), u(rng), u(rng)});
    auto exact = check_stable_bivariate(poly);
    auto numeric = check_stable_numeric(poly, StableBudget{4, 20}, static_cast<std::uint64_t>(rep));
    ASSERT_EQ(exact.status, numeric.status) << "draw " << rep;
    if (numeric.fails()) {
      ++fails;
      if (rep % 50 == 0) expect_sound_root(poly, *numeric.witness);
    }
  }
  EXPECT_GT(fails, 1000);
}

TEST(Numeric, ElementarySymmetricHolds) {
  std::vector<double> e2(8, 0.0);
  e2[0b011] = e2[0b101] = e2[0b110] = 1.0 / 3.0;
  EXPECT_GE(oracle::delta_grid_min(e2, 3, 40, 0.25), -1e-15);
  auto v = check_stable_numeric(MultiaffinePoly(3, e2), StableBudget{}, 5);
  EXPECT_TRUE(v.holds());
  ASSERT_FALSE(v.notes.empty());
  EXPECT_NE(v.notes.back().find("certified-by-budget"), std::string::npos);
}

TEST(Numeric, RefutationsAreSound) {
  std::mt19937_64 rng(32);
  int checked = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 3 + rep % 3;
    auto law = oracle::random_law(n, rng, 0.5);
    auto poly = generating_polynomial(law);
    auto v = check_stable_numeric(poly, StableBudget{16, 60}, 100 + rep);
    if (v.fails()) {
      expect_sound_root(poly, *v.witness);
      ++checked;
    }
  }
  EXPECT_GT(checked, 10);
}

TEST(Numeric, GridOracleNegativeImpliesNotHolds) {
  std::mt19937_64 rng(33);
  for (int rep = 0; rep < 40; ++rep) {
    auto law = oracle::random_law(3, rng, 0.3);
    auto poly = generating_polynomial(law);
    std::vector<double> c(poly.coeffs().begin(), poly.coeffs().end());
    if (oracle::delta_grid_min(c, 3, 20, 0.5) < -1e-6) EXPECT_FALSE(check_stable_numeric(poly, StableBudget{}, rep).holds());
  }
}

TEST(Screen, Examples) {
  EXPECT_TRUE(sr_necessary_conditions(product_law({0.2, 0.5, 0.7})).holds());
  auto anti = sr_necessary_conditions(law_from_pmf({{"01", 0.5}, {"10", 0.5}}));
  EXPECT_TRUE(anti.holds());
  auto star = build_gallery("star-threshold-3");
  auto v = sr_necessary_conditions(std::get<BernoulliLaw>(star.value));
  ASSERT_TRUE(v.fails());
  EXPECT_EQ(v.witness->index, 0u);
  const double expected = 0.25 + 3.0 / (2 * std::numbers::pi) * std::asin(1 / std::sqrt(3.0));
  EXPECT_NEAR(v.witness->abs_sum, expected, 0.01);
  EXPECT_NE(std::find(v.witness->violated.begin(), v.witness->violated.end(), "abs_sum_le_half"),
            v.witness->violated.end());
}

TEST(StronglyRayleigh, Examples) {
  EXPECT_TRUE(check_strongly_rayleigh(ust_law({3, {{0, 1}, {1, 2}, {0, 2}}}), StableBudget{}, 1).holds());
  EXPECT_TRUE(check_strongly_rayleigh(law_from_pmf({{"00", 0.5}, {"11", 0.5}}), StableBudget{}, 1).fails());
  auto star = std::get<BernoulliLaw>(build_gallery("star-threshold-3").value);
  auto v = check_strongly_rayleigh(star, StableBudget{}, 7);
  EXPECT_FALSE(v.holds());
  EXPECT_TRUE(v.stages.at(1).skipped);
}

TEST(StronglyRayleigh, ScreenFailureImpliesFailure) {
  std::mt19937_64 rng(34);
  int seen = 0;
  for (int rep = 0; rep < 100; ++rep) {
    auto law = oracle::random_law(2 + rep % 4, rng, 0.3);
    if (sr_necessary_conditions(law).fails()) {
      ++seen;
      EXPECT_TRUE(check_strongly_rayleigh(law, StableBudget{4, 20}, rep).fails());
    }
  }
  EXPECT_GT(seen, 10);
}

TEST(StronglyRayleigh, SpanningTreeLawsHoldAndTheirProjectionsToo) {
  for (const auto& law : ust_fixtures()) {
    auto v = check_strongly_rayleigh(law, StableBudget{}, 9);
    ASSERT_TRUE(v.holds());
    EXPECT_TRUE(check_na_exact(law).holds());
    if (law.n() < 2) continue;
    for (std::size_t drop = 0; drop < law.n(); ++drop) {
      std::vector<std::size_t> keep;
      for (std::size_t k = 0; k < law.n(); ++k)
        if (k != drop) keep.push_back(k);
      EXPECT_TRUE(check_strongly_rayleigh(marginal(law, keep), StableBudget{}, 9).holds());
    }
  }
}

TEST(StronglyRayleigh, DeterministicGivenSeed) {
  std::mt19937_64 rng(35);
  auto law = oracle::random_law(4, rng, 0.2);
  auto a = check_stable_numeric(generating_polynomial(law), StableBudget{}, 77);
  auto b = check_stable_numeric(generating_polynomial(law), StableBudget{}, 77);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.budget_spent, b.budget_spent);
  if (a.witness) EXPECT_EQ(a.witness->point, b.witness->point);
}
