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


#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "negdep/gallery.hpp"
#include "negdep/gaussian.hpp"
#include "negdep/na_verify.hpp"
#include "oracles.hpp"

using namespace negdep;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

GaussianSpec pair_spec(double rho) {
  Eigen::MatrixXd c(2, 2);
  c << 1, rho, rho, 1;
  return centered_spec(c);
}

Eigen::MatrixXd random_cov(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(n, n + 2);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = normal(rng);
  return a * a.transpose() / static_cast<double>(n + 2);
}

// Explicit embedding of the Gram vectors, then projections by SVD of the tail block.
double explicit_tail_value(const Eigen::MatrixXd& gram, std::size_t head, std::size_t cut) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd vecs = root.asDiagonal() * es.eigenvectors().transpose();  // column i = v_i
  const auto m = gram.rows();
  Eigen::JacobiSVD<Eigen::MatrixXd> st(vecs.rightCols(m - static_cast<Eigen::Index>(cut) + 1), Eigen::ComputeThinU);
  Eigen::JacobiSVD<Eigen::MatrixXd> sh(vecs.leftCols(static_cast<Eigen::Index>(head)), Eigen::ComputeThinU);
  const double tt = st.singularValues()(0), th = sh.singularValues()(0);
  Eigen::Index rt = 0, rh = 0;
  while (rt < st.singularValues().size() && st.singularValues()(rt) > 1e-7 * tt) ++rt;
  while (rh < sh.singularValues().size() && sh.singularValues()(rh) > 1e-7 * th) ++rh;
  const Eigen::MatrixXd ut = st.matrixU().leftCols(rt), uh = sh.matrixU().leftCols(rh);
  Eigen::JacobiSVD<Eigen::MatrixXd> s(ut.transpose() * uh);
  return s.singularValues()(0);
}

}  // namespace

TEST(Validate, Examples) {
  EXPECT_NO_THROW(validate_spec(centered_spec(Eigen::MatrixXd::Identity(3, 3))));
  Eigen::MatrixXd bad(2, 2);
  bad << 0.45, 0.55, 0.55, 0.45;  // eigenvalues 1 and -0.1
  EXPECT_EQ(code_of([&] { validate_spec(centered_spec(bad)); }), ErrorCode::NotPSD);
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.2, 0.1, 1;
  EXPECT_EQ(code_of([&] { validate_spec(centered_spec(asym)); }), ErrorCode::AsymmetricCov);
  auto star = validate_spec(star_process(4));
  EXPECT_EQ(star.rank, 4u);
  EXPECT_TRUE(star.near_singular);
  EXPECT_NEAR(star.eigenvalues.minCoeff(), 0.0, 1e-12);
}

TEST(GaussianNA, Examples) {
  EXPECT_TRUE(gaussian_na_check(centered_spec(Eigen::MatrixXd::Identity(3, 3))).holds());
  EXPECT_TRUE(gaussian_na_check(log_growth_process(20)).holds());
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(3, 3);
  c(0, 2) = c(2, 0) = 0.2;
  auto v = gaussian_na_check(centered_spec(c));
  ASSERT_TRUE(v.fails());
  EXPECT_EQ(v.witness->i, 0u);
  EXPECT_EQ(v.witness->j, 2u);
}

TEST(Sample, DeterministicAndCalibrated) {
  auto spec = centered_spec(Eigen::MatrixXd::Identity(1, 1));
  auto a = sample(spec, 1'000'000, 42), b = sample(spec, 1'000'000, 42);
  EXPECT_TRUE((a.array() == b.array()).all());
  const double mean = a.col(0).mean();
  const double var = (a.col(0).array() - mean).square().sum() / (a.rows() - 1);
  EXPECT_LE(std::abs(var - 1.0), 3 * std::sqrt(2.0 / 1e6));
  EXPECT_LE(std::abs(mean), 3 / std::sqrt(1e6));
}

TEST(Sample, CovarianceOfSingularSpec) {
  auto spec = star_process(3);
  auto s = sample(spec, 200'000, 7);
  Eigen::MatrixXd centered = s.rowwise() - s.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / (s.rows() - 1);
  EXPECT_LE((cov - spec.cov).cwiseAbs().maxCoeff(), 5 * std::sqrt(2.0 / 200'000));
  // hub is exactly minus the scaled leaf sum
  for (Eigen::Index r = 0; r < 10; ++r)
    EXPECT_NEAR(s(r, 0), -(s(r, 1) + s(r, 2) + s(r, 3)) / std::sqrt(3.0), 1e-12);
}

TEST(ArcsinLaw, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(bivariate_threshold_cov(0.0), 0.0);
  EXPECT_DOUBLE_EQ(bivariate_threshold_cov(1.0), 0.25);
  EXPECT_DOUBLE_EQ(bivariate_threshold_cov(-1.0), -0.25);
  EXPECT_NEAR(bivariate_threshold_cov(0.5), 1.0 / 12.0, 1e-16);
  EXPECT_EQ(code_of([] { bivariate_threshold_cov(1.5); }), ErrorCode::OutOfRange);
  double prev = -1;
  for (double r = -1; r <= 1.0; r += 0.01) {
    EXPECT_DOUBLE_EQ(bivariate_threshold_cov(-r), -bivariate_threshold_cov(r));
    EXPECT_GE(bivariate_threshold_cov(r), prev);
    prev = bivariate_threshold_cov(r);
  }
}

TEST(ArcsinLaw, MatchesEmpiricalThresholdCovariance) {
  for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    auto z = oracle::gaussian_draws(pair_spec(rho).cov, 200'000, 1234);
    double e1 = 0, e2 = 0, e12 = 0;
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      const double x1 = z(r, 0) >= 0, x2 = z(r, 1) >= 0;
      e1 += x1;
      e2 += x2;
      e12 += x1 * x2;
    }
    const double n = static_cast<double>(z.rows());
    const double emp = e12 / n - (e1 / n) * (e2 / n);
    EXPECT_LE(std::abs(emp - bivariate_threshold_cov(rho)), 3 * 0.25 / std::sqrt(n)) << "rho " << rho;
  }
}

TEST(Orthant, ClosedFormExamples) {
  auto one = centered_spec(Eigen::MatrixXd::Identity(1, 1));
  EXPECT_DOUBLE_EQ(orthant_probability({one, "1"}, OrthantMethod::closed_form, 0, 0).probability, 0.5);
  EXPECT_NEAR(orthant_probability({pair_spec(0.5), "11"}, OrthantMethod::closed_form, 0, 0).probability, 1.0 / 3.0,
              1e-15);
  Eigen::MatrixXd c4 = Eigen::MatrixXd::Identity(4, 4);
  EXPECT_EQ(code_of([&] { orthant_probability({centered_spec(c4), "1111"}, OrthantMethod::closed_form, 0, 0); }),
            ErrorCode::ClosedFormUnavailable);
}

TEST(Orthant, TrivariateClosedFormMatchesSampling) {
  Eigen::MatrixXd c(3, 3);
  c << 1, -0.3, 0.2, -0.3, 1, -0.5, 0.2, -0.5, 1;
  const auto spec = centered_spec(c);
  const double closed = orthant_probability({spec, "111"}, OrthantMethod::closed_form, 0, 0).probability;
  const double formula =
      0.125 + (std::asin(-0.3) + std::asin(0.2) + std::asin(-0.5)) / (4 * std::numbers::pi);
  EXPECT_NEAR(closed, formula, 1e-15);
  auto mc = orthant_probability({spec, "111"}, OrthantMethod::monte_carlo, 2e-4, 99);
  EXPECT_LE(std::abs(mc.probability - closed), 3 * mc.standard_error);
  auto z = oracle::gaussian_draws(c, 1'000'000, 5);
  double hits = 0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) hits += (z(r, 0) >= 0 && z(r, 1) >= 0 && z(r, 2) >= 0);
  const double p = hits / 1e6;
  EXPECT_LE(std::abs(p - closed), 3 * std::sqrt(closed * (1 - closed) / 1e6));
}

TEST(Orthant, GeneralThresholdsMatchSampling) {
  Eigen::MatrixXd c(2, 2);
  c << 2.0, -0.6, -0.6, 0.5;
  GaussianSpec spec{Eigen::Vector2d(0.3, -0.2), c, Eigen::Vector2d(1.0, -0.5)};
  auto z = oracle::gaussian_draws(c, 1'000'000, 6);
  for (std::string pat : {"11", "10", "01", "00"}) {
    const double closed = orthant_probability({spec, pat}, OrthantMethod::closed_form, 0, 0).probability;
    double hits = 0;
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      const bool b0 = z(r, 0) + 0.3 >= 1.0, b1 = z(r, 1) - 0.2 >= -0.5;
      hits += (b0 == (pat[0] == '1')) && (b1 == (pat[1] == '1'));
    }
    const double p = hits / 1e6;
    EXPECT_LE(std::abs(p - closed), 3.5 * std::sqrt(std::max(closed * (1 - closed), 1e-6) / 1e6)) << pat;
  }
}

TEST(Orthant, PatternsSumToOne) {
  std::mt19937_64 rng(8);
  GaussianSpec spec = centered_spec(random_cov(4, rng));
  spec.thresholds = Eigen::Vector4d(0.1, -0.3, 0.0, 0.5);
  double total = 0, se = 0;
  for (Mask m = 0; m < 16; ++m) {
    auto r = orthant_probability({spec, mask_to_pattern(m, 4)}, OrthantMethod::monte_carlo, 2e-3, 17);
    EXPECT_LE(r.standard_error, 2e-3);
    total += r.probability;
    se += r.standard_error;
  }
  EXPECT_LE(std::abs(total - 1.0), 4 * se);
}

TEST(Orthant, PrecisionUnreachableUnderCap) {
  auto spec = centered_spec(Eigen::MatrixXd::Identity(4, 4));
  EXPECT_EQ(code_of([&] { orthant_probability({spec, "1010"}, OrthantMethod::monte_carlo, 1e-6, 1, 1 << 16); }),
            ErrorCode::PrecisionUnreachable);
}

TEST(ThresholdLaw, BivariateHalfCorrelation) {
  auto t = threshold_law(pair_spec(0.5), 1e-4, 1);
  EXPECT_EQ(t.method, OrthantMethod::closed_form);
  EXPECT_NEAR(t.law.prob(0b11), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(t.law.prob(0b00), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(t.law.prob(0b01), 1.0 / 6.0, 1e-14);
  EXPECT_NEAR(t.law.prob(0b10), 1.0 / 6.0, 1e-14);
}

TEST(ThresholdLaw, IndependentSpecGivesProductLaw) {
  GaussianSpec spec = centered_spec(Eigen::MatrixXd::Identity(5, 5));
  spec.thresholds << -1.0, -0.5, 0.0, 0.5, 1.0;
  auto t = threshold_law(spec, 1e-3, 3);
  std::vector<double> p;
  for (Eigen::Index i = 0; i < 5; ++i) p.push_back(normal_tail(spec.thresholds(i)));
  auto prod = product_law(p);
  for (Mask m = 0; m < 32; ++m) EXPECT_LE(std::abs(t.law.prob(m) - prod.prob(m)), 4 * t.max_stderr + 1e-12);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_LE(std::abs(t.law.mean(i) - p[i]), 3 * 0.5 / std::sqrt(t.samples / 2.0));
  // three coordinates with zero thresholds: exact closed form
  auto exact = threshold_law(centered_spec(Eigen::MatrixXd::Identity(3, 3)), 1e-3, 3);
  for (Mask m = 0; m < 8; ++m) EXPECT_NEAR(exact.law.prob(m), 0.125, 1e-15);
}

TEST(ThresholdLaw, NegativelyCorrelatedSpecsGiveNALaws) {
  for (auto name : {"star-3", "log-growth-4", "log-growth-6", "ma1-5", "star-5"}) {
    auto spec = std::get<GaussianSpec>(build_gallery(name).value);
    ASSERT_TRUE(gaussian_na_check(spec).holds());
    auto t = threshold_law(spec, 1e-3, 21);
    const double tol = t.method == OrthantMethod::monte_carlo ? t.noise_tolerance() : 1e-10;
    EXPECT_TRUE(check_na_exact(t.law, tol).holds()) << name;
  }
}

TEST(ThresholdLaw, Deterministic) {
  auto a = threshold_law(star_process(3), 1e-3, 5), b = threshold_law(star_process(3), 1e-3, 5);
  for (Mask m = 0; m < 16; ++m) EXPECT_EQ(a.law.prob(m), b.law.prob(m));
}

TEST(ThresholdCovariance, ArcsinMatrix) {
  auto spec = log_growth_process(30);
  auto m = threshold_covariance_matrix(spec);
  for (Eigen::Index i = 0; i < 30; ++i)
    for (Eigen::Index j = 0; j < 30; ++j) {
      const double rho = spec.cov(i, j) / std::sqrt(spec.cov(i, i) * spec.cov(j, j));
      EXPECT_NEAR(m(i, j), i == j ? 0.25 : std::asin(rho) / (2 * std::numbers::pi), 1e-15);
    }
}

TEST(CanonicalCorrelation, Examples) {
  EXPECT_NEAR(max_linear_correlation(centered_spec(Eigen::MatrixXd::Identity(4, 4)), {0, 1}, {2, 3}).value, 0.0,
              1e-15);
  for (double rho : {-0.7, 0.0, 0.3, 0.99})
    EXPECT_NEAR(max_linear_correlation(pair_spec(rho), {0}, {1}).value, std::abs(rho), 1e-15);
  EXPECT_EQ(code_of([] { max_linear_correlation(pair_spec(0.1), {0}, {0}); }), ErrorCode::OverlappingRanges);
  EXPECT_EQ(code_of([] { max_linear_correlation(pair_spec(0.1), {}, {1}); }), ErrorCode::EmptyCoordinateSet);
}

TEST(CanonicalCorrelation, MatchesDirectionSearch) {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 5; ++rep) {
    auto cov = random_cov(8, rng);
    const std::vector<std::size_t> a{0, 1, 2, 3}, b{4, 5, 6, 7};
    const double value = max_linear_correlation(centered_spec(cov), a, b).value;
    const double random_best = oracle::random_direction_correlation(cov, a, b, 100'000, 100 + rep);
    const double climbed = oracle::hill_climb_correlation(cov, a, b, 100'000, 200 + rep);
    EXPECT_GE(value, random_best - 1e-9);
    EXPECT_GE(value, climbed - 1e-9);
    EXPECT_LE(value - climbed, 1e-3);
  }
}

TEST(CanonicalCorrelation, InvariantUnderBlockwiseReparametrization) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 10; ++rep) {
    auto cov = random_cov(5, rng);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(5, 5);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) t(i, j) = normal(rng);
    for (int i = 2; i < 5; ++i)
      for (int j = 2; j < 5; ++j) t(i, j) = normal(rng);
    t += 3 * Eigen::MatrixXd::Identity(5, 5);
    const double before = max_linear_correlation(centered_spec(cov), {0, 1}, {2, 3, 4}).value;
    const double after = max_linear_correlation(centered_spec(t * cov * t.transpose()), {0, 1}, {2, 3, 4}).value;
    EXPECT_NEAR(before, after, 1e-9);
  }
}

TEST(TailProfile, Examples) {
  auto id = tail_projection_profile(Eigen::MatrixXd::Identity(10, 10), 2, {3, 5, 10});
  for (double v : id.values) EXPECT_NEAR(v, 0.0, 1e-15);
  auto rep = tail_projection_profile(Eigen::MatrixXd::Ones(10, 10), 1, {2, 5, 10});
  for (double v : rep.values) EXPECT_NEAR(v, 1.0, 1e-9);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
  bad(0, 0) = -1;
  EXPECT_EQ(code_of([&] { tail_projection_profile(bad, 1, {2}); }), ErrorCode::NotPSD);
}

TEST(TailProfile, LogGrowthDecaysAndMatchesExplicitProjection) {
  const auto gram = log_growth_process(200).cov;
  std::vector<std::size_t> cuts{2, 5, 10, 20, 50, 100, 150, 200};
  auto t = tail_projection_profile(gram, 1, cuts);
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    EXPECT_GT(t.values[k], 0.0);
    EXPECT_LE(t.values[k], 1.0);
    if (k) EXPECT_LT(t.values[k], t.values[k - 1]);
    EXPECT_NEAR(t.values[k], explicit_tail_value(gram, 1, cuts[k]), 1e-6);
  }
  auto t3 = tail_projection_profile(gram, 3, {4, 10, 40});
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(t3.values[k], explicit_tail_value(gram, 3, t3.cut_points[k]), 1e-6);
}
