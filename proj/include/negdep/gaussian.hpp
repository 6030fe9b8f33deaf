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

#ifndef NEGDEP_GAUSSIAN_HPP
#define NEGDEP_GAUSSIAN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "negdep/core.hpp"
#include "negdep/na_verify.hpp"

namespace negdep {

// ---------------------------------------------------------------------------
// Validation and factorization

struct ValidatedSpec {
  GaussianSpec spec;
  Eigen::VectorXd eigenvalues;  // ascending
  std::size_t rank = 0;
  bool near_singular = false;
};

namespace detail {

inline void check_spec_shape(const GaussianSpec& spec) {
  const auto n = spec.mean.size();
  if (n < 1) throw Error(ErrorCode::InconsistentDimension, "Gaussian spec needs dimension >= 1");
  if (spec.cov.rows() != n || spec.cov.cols() != n || spec.thresholds.size() != n)
    throw Error(ErrorCode::InconsistentDimension, "mean, cov and thresholds dimensions disagree");
  if (!spec.cov.allFinite() || !spec.mean.allFinite() || !spec.thresholds.allFinite())
    throw Error(ErrorCode::InvalidArgument, "Gaussian spec contains non-finite values");
}

inline void check_symmetric(const Eigen::MatrixXd& m, double tol = 1e-12) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol)
        throw Error(ErrorCode::AsymmetricCov, "matrix entries (" + std::to_string(i) + "," + std::to_string(j) +
                                                  ") differ by " + std::to_string(std::abs(m(i, j) - m(j, i))));
}

/// Eigenvalue floor relative to the trace, shared by validation and factorization.
inline double eigen_floor(const Eigen::MatrixXd& m) { return 1e-12 * std::max(m.trace(), 1e-300); }

}  // namespace detail

/// Checks shape, symmetry (1e-12) and positive semidefiniteness (smallest eigenvalue
/// >= -1e-10 * trace). Eigenvalues below 1e-12 * trace count as zero and flag the spec.
inline ValidatedSpec validate_spec(const GaussianSpec& spec) {
  detail::check_spec_shape(spec);
  detail::check_symmetric(spec.cov);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec.cov, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double trace = spec.cov.trace();
  if (ev(0) < -1e-10 * std::max(trace, 0.0) || (trace <= 0.0 && ev(0) < 0.0))
    throw Error(ErrorCode::NotPSD, "smallest eigenvalue " + std::to_string(ev(0)));
  ValidatedSpec out{spec, ev, 0, false};
  const double floor = detail::eigen_floor(spec.cov);
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > floor) ++out.rank;
  out.near_singular = out.rank < spec.n();
  return out;
}

/// Returns L (n x r) with L L^T = cov on its numerically nonsingular part; r is the numeric rank.
inline Eigen::MatrixXd square_root_factor(const Eigen::MatrixXd& cov) {
  detail::check_symmetric(cov);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::FactorizationFailure, "eigen-decomposition failed");
  const double trace = cov.trace();
  if (es.eigenvalues()(0) < -1e-10 * std::max(trace, 0.0))
    throw Error(ErrorCode::FactorizationFailure, "indefinite covariance, eigenvalue " +
                                                     std::to_string(es.eigenvalues()(0)));
  const double floor = detail::eigen_floor(cov);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    if (es.eigenvalues()(i) > floor) keep.push_back(i);
  Eigen::MatrixXd factor(cov.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    factor.col(static_cast<Eigen::Index>(c)) =
        es.eigenvectors().col(keep[c]) * std::sqrt(es.eigenvalues()(keep[c]));
  return factor;
}

/// NA for Gaussian vectors is equivalent to nonpositive off-diagonal covariances.
inline Verdict<PairWitness> gaussian_na_check(const GaussianSpec& spec, double tolerance = 1e-12) {
  detail::check_spec_shape(spec);
  Verdict<PairWitness> v;
  v.status = Status::holds;
  std::uint64_t pairs = 0;
  for (Eigen::Index i = 0; i < spec.cov.rows() && !v.witness; ++i)
    for (Eigen::Index j = i + 1; j < spec.cov.cols(); ++j) {
      ++pairs;
      if (spec.cov(i, j) > tolerance) {
        v.status = Status::fails;
        v.witness = PairWitness{static_cast<std::size_t>(i), static_cast<std::size_t>(j), spec.cov(i, j)};
        break;
      }
    }
  v.budget_spent["pairs_checked"] = pairs;
  return v;
}

// ---------------------------------------------------------------------------
// Random streams

namespace detail {

inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

inline constexpr std::uint64_t kSampleTag = 0x53414d50;
inline constexpr std::uint64_t kOrthantTag = 0x4f525448;

}  // namespace detail

/// `count` i.i.d. rows from N(mean, cov). Rows are produced in fixed-size shards with
/// counter-derived seeds, so output depends only on (spec, count, seed).
inline Eigen::MatrixXd sample(const GaussianSpec& spec, std::size_t count, std::uint64_t seed) {
  detail::check_spec_shape(spec);
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  const Eigen::MatrixXd factor = square_root_factor(spec.cov);
  const auto n = static_cast<Eigen::Index>(spec.n());
  const auto r = factor.cols();
  constexpr std::size_t kShard = 4096;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), n);
  Eigen::VectorXd w(r);
  for (std::size_t start = 0, shard = 0; start < count; start += kShard, ++shard) {
    auto engine = detail::stream_engine(seed, shard, detail::kSampleTag);
    std::normal_distribution<double> normal;
    const std::size_t stop = std::min(count, start + kShard);
    for (std::size_t row = start; row < stop; ++row) {
      for (Eigen::Index k = 0; k < r; ++k) w(k) = normal(engine);
      out.row(static_cast<Eigen::Index>(row)) = (spec.mean + factor * w).transpose();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closed forms

/// P(Z >= h) for a standard normal Z.
inline double normal_tail(double h) { return 0.5 * std::erfc(h / std::numbers::sqrt2); }

/// cov(1{Y1 >= 0}, 1{Y2 >= 0}) for a standardized pair with correlation rho: arcsin(rho) / 2π.
inline double bivariate_threshold_cov(double rho) {
  if (!(std::abs(rho) <= 1.0 + 1e-12)) throw Error(ErrorCode::OutOfRange, "correlation outside [-1,1]");
  rho = std::clamp(rho, -1.0, 1.0);
  return std::asin(rho) / (2.0 * std::numbers::pi);
}

/// P(Z1 >= h, Z2 >= k) for a standard bivariate normal with correlation rho.
inline double bivariate_upper_orthant(double h, double k, double rho) {
  if (!(std::abs(rho) <= 1.0 + 1e-12)) throw Error(ErrorCode::OutOfRange, "correlation outside [-1,1]");
  rho = std::clamp(rho, -1.0, 1.0);
  if (h == 0.0 && k == 0.0) return 0.25 + bivariate_threshold_cov(rho);
  if (rho >= 1.0 - 1e-15) return normal_tail(std::max(h, k));
  if (rho <= -1.0 + 1e-15) return std::max(0.0, normal_tail(h) - normal_tail(-k));
  const double s = std::sqrt(1.0 - rho * rho);
  auto integrand = [&](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi) * normal_tail((k - rho * x) / s);
  };
  const double lo = std::max(h, -40.0);
  const double hi = std::max(lo, 40.0);
  if (lo >= hi) return 0.0;
  // Split at the point where the inner tail switches from ~1 to ~0.
  double mid = rho != 0.0 ? k / rho : lo;
  double total = 0.0;
  using boost::math::quadrature::gauss_kronrod;
  if (mid > lo && mid < hi) {
    total += gauss_kronrod<double, 61>::integrate(integrand, lo, mid, 15, 1e-15);
    total += gauss_kronrod<double, 61>::integrate(integrand, mid, hi, 15, 1e-15);
  } else {
    total = gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 15, 1e-15);
  }
  return std::clamp(total, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Standardization

/// Correlation form of a spec. Coordinates with zero variance are deterministic and are
/// split off; `free` lists the remaining ones.
struct StandardizedSpec {
  std::vector<std::size_t> free;
  Eigen::MatrixXd corr;        // over free coordinates
  Eigen::VectorXd thresholds;  // (a - mean) / sd over free coordinates
  std::vector<int> fixed_value;  // per original coordinate: -1 free, else the constant X_i
};

inline StandardizedSpec standardize(const GaussianSpec& spec) {
  detail::check_spec_shape(spec);
  const std::size_t n = spec.n();
  const double scale = std::max(spec.cov.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  StandardizedSpec out;
  out.fixed_value.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (spec.cov(ii, ii) <= 1e-14 * scale)
      out.fixed_value[i] = spec.mean(ii) >= spec.thresholds(ii) ? 1 : 0;
    else
      out.free.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(out.free.size());
  out.corr.resize(m, m);
  out.thresholds.resize(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto i = static_cast<Eigen::Index>(out.free[static_cast<std::size_t>(a)]);
    const double si = std::sqrt(spec.cov(i, i));
    out.thresholds(a) = (spec.thresholds(i) - spec.mean(i)) / si;
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto j = static_cast<Eigen::Index>(out.free[static_cast<std::size_t>(b)]);
      out.corr(a, b) = a == b ? 1.0 : std::clamp(spec.cov(i, j) / (si * std::sqrt(spec.cov(j, j))), -1.0, 1.0);
    }
  }
  return out;
}

/// Covariance matrix of the threshold indicators, from pairwise closed forms (arcsin for
/// zero standardized thresholds, bivariate quadrature otherwise).
inline Eigen::MatrixXd threshold_covariance_matrix(const GaussianSpec& spec) {
  const auto st = standardize(spec);
  const auto n = static_cast<Eigen::Index>(spec.n());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  const auto m = static_cast<Eigen::Index>(st.free.size());
  Eigen::VectorXd tail(m);
  for (Eigen::Index a = 0; a < m; ++a) tail(a) = normal_tail(st.thresholds(a));
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto i = static_cast<Eigen::Index>(st.free[static_cast<std::size_t>(a)]);
    cov(i, i) = tail(a) * (1.0 - tail(a));
    for (Eigen::Index b = a + 1; b < m; ++b) {
      const auto j = static_cast<Eigen::Index>(st.free[static_cast<std::size_t>(b)]);
      const double h = st.thresholds(a), k = st.thresholds(b);
      const double c = (h == 0.0 && k == 0.0) ? bivariate_threshold_cov(st.corr(a, b))
                                              : bivariate_upper_orthant(h, k, st.corr(a, b)) - tail(a) * tail(b);
      cov(i, j) = cov(j, i) = c;
    }
  }
  return cov;
}

// ---------------------------------------------------------------------------
// Orthant probabilities

enum class OrthantMethod { closed_form, monte_carlo, automatic };

inline const char* to_string(OrthantMethod m) {
  switch (m) {
    case OrthantMethod::closed_form: return "closed_form";
    case OrthantMethod::monte_carlo: return "monte_carlo";
    case OrthantMethod::automatic: return "automatic";
  }
  return "unknown";
}

/// The event {X = pattern}: bit 1 means Z_i >= a_i, bit 0 means Z_i < a_i.
struct OrthantQuery {
  GaussianSpec spec;
  std::string pattern;
};

struct OrthantResult {
  double probability = 0.0;
  double standard_error = 0.0;
  OrthantMethod method = OrthantMethod::closed_form;
  std::uint64_t samples = 0;
};

inline constexpr std::uint64_t kDefaultSampleCap = std::uint64_t{1} << 27;

namespace detail {

inline bool zero_thresholds(const Eigen::VectorXd& h) { return (h.array().abs() <= 1e-12).all(); }

inline bool closed_form_available(const StandardizedSpec& st) {
  const auto m = st.free.size();
  return m <= 2 || (m == 3 && zero_thresholds(st.thresholds));
}

// Orthant probability on the free coordinates for compact pattern bits (bit a = free[a]).
inline double closed_form_orthant(const StandardizedSpec& st, Mask bits) {
  const auto m = static_cast<Eigen::Index>(st.free.size());
  Eigen::VectorXd h = st.thresholds;
  Eigen::MatrixXd r = st.corr;
  // {Z_a < h_a} = {-Z_a > -h_a}: flip the coordinate.
  for (Eigen::Index a = 0; a < m; ++a)
    if (!has_bit(bits, static_cast<std::size_t>(a))) {
      h(a) = -h(a);
      r.row(a) *= -1.0;
      r.col(a) *= -1.0;
    }
  switch (m) {
    case 0: return 1.0;
    case 1: return normal_tail(h(0));
    case 2: return bivariate_upper_orthant(h(0), h(1), r(0, 1));
    case 3: {
      const double s = std::asin(std::clamp(r(0, 1), -1.0, 1.0)) + std::asin(std::clamp(r(0, 2), -1.0, 1.0)) +
                       std::asin(std::clamp(r(1, 2), -1.0, 1.0));
      return std::max(0.0, 0.125 + s / (4.0 * std::numbers::pi));
    }
    default: throw Error(ErrorCode::ClosedFormUnavailable, "no closed form in dimension " + std::to_string(m));
  }
}

/// Antithetic Monte Carlo tallies over all 2^m patterns of the free coordinates.
struct PatternTally {
  std::uint64_t pairs = 0;
  std::vector<std::uint64_t> once;   // pairs where exactly one draw hit the pattern
  std::vector<std::uint64_t> twice;  // pairs where both draws hit it

  double estimate(std::size_t p) const {
    return (0.5 * static_cast<double>(once[p]) + static_cast<double>(twice[p])) / static_cast<double>(pairs);
  }
  double stderr_of(std::size_t p) const {
    if (pairs < 2) return 1.0;
    const double k = static_cast<double>(pairs);
    const double mean = estimate(p);
    const double second = (0.25 * static_cast<double>(once[p]) + static_cast<double>(twice[p])) / k;
    const double var = std::max(0.0, second - mean * mean) * k / (k - 1.0);
    return std::sqrt(var / k);
  }
};

// Runs shards of antithetic pairs until `done(tally)` or the cap is reached.
template <class Done>
PatternTally simulate_patterns(const StandardizedSpec& st, std::uint64_t seed, std::uint64_t sample_cap, Done&& done) {
  const auto m = static_cast<Eigen::Index>(st.free.size());
  const Eigen::MatrixXd factor = square_root_factor(st.corr);
  const auto r = factor.cols();
  PatternTally tally;
  tally.once.assign(std::size_t{1} << m, 0);
  tally.twice.assign(std::size_t{1} << m, 0);
  constexpr std::uint64_t kShardPairs = std::uint64_t{1} << 14;
  Eigen::VectorXd w(r), z(m);
  for (std::uint64_t shard = 0; 2 * tally.pairs < sample_cap; ++shard) {
    auto engine = stream_engine(seed, shard, kOrthantTag);
    std::normal_distribution<double> normal;
    for (std::uint64_t t = 0; t < kShardPairs; ++t) {
      for (Eigen::Index k = 0; k < r; ++k) w(k) = normal(engine);
      z.noalias() = factor * w;
      Mask plus = 0, minus = 0;
      for (Eigen::Index a = 0; a < m; ++a) {
        if (z(a) >= st.thresholds(a)) plus |= Mask{1} << a;
        if (-z(a) >= st.thresholds(a)) minus |= Mask{1} << a;
      }
      if (plus == minus) {
        ++tally.twice[plus];
      } else {
        ++tally.once[plus];
        ++tally.once[minus];
      }
    }
    tally.pairs += kShardPairs;
    if (done(tally)) break;
  }
  return tally;
}

// Pattern bits of the free coordinates, or nullopt when a deterministic coordinate contradicts it.
inline std::optional<Mask> free_pattern_bits(const StandardizedSpec& st, Mask full_bits) {
  for (std::size_t i = 0; i < st.fixed_value.size(); ++i)
    if (st.fixed_value[i] >= 0 && static_cast<int>(has_bit(full_bits, i)) != st.fixed_value[i]) return std::nullopt;
  return extract_bits(full_bits, st.free);
}

}  // namespace detail

/// Probability of an orthant event. The closed form covers n <= 2 (any thresholds) and n = 3
/// with zero standardized thresholds; Monte Carlo runs until stderr <= precision.
inline OrthantResult orthant_probability(const OrthantQuery& q, OrthantMethod method, double precision,
                                         std::uint64_t seed, std::uint64_t sample_cap = kDefaultSampleCap) {
  if (q.pattern.size() != q.spec.n())
    throw Error(ErrorCode::InconsistentDimension, "pattern length differs from spec dimension");
  const Mask bits = pattern_to_mask(q.pattern);
  const auto st = standardize(q.spec);
  const bool closed = detail::closed_form_available(st);
  if (method == OrthantMethod::automatic) method = closed ? OrthantMethod::closed_form : OrthantMethod::monte_carlo;
  if (method == OrthantMethod::closed_form && !closed)
    throw Error(ErrorCode::ClosedFormUnavailable,
                "closed form needs n <= 2, or n = 3 with zero standardized thresholds");
  OrthantResult out;
  out.method = method;
  const auto free_bits = detail::free_pattern_bits(st, bits);
  if (!free_bits) return out;
  if (method == OrthantMethod::closed_form) {
    out.probability = std::clamp(detail::closed_form_orthant(st, *free_bits), 0.0, 1.0);
    return out;
  }
  if (!(precision > 0.0)) throw Error(ErrorCode::InvalidArgument, "precision must be positive");
  if (st.free.empty()) {
    out.probability = 1.0;
    return out;
  }
  auto tally = detail::simulate_patterns(st, seed, sample_cap, [&](const detail::PatternTally& t) {
    const double se = t.stderr_of(*free_bits);
    if (se <= precision) return true;
    // stop once the projected sample count is far beyond the cap
    const double projected = 2.0 * static_cast<double>(t.pairs) * (se / precision) * (se / precision);
    return t.pairs >= (std::uint64_t{1} << 18) && projected > 16.0 * static_cast<double>(sample_cap);
  });
  out.probability = tally.estimate(*free_bits);
  out.standard_error = tally.stderr_of(*free_bits);
  out.samples = 2 * tally.pairs;
  if (out.standard_error > precision)
    throw Error(ErrorCode::PrecisionUnreachable,
                "stderr " + std::to_string(out.standard_error) + " above precision after " + std::to_string(out.samples) +
                    " samples");
  return out;
}

// ---------------------------------------------------------------------------
// Threshold laws

/// Law of X_i = 1{Z_i >= a_i} together with how it was obtained.
struct ThresholdLaw {
  BernoulliLaw law;
  OrthantMethod method = OrthantMethod::closed_form;
  std::uint64_t samples = 0;
  double max_stderr = 0.0;      // over patterns
  double max_adjustment = 0.0;  // largest change made by clamping/renormalizing
  Eigen::MatrixXd correlation;  // standardized correlation of the free coordinates

  /// Conservative six-sigma bound on the sampling error of any event covariance computed
  /// from this law; zero for closed-form laws.
  double noise_tolerance() const {
    if (method != OrthantMethod::monte_carlo || samples == 0) return 0.0;
    return 6.0 * 0.5 / std::sqrt(static_cast<double>(samples / 2));
  }
};

inline constexpr std::size_t kMaxThresholdDimension = 12;

inline ThresholdLaw threshold_law(const GaussianSpec& spec, double precision, std::uint64_t seed,
                                  std::uint64_t sample_cap = kDefaultSampleCap) {
  const std::size_t n = spec.n();
  detail::check_spec_shape(spec);
  if (n > kMaxThresholdDimension) throw Error(ErrorCode::DimensionTooLarge, "threshold laws need n <= 12");
  validate_spec(spec);
  const auto st = standardize(spec);
  const std::size_t m = st.free.size();
  const std::size_t patterns = std::size_t{1} << m;
  Mask fixed_bits = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (st.fixed_value[i] == 1) fixed_bits |= Mask{1} << i;

  ThresholdLaw out{BernoulliLaw::from_dense(1, {1.0, 0.0}), OrthantMethod::closed_form, 0, 0.0, 0.0, st.corr};
  std::vector<double> free_table(patterns, 0.0);
  if (detail::closed_form_available(st)) {
    for (Mask p = 0; p < patterns; ++p) free_table[p] = detail::closed_form_orthant(st, p);
  } else {
    if (!(precision > 0.0)) throw Error(ErrorCode::InvalidArgument, "precision must be positive");
    out.method = OrthantMethod::monte_carlo;
    auto worst = [&](const detail::PatternTally& t) {
      double w = 0.0;
      for (std::size_t p = 0; p < patterns; ++p) w = std::max(w, t.stderr_of(p));
      return w;
    };
    auto tally = detail::simulate_patterns(st, seed, sample_cap,
                                           [&](const detail::PatternTally& t) { return worst(t) <= precision; });
    for (Mask p = 0; p < patterns; ++p) free_table[p] = tally.estimate(p);
    out.samples = 2 * tally.pairs;
    out.max_stderr = worst(tally);
    if (out.max_stderr > precision)
      throw Error(ErrorCode::PrecisionUnreachable, "stderr " + std::to_string(out.max_stderr) +
                                                       " above precision after " + std::to_string(out.samples) +
                                                       " samples");
  }
  double total = 0.0;
  for (double& p : free_table) {
    if (p < 0.0) {
      out.max_adjustment = std::max(out.max_adjustment, -p);
      p = 0.0;
    }
    total += p;
  }
  std::vector<double> table(std::size_t{1} << n, 0.0);
  for (Mask p = 0; p < patterns; ++p) {
    const double normalized = free_table[p] / total;
    out.max_adjustment = std::max(out.max_adjustment, std::abs(normalized - free_table[p]));
    table[deposit_bits(p, st.free) | fixed_bits] = normalized;
  }
  out.law = BernoulliLaw::from_dense(n, std::move(table));
  return out;
}

// ---------------------------------------------------------------------------
// Canonical correlation

struct CanonicalCorrelation {
  double value = 0.0;
  std::size_t dropped_a = 0;  // degenerate directions removed from block A
  std::size_t dropped_b = 0;
};

namespace detail {

// W with W^T S W = I on the numerically nonsingular part of S (pseudo-inverse square root).
inline Eigen::MatrixXd whitening(const Eigen::MatrixXd& s, std::size_t& dropped) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    if (es.eigenvalues()(i) > 1e-12 * top) keep.push_back(i);
  dropped = static_cast<std::size_t>(s.rows()) - keep.size();
  Eigen::MatrixXd w(s.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    w.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]) / std::sqrt(es.eigenvalues()(keep[c]));
  return w;
}

inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows,
                                 const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          m(static_cast<Eigen::Index>(rows[a]), static_cast<Eigen::Index>(cols[b]));
  return out;
}

}  // namespace detail

/// Largest canonical correlation between blocks A and B: the top singular value of
/// S_AA^{-1/2} S_AB S_BB^{-1/2}, with degenerate directions removed.
inline CanonicalCorrelation max_linear_correlation(const GaussianSpec& spec, const std::vector<std::size_t>& block_a,
                                                   const std::vector<std::size_t>& block_b) {
  detail::check_spec_shape(spec);
  if (block_a.empty() || block_b.empty()) throw Error(ErrorCode::EmptyCoordinateSet, "blocks must be nonempty");
  check_coords(block_a, spec.n());
  check_coords(block_b, spec.n());
  if (mask_of(block_a) & mask_of(block_b)) throw Error(ErrorCode::OverlappingRanges, "blocks must be disjoint");
  CanonicalCorrelation out;
  const Eigen::MatrixXd wa = detail::whitening(detail::submatrix(spec.cov, block_a, block_a), out.dropped_a);
  const Eigen::MatrixXd wb = detail::whitening(detail::submatrix(spec.cov, block_b, block_b), out.dropped_b);
  if (wa.cols() == 0 || wb.cols() == 0) return out;
  const Eigen::MatrixXd k = wa.transpose() * detail::submatrix(spec.cov, block_a, block_b) * wb;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(k);
  out.value = std::clamp(svd.singularValues()(0), 0.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Tail projection profile

/// For Gram matrix G of vectors v_1..v_m: values[k] is the operator norm of the orthogonal
/// projection onto span(v_N..v_m), N = cut_points[k], restricted to span(v_1..v_head).
struct TailProfile {
  std::size_t head_size = 0;
  std::vector<std::size_t> cut_points;
  std::vector<double> values;
};

namespace detail {

inline Eigen::MatrixXd pseudo_inverse_sym(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd inv = es.eigenvalues();
  for (Eigen::Index i = 0; i < inv.size(); ++i) inv(i) = inv(i) > 1e-12 * top ? 1.0 / inv(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

inline TailProfile tail_projection_profile(const Eigen::MatrixXd& gram, std::size_t head_size,
                                           const std::vector<std::size_t>& cut_points) {
  const auto m = static_cast<std::size_t>(gram.rows());
  if (gram.rows() != gram.cols() || m == 0) throw Error(ErrorCode::InconsistentDimension, "Gram matrix must be square");
  detail::check_symmetric(gram, 1e-12 * std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff()));
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-10 * std::max(gram.trace(), 0.0))
      throw Error(ErrorCode::NotPSD, "Gram matrix has eigenvalue " + std::to_string(es.eigenvalues()(0)));
  }
  if (head_size < 1) throw Error(ErrorCode::InvalidArgument, "head size must be >= 1");
  if (cut_points.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one cut point");
  for (std::size_t k = 0; k < cut_points.size(); ++k) {
    if (cut_points[k] <= head_size) throw Error(ErrorCode::InvalidArgument, "cut points must exceed the head size");
    if (cut_points[k] > m) throw Error(ErrorCode::IndexOutOfRange, "cut point beyond the Gram dimension");
    if (k > 0 && cut_points[k] <= cut_points[k - 1]) throw Error(ErrorCode::InvalidArgument, "cut points must increase");
  }

  std::vector<std::size_t> head(head_size);
  for (std::size_t i = 0; i < head_size; ++i) head[i] = i;
  std::size_t dropped = 0;
  const Eigen::MatrixXd wh = detail::whitening(detail::submatrix(gram, head, head), dropped);

  TailProfile out{head_size, cut_points, {}};
  for (auto cut : cut_points) {
    std::vector<std::size_t> tail;
    for (std::size_t i = cut - 1; i < m; ++i) tail.push_back(i);
    const Eigen::MatrixXd cross = detail::submatrix(gram, tail, head);
    const Eigen::MatrixXd proj = cross.transpose() * detail::pseudo_inverse_sym(detail::submatrix(gram, tail, tail)) * cross;
    double value = 0.0;
    if (wh.cols() > 0) {
      const Eigen::MatrixXd k = wh.transpose() * proj * wh;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (k + k.transpose()), Eigen::EigenvaluesOnly);
      value = std::sqrt(std::clamp(es.eigenvalues().maxCoeff(), 0.0, 1.0));
    }
    out.values.push_back(value);
  }
  return out;
}

}  // namespace negdep

#endif  // NEGDEP_GAUSSIAN_HPP
