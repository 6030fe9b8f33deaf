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

#ifndef NEGDEP_CORE_HPP
#define NEGDEP_CORE_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace negdep {

enum class ErrorCode {
  NonNormalizable,
  InconsistentDimension,
  InvalidPattern,
  NegativeProbability,
  EmptyCoordinateSet,
  IndexOutOfRange,
  DimensionTooLarge,
  WrongDimension,
  NegativeCoefficient,
  NotPSD,
  AsymmetricCov,
  FactorizationFailure,
  OutOfRange,
  ClosedFormUnavailable,
  PrecisionUnreachable,
  InconsistentNesting,
  PositiveOffDiagonal,
  OverlappingRanges,
  NotToeplitz,
  DimensionMismatch,
  Disconnected,
  UnknownGalleryEntry,
  InvalidArgument,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonNormalizable: return "NonNormalizable";
    case ErrorCode::InconsistentDimension: return "InconsistentDimension";
    case ErrorCode::InvalidPattern: return "InvalidPattern";
    case ErrorCode::NegativeProbability: return "NegativeProbability";
    case ErrorCode::EmptyCoordinateSet: return "EmptyCoordinateSet";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::WrongDimension: return "WrongDimension";
    case ErrorCode::NegativeCoefficient: return "NegativeCoefficient";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::AsymmetricCov: return "AsymmetricCov";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ClosedFormUnavailable: return "ClosedFormUnavailable";
    case ErrorCode::PrecisionUnreachable: return "PrecisionUnreachable";
    case ErrorCode::InconsistentNesting: return "InconsistentNesting";
    case ErrorCode::PositiveOffDiagonal: return "PositiveOffDiagonal";
    case ErrorCode::OverlappingRanges: return "OverlappingRanges";
    case ErrorCode::NotToeplitz: return "NotToeplitz";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::UnknownGalleryEntry: return "UnknownGalleryEntry";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every library failure is reported as an Error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Subsets of coordinates.
//
// Bit k of a Mask is coordinate k (0-based). In textual patterns character k
// (left to right) is coordinate k, so "01" has coordinate 1 set and maps to 0b10.

using Mask = std::uint32_t;

inline constexpr std::size_t kMaxDimension = 30;
inline constexpr std::size_t kMaxDenseDimension = 20;

inline bool has_bit(Mask m, std::size_t k) { return (m >> k) & 1u; }

inline Mask full_mask(std::size_t n) { return n >= 32 ? ~Mask{0} : (Mask{1} << n) - 1; }

inline int popcount(Mask m) { return std::popcount(m); }

inline Mask mask_of(std::span<const std::size_t> coords) {
  Mask m = 0;
  for (auto c : coords) m |= Mask{1} << c;
  return m;
}

inline std::vector<std::size_t> coords_of(Mask m) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; m >> k; ++k)
    if (has_bit(m, k)) out.push_back(k);
  return out;
}

/// Gathers the bits of `m` selected by `coords` into a compact mask (bit j = coords[j]).
inline Mask extract_bits(Mask m, std::span<const std::size_t> coords) {
  Mask out = 0;
  for (std::size_t j = 0; j < coords.size(); ++j)
    if (has_bit(m, coords[j])) out |= Mask{1} << j;
  return out;
}

/// Inverse of extract_bits: scatters compact bits back onto `coords`.
inline Mask deposit_bits(Mask compact, std::span<const std::size_t> coords) {
  Mask out = 0;
  for (std::size_t j = 0; j < coords.size(); ++j)
    if (has_bit(compact, j)) out |= Mask{1} << coords[j];
  return out;
}

inline std::string mask_to_pattern(Mask m, std::size_t n) {
  std::string s(n, '0');
  for (std::size_t k = 0; k < n; ++k)
    if (has_bit(m, k)) s[k] = '1';
  return s;
}

inline Mask pattern_to_mask(std::string_view pattern) {
  if (pattern.size() > kMaxDimension)
    throw Error(ErrorCode::DimensionTooLarge, "pattern longer than " + std::to_string(kMaxDimension));
  Mask m = 0;
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    if (pattern[k] == '1')
      m |= Mask{1} << k;
    else if (pattern[k] != '0')
      throw Error(ErrorCode::InvalidPattern, "pattern '" + std::string(pattern) + "' contains a non-binary character");
  }
  return m;
}

inline void check_coords(std::span<const std::size_t> coords, std::size_t n) {
  for (auto c : coords)
    if (c >= n)
      throw Error(ErrorCode::IndexOutOfRange,
                  "coordinate " + std::to_string(c) + " outside [0," + std::to_string(n) + ")");
}

// ---------------------------------------------------------------------------
// BernoulliLaw

/// Probability law on {0,1}^n. Dense storage up to n = 20, ordered sparse map beyond.
class BernoulliLaw {
 public:
  static constexpr double kInputTolerance = 1e-9;
  static constexpr double kInternalTolerance = 1e-12;

  /// Internal constructor from a dense table of length 2^n. The table must already be
  /// normalized within `tolerance`; it is renormalized exactly.
  static BernoulliLaw from_dense(std::size_t n, std::vector<double> table,
                                 double tolerance = kInternalTolerance) {
    check_dimension(n);
    if (n > kMaxDenseDimension)
      throw Error(ErrorCode::DimensionTooLarge, "dense tables are limited to n <= 20");
    if (table.size() != (std::size_t{1} << n))
      throw Error(ErrorCode::InconsistentDimension, "dense table length is not 2^n");
    double total = 0.0;
    for (double& p : table) {
      if (p < 0.0) {
        if (p < -1e-15) throw Error(ErrorCode::NegativeProbability, "negative probability " + std::to_string(p));
        p = 0.0;
      }
      total += p;
    }
    if (std::abs(total - 1.0) > tolerance)
      throw Error(ErrorCode::NonNormalizable, "probabilities sum to " + std::to_string(total));
    for (double& p : table) p /= total;
    BernoulliLaw law;
    law.n_ = n;
    law.dense_ = std::move(table);
    return law;
  }

  static BernoulliLaw from_sparse(std::size_t n, const std::map<Mask, double>& entries,
                                  double tolerance = kInternalTolerance) {
    check_dimension(n);
    if (n <= kMaxDenseDimension) {
      std::vector<double> table(std::size_t{1} << n, 0.0);
      for (const auto& [m, p] : entries) {
        if (m > full_mask(n)) throw Error(ErrorCode::InconsistentDimension, "pattern outside {0,1}^n");
        table[m] += p;
      }
      return from_dense(n, std::move(table), tolerance);
    }
    double total = 0.0;
    std::map<Mask, double> kept;
    for (const auto& [m, p] : entries) {
      if (m > full_mask(n)) throw Error(ErrorCode::InconsistentDimension, "pattern outside {0,1}^n");
      if (p < -1e-15) throw Error(ErrorCode::NegativeProbability, "negative probability " + std::to_string(p));
      if (p > 0.0) {
        kept[m] += p;
        total += p;
      }
    }
    if (std::abs(total - 1.0) > tolerance)
      throw Error(ErrorCode::NonNormalizable, "probabilities sum to " + std::to_string(total));
    for (auto& kv : kept) kv.second /= total;
    BernoulliLaw law;
    law.n_ = n;
    law.sparse_ = std::move(kept);
    return law;
  }

  std::size_t n() const { return n_; }
  bool is_dense() const { return !dense_.empty(); }

  double prob(Mask m) const {
    if (is_dense()) return m < dense_.size() ? dense_[m] : 0.0;
    auto it = sparse_.find(m);
    return it == sparse_.end() ? 0.0 : it->second;
  }

  /// Visits every pattern of positive probability in increasing mask order.
  template <class F>
  void for_each(F&& visit) const {
    if (is_dense()) {
      for (Mask m = 0; m < dense_.size(); ++m)
        if (dense_[m] > 0.0) visit(m, dense_[m]);
    } else {
      for (const auto& [m, p] : sparse_) visit(m, p);
    }
  }

  std::size_t support_size() const {
    std::size_t count = 0;
    for_each([&](Mask, double) { ++count; });
    return count;
  }

  /// P(X_i = 1).
  double mean(std::size_t i) const {
    double total = 0.0;
    for_each([&](Mask m, double p) {
      if (has_bit(m, i)) total += p;
    });
    return total;
  }

  /// Probability of the event {X restricted to `coords` equals `compact`}.
  double prob_restricted(Mask coords_mask, Mask values_on_coords) const {
    double total = 0.0;
    for_each([&](Mask m, double p) {
      if ((m & coords_mask) == values_on_coords) total += p;
    });
    return total;
  }

 private:
  static void check_dimension(std::size_t n) {
    if (n < 1) throw Error(ErrorCode::InconsistentDimension, "law dimension must be >= 1");
    if (n > kMaxDimension)
      throw Error(ErrorCode::DimensionTooLarge, "law dimension exceeds " + std::to_string(kMaxDimension));
  }

  std::size_t n_ = 0;
  std::vector<double> dense_;
  std::map<Mask, double> sparse_;
};

/// Builds a law from user-supplied pattern probabilities (input tolerance 1e-9).
/// `declared_n`, when given, must match the key length.
inline BernoulliLaw law_from_pmf(const std::vector<std::pair<std::string, double>>& entries,
                                 std::optional<std::size_t> declared_n = std::nullopt) {
  if (entries.empty() && !declared_n) throw Error(ErrorCode::InconsistentDimension, "empty pmf");
  std::size_t n = declared_n.value_or(entries.empty() ? 0 : entries.front().first.size());
  std::map<Mask, double> table;
  double total = 0.0;
  for (const auto& [key, value] : entries) {
    if (key.size() != n)
      throw Error(ErrorCode::InconsistentDimension,
                  "pattern '" + key + "' has " + std::to_string(key.size()) + " bits, expected " + std::to_string(n));
    if (!std::isfinite(value)) throw Error(ErrorCode::NonNormalizable, "non-finite probability for '" + key + "'");
    if (value < -1e-15) throw Error(ErrorCode::NegativeProbability, "negative probability for '" + key + "'");
    double p = std::max(value, 0.0);
    table[pattern_to_mask(key)] += p;
    total += p;
  }
  if (std::abs(total - 1.0) > BernoulliLaw::kInputTolerance)
    throw Error(ErrorCode::NonNormalizable, "probabilities sum to " + std::to_string(total));
  return BernoulliLaw::from_sparse(n, table, BernoulliLaw::kInputTolerance);
}

/// Entry (i,j) is E[X_i X_j] - E[X_i] E[X_j].
inline Eigen::MatrixXd covariance_matrix(const BernoulliLaw& law) {
  const auto n = static_cast<Eigen::Index>(law.n());
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd first = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Index> ones;
  law.for_each([&](Mask m, double p) {
    ones.clear();
    for (Eigen::Index i = 0; i < n; ++i)
      if (has_bit(m, static_cast<std::size_t>(i))) ones.push_back(i);
    for (auto i : ones) {
      first(i) += p;
      for (auto j : ones)
        if (j >= i) second(i, j) += p;
    }
  });
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      cov(i, j) = second(i, j) - first(i) * first(j);
      cov(j, i) = cov(i, j);
    }
  return cov;
}

/// Pushforward onto `coords`; coordinate j of the result is coords[j].
inline BernoulliLaw marginal(const BernoulliLaw& law, std::span<const std::size_t> coords) {
  if (coords.empty()) throw Error(ErrorCode::EmptyCoordinateSet, "marginal needs at least one coordinate");
  check_coords(coords, law.n());
  std::map<Mask, double> out;
  law.for_each([&](Mask m, double p) { out[extract_bits(m, coords)] += p; });
  return BernoulliLaw::from_sparse(coords.size(), out);
}

/// Relabels coordinates: coordinate k of the input becomes coordinate perm[k].
inline BernoulliLaw permute(const BernoulliLaw& law, std::span<const std::size_t> perm) {
  if (perm.size() != law.n()) throw Error(ErrorCode::InconsistentDimension, "permutation length differs from n");
  check_coords(perm, law.n());
  if (popcount(mask_of(perm)) != static_cast<int>(law.n()))
    throw Error(ErrorCode::InvalidArgument, "not a permutation");
  std::map<Mask, double> out;
  law.for_each([&](Mask m, double p) { out[deposit_bits(m, perm)] += p; });
  return BernoulliLaw::from_sparse(law.n(), out);
}

/// Conditional law of the coordinates outside `fixed`, given X on `fixed` equals `values`
/// (a full-width mask). Returns nullopt when the event has probability <= `min_prob`
/// or when no free coordinate remains.
inline std::optional<BernoulliLaw> conditional_on_complement(const BernoulliLaw& law, Mask fixed, Mask values,
                                                             double min_prob = 1e-12) {
  std::vector<std::size_t> free;
  for (std::size_t k = 0; k < law.n(); ++k)
    if (!has_bit(fixed, k)) free.push_back(k);
  if (free.empty()) return std::nullopt;
  std::map<Mask, double> out;
  double total = 0.0;
  law.for_each([&](Mask m, double p) {
    if ((m & fixed) == (values & fixed)) {
      out[extract_bits(m, free)] += p;
      total += p;
    }
  });
  if (total <= min_prob) return std::nullopt;
  for (auto& kv : out) kv.second /= total;
  return BernoulliLaw::from_sparse(free.size(), out);
}

// ---------------------------------------------------------------------------
// MultiaffinePoly

/// Multiaffine polynomial sum_S c_S prod_{i in S} z_i with dense coefficients indexed by Mask.
class MultiaffinePoly {
 public:
  MultiaffinePoly() = default;
  MultiaffinePoly(std::size_t n, std::vector<double> coeffs) : n_(n), coeffs_(std::move(coeffs)) {
    if (n > kMaxDenseDimension) throw Error(ErrorCode::DimensionTooLarge, "polynomials are limited to n <= 20");
    if (coeffs_.size() != (std::size_t{1} << n))
      throw Error(ErrorCode::InconsistentDimension, "coefficient vector length is not 2^n");
  }

  std::size_t n() const { return n_; }
  double coeff(Mask subset) const { return coeffs_[subset]; }
  std::span<const double> coeffs() const { return coeffs_; }

  double sum_abs_coeffs() const {
    double s = 0.0;
    for (double c : coeffs_) s += std::abs(c);
    return s;
  }

  /// Evaluates at `point` (length n) by folding out one variable at a time.
  template <class T>
  T evaluate(std::span<const T> point) const {
    if (point.size() != n_) throw Error(ErrorCode::WrongDimension, "evaluation point has wrong length");
    std::vector<T> work(coeffs_.begin(), coeffs_.end());
    for (std::size_t k = n_; k-- > 0;) {
      const std::size_t half = std::size_t{1} << k;
      for (std::size_t m = 0; m < half; ++m) work[m] += point[k] * work[m | half];
    }
    return work[0];
  }

  template <class T>
  T evaluate(const std::vector<T>& point) const {
    return evaluate(std::span<const T>(point));
  }

  /// Partial derivative in variable i (the result no longer involves z_i).
  MultiaffinePoly derivative(std::size_t i) const {
    std::vector<double> out(coeffs_.size(), 0.0);
    const Mask bit = Mask{1} << i;
    for (Mask m = 0; m < coeffs_.size(); ++m)
      if (!(m & bit)) out[m] = coeffs_[m | bit];
    return MultiaffinePoly(n_, std::move(out));
  }

  /// Substitutes real values for every variable outside `keep`, returning the coefficients
  /// of the polynomial in the kept variables (indexed by compact masks over `keep`).
  template <class T>
  std::vector<T> restrict_to(std::span<const std::size_t> keep, std::span<const T> point) const {
    const Mask keep_mask = mask_of(keep);
    std::vector<T> out(std::size_t{1} << keep.size(), T{});
    // coefficient of compact subset S' collects c_{S' ∪ R} * prod_{r in R} z_r over free R.
    for (Mask m = 0; m < coeffs_.size(); ++m) {
      if (coeffs_[m] == 0.0) continue;
      T term = T(coeffs_[m]);
      Mask rest = m & ~keep_mask;
      for (std::size_t k = 0; rest >> k; ++k)
        if (has_bit(rest, k)) term *= point[k];
      out[extract_bits(m, keep)] += term;
    }
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> coeffs_{0.0};
};

/// Coefficient of subset I equals the law's probability of pattern I.
inline MultiaffinePoly generating_polynomial(const BernoulliLaw& law) {
  if (law.n() > kMaxDenseDimension) throw Error(ErrorCode::DimensionTooLarge, "generating polynomial needs n <= 20");
  std::vector<double> coeffs(std::size_t{1} << law.n(), 0.0);
  law.for_each([&](Mask m, double p) { coeffs[m] = p; });
  return MultiaffinePoly(law.n(), std::move(coeffs));
}

// ---------------------------------------------------------------------------
// GaussianSpec

/// Gaussian vector Z ~ N(mean, cov) with threshold vector a, defining X_i = 1{Z_i >= a_i}.
struct GaussianSpec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::VectorXd thresholds;

  std::size_t n() const { return static_cast<std::size_t>(mean.size()); }
};

/// Zero mean and zero thresholds.
inline GaussianSpec centered_spec(Eigen::MatrixXd cov) {
  const auto n = cov.rows();
  return GaussianSpec{Eigen::VectorXd::Zero(n), std::move(cov), Eigen::VectorXd::Zero(n)};
}

// ---------------------------------------------------------------------------
// Verdict

enum class Status { holds, fails, inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::holds: return "holds";
    case Status::fails: return "fails";
    case Status::inconclusive: return "inconclusive";
  }
  return "unknown";
}

/// Outcome of a checker. A `fails` verdict always carries a witness that can be re-checked
/// independently of the search that found it.
template <class Witness>
struct Verdict {
  Status status = Status::inconclusive;
  std::optional<Witness> witness;
  std::map<std::string, std::uint64_t> budget_spent;
  std::vector<std::string> notes;

  bool holds() const { return status == Status::holds; }
  bool fails() const { return status == Status::fails; }
};

}  // namespace negdep

#endif  // NEGDEP_CORE_HPP
