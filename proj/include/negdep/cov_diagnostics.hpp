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

#ifndef NEGDEP_COV_DIAGNOSTICS_HPP
#define NEGDEP_COV_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "negdep/core.hpp"

namespace negdep {

enum class GrowthClass { bounded, logarithmic, sqrt, other };

inline const char* to_string(GrowthClass g) {
  switch (g) {
    case GrowthClass::bounded: return "bounded";
    case GrowthClass::logarithmic: return "logarithmic";
    case GrowthClass::sqrt: return "sqrt";
    case GrowthClass::other: return "other";
  }
  return "unknown";
}

struct GrowthFit {
  GrowthClass growth_class = GrowthClass::other;
  double fit_r2 = 0.0;
  double fit_exponent = 0.0;
  std::map<std::string, double> r2_by_model;
};

/// Partial sums S_i(n) = sum_{j<=n} |cov(X_i, X_j)| and their fitted growth class.
struct CovProfile {
  std::size_t index = 0;
  std::vector<std::size_t> ns;
  std::vector<double> partial_sums;
  GrowthClass growth_class = GrowthClass::other;
  double fit_exponent = 0.0;
  double fit_r2 = 0.0;
  std::map<std::string, double> r2_by_model;
  double last_doubling_increment = 0.0;  // S(n_max) - S(n_max / 2)
};

inline constexpr double kGrowthMinR2 = 0.95;
inline constexpr double kGrowthTieR2 = 1e-3;

namespace detail {

// Roughly geometric subset of positions, at most `points` of them, always keeping both ends.
inline std::vector<std::size_t> log_spaced_positions(const std::vector<std::size_t>& ns, std::size_t points = 60) {
  std::vector<std::size_t> out;
  if (ns.empty()) return out;
  const double lo = std::log(static_cast<double>(std::max<std::size_t>(ns.front(), 1)));
  const double hi = std::log(static_cast<double>(std::max<std::size_t>(ns.back(), 1)));
  std::size_t pos = 0;
  for (std::size_t k = 0; k < points; ++k) {
    const double target = points == 1 ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    while (pos + 1 < ns.size() && std::log(static_cast<double>(std::max<std::size_t>(ns[pos], 1))) < target - 1e-12) ++pos;
    if (out.empty() || out.back() != pos) out.push_back(pos);
  }
  if (out.back() != ns.size() - 1) out.push_back(ns.size() - 1);
  return out;
}

// Centered r^2 of the least-squares fit y = a + b x.
inline double affine_r2(const std::vector<double>& x, const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    mx += x[t];
    my += y[t];
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    sxx += (x[t] - mx) * (x[t] - mx);
    sxy += (x[t] - mx) * (y[t] - my);
    syy += (y[t] - my) * (y[t] - my);
  }
  if (syy <= 1e-300) return 1.0;
  if (sxx <= 1e-300) return 0.0;
  return std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
}

}  // namespace detail

/// Model selection over {constant, a + b log n, a + b sqrt n} on a log-spaced subset of the
/// points. The constant model scores 1 - SS_tot / sum y^2 (share of the signal a constant
/// explains); the growth models score their centered r^2. Best score wins, ties within 1e-3
/// go to the slower class, and a best score below 0.95 is `other`.
inline GrowthFit classify_growth(const std::vector<std::size_t>& ns, const std::vector<double>& values) {
  if (ns.size() != values.size() || ns.size() < 3)
    throw Error(ErrorCode::InvalidArgument, "growth classification needs at least 3 matching points");
  const auto pos = detail::log_spaced_positions(ns);
  std::vector<double> y, logn, sqrtn;
  for (auto p : pos) {
    y.push_back(values[p]);
    logn.push_back(std::log(static_cast<double>(ns[p])));
    sqrtn.push_back(std::sqrt(static_cast<double>(ns[p])));
  }
  double mean = 0, energy = 0;
  for (double v : y) {
    mean += v;
    energy += v * v;
  }
  mean /= static_cast<double>(y.size());
  double sst = 0;
  for (double v : y) sst += (v - mean) * (v - mean);
  const double r2_const = energy <= 1e-300 ? 1.0 : 1.0 - sst / energy;

  GrowthFit fit;
  fit.r2_by_model = {{"constant", r2_const}, {"log", detail::affine_r2(logn, y)}, {"sqrt", detail::affine_r2(sqrtn, y)}};
  const std::pair<GrowthClass, double> ranked[] = {{GrowthClass::bounded, fit.r2_by_model["constant"]},
                                                  {GrowthClass::logarithmic, fit.r2_by_model["log"]},
                                                  {GrowthClass::sqrt, fit.r2_by_model["sqrt"]}};
  double best = -1.0;
  for (const auto& [cls, r2] : ranked) best = std::max(best, r2);
  for (const auto& [cls, r2] : ranked)
    if (r2 >= best - kGrowthTieR2) {
      fit.growth_class = cls;
      fit.fit_r2 = r2;
      break;
    }
  if (best < kGrowthMinR2) {
    fit.growth_class = GrowthClass::other;
    fit.fit_r2 = best;
  }

  // Log-log slope over the positive values, reported for reference.
  std::vector<double> lx, ly;
  for (std::size_t t = 0; t < y.size(); ++t)
    if (y[t] > 0) {
      lx.push_back(logn[t]);
      ly.push_back(std::log(y[t]));
    }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t t = 0; t < lx.size(); ++t) {
      mx += lx[t];
      my += ly[t];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxx = 0, sxy = 0;
    for (std::size_t t = 0; t < lx.size(); ++t) {
      sxx += (lx[t] - mx) * (lx[t] - mx);
      sxy += (lx[t] - mx) * (ly[t] - my);
    }
    fit.fit_exponent = sxx > 0 ? sxy / sxx : 0.0;
  }
  return fit;
}

namespace detail {

inline void fill_profile_fit(CovProfile& profile) {
  const auto fit = classify_growth(profile.ns, profile.partial_sums);
  profile.growth_class = fit.growth_class;
  profile.fit_r2 = fit.fit_r2;
  profile.fit_exponent = fit.fit_exponent;
  profile.r2_by_model = fit.r2_by_model;
  const std::size_t half = profile.ns.back() / 2;
  auto it = std::lower_bound(profile.ns.begin(), profile.ns.end(), half);
  if (it != profile.ns.end())
    profile.last_doubling_increment =
        profile.partial_sums.back() - profile.partial_sums[static_cast<std::size_t>(it - profile.ns.begin())];
}

}  // namespace detail

using CovSequence = std::function<Eigen::MatrixXd(std::size_t)>;

/// Profile of row `i` (0-based) for a nested sequence of covariance matrices: seq(n) must be
/// the leading n x n block of seq(n_max). Nesting is verified at every halving of n_max.
inline CovProfile row_sum_profile(const CovSequence& seq, std::size_t i, std::size_t n_max) {
  if (n_max < i + 3) throw Error(ErrorCode::InvalidArgument, "n_max must exceed the index by at least 3");
  const Eigen::MatrixXd full = seq(n_max);
  const auto nm = static_cast<Eigen::Index>(n_max);
  if (full.rows() != nm || full.cols() != nm)
    throw Error(ErrorCode::InconsistentNesting, "sequence member at n_max has the wrong size");
  const double scale = std::max(1.0, full.cwiseAbs().maxCoeff());
  for (std::size_t n = n_max / 2; n >= i + 1 && n >= 1; n /= 2) {
    const Eigen::MatrixXd part = seq(n);
    const auto nn = static_cast<Eigen::Index>(n);
    if (part.rows() != nn || part.cols() != nn ||
        (part - full.topLeftCorner(nn, nn)).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw Error(ErrorCode::InconsistentNesting, "member " + std::to_string(n) + " is not a leading block");
    if (n == 1) break;
  }
  CovProfile profile;
  profile.index = i;
  double running = 0.0;
  for (std::size_t j = 0; j < n_max; ++j) {
    running += std::abs(full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    if (j >= i) {
      profile.ns.push_back(j + 1);
      profile.partial_sums.push_back(running);
    }
  }
  detail::fill_profile_fit(profile);
  return profile;
}

/// Profile of row `i` across a non-nested family: S(n) is the full absolute row sum of
/// family(n), evaluated on a log-spaced grid of n in [n_min, n_max].
inline CovProfile family_row_sum_profile(const CovSequence& family, std::size_t i, std::size_t n_min,
                                         std::size_t n_max, std::size_t grid_points = 60) {
  if (n_min < 1 || n_max < n_min + 2) throw Error(ErrorCode::InvalidArgument, "need 1 <= n_min and n_max >= n_min + 2");
  std::vector<std::size_t> all(n_max - n_min + 1);
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = n_min + k;
  CovProfile profile;
  profile.index = i;
  for (auto p : detail::log_spaced_positions(all, grid_points)) {
    const Eigen::MatrixXd m = family(all[p]);
    if (static_cast<std::size_t>(m.rows()) <= i) throw Error(ErrorCode::IndexOutOfRange, "index outside family member");
    profile.ns.push_back(all[p]);
    profile.partial_sums.push_back(m.row(static_cast<Eigen::Index>(i)).cwiseAbs().sum());
  }
  detail::fill_profile_fit(profile);
  return profile;
}

// ---------------------------------------------------------------------------
// Bounds for negatively correlated Bernoulli vectors

/// Reports the quantity that was compared against its bound; `index` is the offending row
/// for row-wise checks.
struct BoundWitness {
  std::optional<std::size_t> index;
  double value = 0.0;
  double bound = 0.0;
};

namespace detail {

inline void require_nonpositive_offdiagonal(const Eigen::MatrixXd& cov, double tol = 1e-12) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) throw Error(ErrorCode::InconsistentDimension, "covariance must be square");
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    for (Eigen::Index j = 0; j < cov.cols(); ++j)
      if (i != j && cov(i, j) > tol)
        throw Error(ErrorCode::PositiveOffDiagonal, "cov(" + std::to_string(i) + "," + std::to_string(j) +
                                                        ") = " + std::to_string(cov(i, j)) + " > 0");
}

// Witness: the row with the largest absolute sum, failing or not.
inline Verdict<BoundWitness> row_bound(const Eigen::MatrixXd& cov, double bound, double tol) {
  Verdict<BoundWitness> v;
  v.status = Status::holds;
  double worst = -1.0;
  std::size_t worst_row = 0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    const double s = cov.row(i).cwiseAbs().sum();
    if (s > worst) {
      worst = s;
      worst_row = static_cast<std::size_t>(i);
    }
  }
  if (worst > bound + tol) v.status = Status::fails;
  v.witness = BoundWitness{worst_row, worst, bound};
  v.budget_spent["rows_checked"] = static_cast<std::uint64_t>(cov.rows());
  return v;
}

}  // namespace detail

/// sum_{i,j} |cov(X_i,X_j)| <= n/2 for negatively correlated Bernoulli variables.
/// The witness slot always carries the compared total.
inline Verdict<BoundWitness> check_pairwise_sum_bound(const Eigen::MatrixXd& cov, double tol = 1e-10) {
  detail::require_nonpositive_offdiagonal(cov);
  const double total = cov.cwiseAbs().sum();
  const double bound = 0.5 * static_cast<double>(cov.rows());
  Verdict<BoundWitness> v;
  v.status = total <= bound + tol ? Status::holds : Status::fails;
  v.witness = BoundWitness{std::nullopt, total, bound};
  return v;
}

/// Every row: sum_j |cov(X_i,X_j)| <= 1/4 + (3/4) sqrt(n).
inline Verdict<BoundWitness> check_row_sum_bound(const Eigen::MatrixXd& cov, double tol = 1e-10) {
  detail::require_nonpositive_offdiagonal(cov);
  return detail::row_bound(cov, 0.25 + 0.75 * std::sqrt(static_cast<double>(cov.rows())), tol);
}

/// Weakly stationary (Toeplitz) negatively correlated covariances: every row sums to <= 1/2.
inline Verdict<BoundWitness> stationary_row_bound_check(const Eigen::MatrixXd& cov, double tol = 1e-10) {
  detail::require_nonpositive_offdiagonal(cov);
  for (Eigen::Index i = 1; i < cov.rows(); ++i)
    for (Eigen::Index j = 1; j < cov.cols(); ++j)
      if (std::abs(cov(i, j) - cov(i - 1, j - 1)) > 1e-12)
        throw Error(ErrorCode::NotToeplitz, "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                                ") differs from its diagonal predecessor");
  return detail::row_bound(cov, 0.5, tol);
}

// ---------------------------------------------------------------------------
// Decorrelation

/// cov(|X ∩ A|, |X ∩ B|) for coordinate blocks A and B.
inline double count_covariance(const BernoulliLaw& law, const std::vector<std::size_t>& block_a,
                               const std::vector<std::size_t>& block_b) {
  check_coords(block_a, law.n());
  check_coords(block_b, law.n());
  const Eigen::MatrixXd cov = covariance_matrix(law);
  double total = 0.0;
  for (auto a : block_a)
    for (auto b : block_b) total += cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  return total;
}

/// |cov(sum_{i in A} X_i, sum_{j >= tail_start} X_j)|, coordinates 0-based.
inline double decorrelation_bound(const BernoulliLaw& law, const std::vector<std::size_t>& block,
                                  std::size_t tail_start) {
  if (block.empty()) throw Error(ErrorCode::EmptyCoordinateSet, "block A must be nonempty");
  check_coords(block, law.n());
  if (tail_start >= law.n()) throw Error(ErrorCode::IndexOutOfRange, "tail start beyond the last coordinate");
  for (auto a : block)
    if (a >= tail_start) throw Error(ErrorCode::OverlappingRanges, "block A meets the tail");
  std::vector<std::size_t> tail;
  for (std::size_t j = tail_start; j < law.n(); ++j) tail.push_back(j);
  return std::abs(count_covariance(law, block, tail));
}

/// sup |cov(1_E, 1_F)| over E in σ(X_A), F in σ(X_B) with the maximizing events (patterns
/// over the block coordinates).
struct EventCovariance {
  double value = 0.0;
  std::vector<Mask> event_a;
  std::vector<Mask> event_b;
};

/// Exact event supremum: enumerates events on the smaller block (at most 4 coordinates) and
/// takes the optimal event on the other block pattern by pattern.
inline EventCovariance max_event_covariance(const BernoulliLaw& law, const std::vector<std::size_t>& block_a,
                                            const std::vector<std::size_t>& block_b) {
  if (block_a.empty() || block_b.empty()) throw Error(ErrorCode::EmptyCoordinateSet, "blocks must be nonempty");
  check_coords(block_a, law.n());
  check_coords(block_b, law.n());
  if (mask_of(block_a) & mask_of(block_b)) throw Error(ErrorCode::OverlappingRanges, "blocks must be disjoint");
  const bool swap = block_a.size() > block_b.size();
  const auto& small = swap ? block_b : block_a;
  const auto& large = swap ? block_a : block_b;
  if (small.size() > 4 || large.size() > 16)
    throw Error(ErrorCode::DimensionTooLarge, "event enumeration needs min block <= 4 and max block <= 16");
  const std::size_t ns = std::size_t{1} << small.size(), nl = std::size_t{1} << large.size();
  std::vector<double> joint(ns * nl, 0.0), ps(ns, 0.0), pl(nl, 0.0);
  law.for_each([&](Mask m, double p) {
    const Mask s = extract_bits(m, small), l = extract_bits(m, large);
    joint[s * nl + l] += p;
    ps[s] += p;
    pl[l] += p;
  });
  EventCovariance best;
  const std::uint64_t events = std::uint64_t{1} << ns;
  std::vector<double> w(nl);
  for (std::uint64_t e = 1; e + 1 < events; ++e) {
    double pe = 0.0;
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t s = 0; s < ns; ++s)
      if ((e >> s) & 1u) {
        pe += ps[s];
        for (std::size_t l = 0; l < nl; ++l) w[l] += joint[s * nl + l];
      }
    double pos = 0.0, neg = 0.0;
    for (std::size_t l = 0; l < nl; ++l) {
      w[l] -= pe * pl[l];
      (w[l] > 0 ? pos : neg) += w[l];
    }
    const bool take_pos = pos >= -neg;
    const double value = take_pos ? pos : -neg;
    if (value > best.value) {
      best.value = value;
      std::vector<Mask> ev_small, ev_large;
      for (std::size_t s = 0; s < ns; ++s)
        if ((e >> s) & 1u) ev_small.push_back(static_cast<Mask>(s));
      for (std::size_t l = 0; l < nl; ++l)
        if (take_pos ? w[l] > 0 : w[l] < 0) ev_large.push_back(static_cast<Mask>(l));
      best.event_a = swap ? ev_large : ev_small;
      best.event_b = swap ? ev_small : ev_large;
    }
  }
  return best;
}

}  // namespace negdep

#endif  // NEGDEP_COV_DIAGNOSTICS_HPP
